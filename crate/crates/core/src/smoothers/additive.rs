use std::sync::Arc;

use super::{fmt_param, history, LanguageModel, Method, ModelDump};
use crate::corpus::TokenId;
use crate::counts::CountTable;
use crate::error::{LmError, Result};

/// Which outcome set the pseudo-counts are spread over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenominatorSpace {
    /// Every predicted event (content words, unknown, end marker). Normalized.
    #[default]
    Events,
    /// Content words only, as in hand-worked textbook examples. The result
    /// does not sum to one over the event space.
    ContentWords,
}

/// `(c(h w) + δ) / (N(h) + δ·D)`.
#[derive(Debug, Clone)]
pub struct Additive {
    counts: Arc<CountTable>,
    events: usize,
    delta: f64,
    space_size: usize,
    space: DenominatorSpace,
}

impl Additive {
    /// `content_words` is only consulted for [`DenominatorSpace::ContentWords`].
    pub fn new(
        counts: Arc<CountTable>,
        events: usize,
        content_words: usize,
        delta: f64,
        space: DenominatorSpace,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(LmError::invalid(format!("delta must be positive, got {delta}")));
        }
        let space_size = match space {
            DenominatorSpace::Events => events,
            DenominatorSpace::ContentWords => content_words,
        };
        Ok(Additive {
            counts,
            events,
            delta,
            space_size,
            space,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn denominator(&self, total: u64) -> f64 {
        total as f64 + self.delta * self.space_size as f64
    }
}

impl LanguageModel for Additive {
    fn method(&self) -> Method {
        if self.delta == 1.0 {
            Method::PlusOne
        } else {
            Method::PlusDelta
        }
    }

    fn order(&self) -> usize {
        self.counts.order()
    }

    fn event_count(&self) -> usize {
        self.events
    }

    fn prob(&self, context: &[TokenId], word: TokenId) -> Result<f64> {
        let h = history(context, self.order());
        let (c, total) = match self.counts.history(h) {
            Some(node) => (node.count(word), node.total),
            None => (0, 0),
        };
        Ok((c as f64 + self.delta) / self.denominator(total))
    }

    fn distribution(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        let h = history(context, self.order());
        let node = self.counts.history(h);
        let den = self.denominator(node.map_or(0, |n| n.total));
        let mut p = vec![self.delta / den; self.events + 1];
        p[0] = 0.0;
        if let Some(node) = node {
            for &(w, c) in &node.words {
                p[w as usize] = (c as f64 + self.delta) / den;
            }
        }
        Ok(p)
    }

    fn params(&self) -> Vec<(String, String)> {
        let space = match self.space {
            DenominatorSpace::Events => "events",
            DenominatorSpace::ContentWords => "content-words",
        };
        vec![
            ("delta".into(), fmt_param(self.delta)),
            ("space".into(), space.into()),
        ]
    }

    fn dump(&self) -> Result<ModelDump> {
        let n = self.order();
        let mut dump = ModelDump::new(self, self.space_size);
        for (h, node) in self.counts.histories(n - 1) {
            let den = self.denominator(node.total);
            for &(w, c) in &node.words {
                dump.push_gram(h, w, (c as f64 + self.delta) / den, None);
            }
            // unseen p = δ/den = bow · (1/D)
            dump.push_bow(h, self.delta * self.space_size as f64 / den);
        }
        Ok(dump)
    }
}
