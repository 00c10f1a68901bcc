use std::sync::Arc;

use super::{history, render_ids, LanguageModel, Method, ModelDump};
use crate::corpus::TokenId;
use crate::counts::CountTable;
use crate::error::{LmError, Result};

/// Relative frequencies `c(h w) / N(h)`.
#[derive(Debug, Clone)]
pub struct MaximumLikelihood {
    counts: Arc<CountTable>,
    events: usize,
}

impl MaximumLikelihood {
    pub fn new(counts: Arc<CountTable>, events: usize) -> Self {
        MaximumLikelihood { counts, events }
    }

    /// Relative frequency at order `k`.
    pub fn prob_at(&self, k: usize, context: &[TokenId], word: TokenId) -> Result<f64> {
        let h = history(context, k);
        match self.counts.history(h) {
            Some(node) => Ok(node.count(word) as f64 / node.total as f64),
            None => Err(LmError::UndefinedDistribution {
                history: render_ids(h),
            }),
        }
    }
}

impl LanguageModel for MaximumLikelihood {
    fn method(&self) -> Method {
        Method::Ml
    }

    fn order(&self) -> usize {
        self.counts.order()
    }

    fn event_count(&self) -> usize {
        self.events
    }

    fn prob(&self, context: &[TokenId], word: TokenId) -> Result<f64> {
        self.prob_at(self.order(), context, word)
    }

    fn distribution(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        let h = history(context, self.order());
        let node = self.counts.history(h).ok_or_else(|| LmError::UndefinedDistribution {
            history: render_ids(h),
        })?;
        let mut p = vec![0.0; self.events + 1];
        for &(w, c) in &node.words {
            p[w as usize] = c as f64 / node.total as f64;
        }
        Ok(p)
    }

    fn params(&self) -> Vec<(String, String)> {
        Vec::new()
    }

    fn dump(&self) -> Result<ModelDump> {
        let n = self.order();
        let mut dump = ModelDump::new(self, self.events);
        dump.strict = true;
        for (h, node) in self.counts.histories(n - 1) {
            for &(w, c) in &node.words {
                dump.push_gram(h, w, c as f64 / node.total as f64, None);
            }
            dump.push_bow(h, 0.0);
        }
        Ok(dump)
    }
}
