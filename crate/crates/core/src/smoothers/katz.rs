//! Katz back-off: Good-Turing discounts for small counts, leftover mass
//! spread over unseen words in proportion to the next-lower model.

use std::sync::Arc;

use super::{fmt_param, history, LanguageModel, Method, ModelDump};
use crate::corpus::TokenId;
use crate::counts::{CountOfCounts, CountTable, HistoryNode};
use crate::error::{LmError, Result};
use crate::exec::Execution;

/// Discount ratios `d_1..d_k` for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct KatzDiscounts {
    pub k: usize,
    pub d: Vec<f64>,
}

impl KatzDiscounts {
    /// Discounted count for a raw count `r >= 1`.
    pub fn apply(&self, r: u64) -> f64 {
        if r as usize <= self.k {
            self.d[r as usize - 1] * r as f64
        } else {
            r as f64
        }
    }
}

fn try_cutoff(coc: &CountOfCounts, k: usize) -> Option<KatzDiscounts> {
    let n1 = coc.get(1) as f64;
    let mu = (k + 1) as f64 * coc.get(k as u64 + 1) as f64 / n1;
    if !(1.0 - mu).is_normal() {
        return None;
    }
    let mut d = Vec::with_capacity(k);
    for r in 1..=k as u64 {
        let (nr, next) = (coc.get(r), coc.get(r + 1));
        if nr == 0 || next == 0 {
            return None;
        }
        let r_star = (r + 1) as f64 * next as f64 / nr as f64;
        let dr = (r_star / r as f64 - mu) / (1.0 - mu);
        if !(dr > 0.0 && dr <= 1.0) {
            return None;
        }
        d.push(dr);
    }
    Some(KatzDiscounts { k, d })
}

/// Largest cutoff `k <= requested` (unbounded when `None`) with every
/// needed `n_r` present and every `d_r` in `(0, 1]`.
pub fn katz_discounts(coc: &CountOfCounts, requested: Option<usize>) -> Result<KatzDiscounts> {
    if coc.get(1) == 0 {
        return Err(LmError::UndefinedEstimate {
            r: 1,
            reason: "no singletons to estimate discounts from".into(),
        });
    }
    let mut contiguous: usize = 0;
    while coc.get(contiguous as u64 + 1) > 0 {
        contiguous += 1;
    }
    // need n_1..n_{k+1}
    let mut k = requested.unwrap_or(usize::MAX).min(contiguous.saturating_sub(1));
    while k > 0 {
        if let Some(d) = try_cutoff(coc, k) {
            return Ok(d);
        }
        k -= 1;
    }
    Err(LmError::UndefinedEstimate {
        r: 1,
        reason: "no cutoff gives discount ratios in (0, 1]".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatzParams {
    /// Upper limit on the cutoff; `None` lets it grow as far as possible.
    pub k: Option<usize>,
    /// Additive constant for the unigram distribution.
    pub delta: f64,
    /// Mass for unseen words in histories with nothing to discount.
    pub beta: f64,
}

impl Default for KatzParams {
    fn default() -> Self {
        KatzParams {
            k: None,
            delta: 1.0,
            beta: 1.0,
        }
    }
}

impl KatzParams {
    /// Extrapolated unigram constant for large training sets of `sentences`.
    pub fn preset_delta(sentences: u64) -> f64 {
        0.0011 * (sentences as f64).powf(0.7)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HistoryWeight {
    seen_div: f64,
    discount: bool,
    backoff: f64,
}

#[derive(Debug, Clone)]
pub struct Katz {
    counts: Arc<CountTable>,
    events: usize,
    params: KatzParams,
    // index k-2 for order k >= 2
    discounts: Vec<KatzDiscounts>,
    weights: Vec<Vec<HistoryWeight>>,
    unigram_den: f64,
}

impl Katz {
    pub fn new(counts: Arc<CountTable>, events: usize, params: KatzParams, exec: Execution) -> Result<Self> {
        if !(params.delta > 0.0 && params.delta.is_finite()) {
            return Err(LmError::invalid("katz delta must be positive"));
        }
        if !(params.beta > 0.0 && params.beta.is_finite()) {
            return Err(LmError::invalid("katz beta must be positive"));
        }
        let n = counts.order();
        let discounts = (2..=n)
            .map(|k| katz_discounts(&counts.count_of_counts(k), params.k))
            .collect::<Result<Vec<_>>>()?;
        let unigram_den = counts.tokens() as f64 + params.delta * events as f64;
        let mut model = Katz {
            counts,
            events,
            params,
            discounts,
            weights: Vec::new(),
            unigram_den,
        };
        for k in 2..=n {
            let level: Vec<(&[TokenId], &HistoryNode)> = model.counts.histories(k - 1).collect();
            let w = exec.map(&level, |&(h, node)| model.history_weight(k, h, node));
            model.weights.push(w);
        }
        Ok(model)
    }

    pub fn discounts(&self) -> &[KatzDiscounts] {
        &self.discounts
    }

    fn history_weight(&self, k: usize, h: &[TokenId], node: &HistoryNode) -> HistoryWeight {
        let total = node.total as f64;
        if node.distinct as usize >= self.events {
            return HistoryWeight {
                seen_div: total,
                discount: false,
                backoff: 0.0,
            };
        }
        let disc = &self.discounts[k - 2];
        let mut seen_low = 0.0;
        let mut removed = 0.0;
        for &(w, c) in &node.words {
            seen_low += self.prob_at(k - 1, h, w);
            removed += c as f64 - disc.apply(c);
        }
        let unseen_low = 1.0 - seen_low;
        if removed > 0.0 {
            HistoryWeight {
                seen_div: total,
                discount: true,
                backoff: removed / (total * unseen_low),
            }
        } else {
            let beta = self.params.beta;
            HistoryWeight {
                seen_div: total + beta,
                discount: false,
                backoff: beta / ((total + beta) * unseen_low),
            }
        }
    }

    fn unigram(&self, word: TokenId) -> f64 {
        let c = self.counts.count(&[word]) as f64;
        (c + self.params.delta) / self.unigram_den
    }

    /// Order-`k` Katz probability.
    pub fn prob_at(&self, k: usize, context: &[TokenId], word: TokenId) -> f64 {
        if k == 1 {
            return self.unigram(word);
        }
        let h = history(context, k);
        if let Some((i, node)) = self.counts.history_entry(h) {
            let hw = self.weights[k - 2][i];
            let r = node.count(word);
            if r > 0 {
                let c = if hw.discount {
                    self.discounts[k - 2].apply(r)
                } else {
                    r as f64
                };
                return c / hw.seen_div;
            }
            return hw.backoff * self.prob_at(k - 1, context, word);
        }
        self.prob_at(k - 1, context, word)
    }

    /// Corrected count `c_katz(h w)` at order `k >= 2`; zero for unseen `h`.
    pub fn corrected_count(&self, k: usize, context: &[TokenId], word: TokenId) -> f64 {
        let h = history(context, k);
        self.counts
            .history(h)
            .map_or(0.0, |node| self.prob_at(k, context, word) * node.total as f64)
    }

    fn distribution_at(&self, k: usize, context: &[TokenId]) -> Vec<f64> {
        if k == 1 {
            let mut p: Vec<f64> = (0..=self.events as TokenId).map(|w| self.unigram(w)).collect();
            p[0] = 0.0;
            return p;
        }
        let mut p = self.distribution_at(k - 1, context);
        if let Some((i, node)) = self.counts.history_entry(history(context, k)) {
            let hw = self.weights[k - 2][i];
            p.iter_mut().for_each(|x| *x *= hw.backoff);
            for &(w, r) in &node.words {
                let c = if hw.discount {
                    self.discounts[k - 2].apply(r)
                } else {
                    r as f64
                };
                p[w as usize] = c / hw.seen_div;
            }
        }
        p
    }
}

impl LanguageModel for Katz {
    fn method(&self) -> Method {
        Method::Katz
    }

    fn order(&self) -> usize {
        self.counts.order()
    }

    fn event_count(&self) -> usize {
        self.events
    }

    fn prob(&self, context: &[TokenId], word: TokenId) -> Result<f64> {
        Ok(self.prob_at(self.order(), context, word))
    }

    fn distribution(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        Ok(self.distribution_at(self.order(), context))
    }

    fn params(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("delta".into(), fmt_param(self.params.delta)),
            ("beta".into(), fmt_param(self.params.beta)),
        ];
        for (i, d) in self.discounts.iter().enumerate() {
            out.push((format!("k{}", i + 2), d.k.to_string()));
        }
        out
    }

    fn dump(&self) -> Result<ModelDump> {
        let mut dump = ModelDump::new(self, self.events);
        for (h, node) in self.counts.histories(0) {
            for &(w, _) in &node.words {
                dump.push_gram(h, w, self.unigram(w), None);
            }
        }
        dump.push_bow(&[], self.params.delta * self.events as f64 / self.unigram_den);
        for k in 2..=self.order() {
            for (i, (h, node)) in self.counts.histories(k - 1).enumerate() {
                for &(w, _) in &node.words {
                    dump.push_gram(h, w, self.prob_at(k, h, w), None);
                }
                dump.push_bow(h, self.weights[k - 2][i].backoff);
            }
        }
        Ok(dump)
    }
}
