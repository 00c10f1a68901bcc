//! Interpolation whose lower-order weight grows with the number of words
//! seen exactly once after a history: `α(h) = γ (n₁(h) + β)`.

use std::sync::Arc;

use super::{fmt_param, history, LanguageModel, Method, ModelDump};
use crate::corpus::TokenId;
use crate::counts::{CountTable, HistoryNode};
use crate::error::{LmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OneCountParams {
    /// Per order, index `k-1`.
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl OneCountParams {
    pub fn uniform(order: usize, beta: f64, gamma: f64) -> Self {
        OneCountParams {
            beta: vec![beta; order],
            gamma: vec![gamma; order],
        }
    }
}

#[derive(Debug, Clone)]
pub struct OneCount {
    counts: Arc<CountTable>,
    events: usize,
    params: OneCountParams,
}

impl OneCount {
    pub fn new(counts: Arc<CountTable>, events: usize, params: OneCountParams) -> Result<Self> {
        let n = counts.order();
        if params.beta.len() != n || params.gamma.len() != n {
            return Err(LmError::invalid(format!("one-count needs {n} beta and gamma values")));
        }
        for k in 0..n {
            let (b, g) = (params.beta[k], params.gamma[k]);
            if !(b.is_finite() && g.is_finite()) || b < 0.0 || g < 0.0 {
                return Err(LmError::invalid(format!(
                    "order {}: beta={b}, gamma={g} would make alpha negative",
                    k + 1
                )));
            }
        }
        Ok(OneCount {
            counts,
            events,
            params,
        })
    }

    pub fn alpha(&self, k: usize, node: &HistoryNode) -> f64 {
        self.params.gamma[k - 1] * (node.ones as f64 + self.params.beta[k - 1])
    }

    pub fn prob_at(&self, k: usize, context: &[TokenId], word: TokenId) -> f64 {
        let mut p = 1.0 / self.events as f64;
        for j in 1..=k {
            if let Some(node) = self.counts.history(history(context, j)) {
                let a = self.alpha(j, node);
                p = (node.count(word) as f64 + a * p) / (node.total as f64 + a);
            }
        }
        p
    }
}

impl LanguageModel for OneCount {
    fn method(&self) -> Method {
        Method::NewOneCount
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
        let mut p = vec![1.0 / self.events as f64; self.events + 1];
        p[0] = 0.0;
        for k in 1..=self.order() {
            if let Some(node) = self.counts.history(history(context, k)) {
                let a = self.alpha(k, node);
                let den = node.total as f64 + a;
                p.iter_mut().for_each(|x| *x = a * *x / den);
                for &(w, c) in &node.words {
                    p[w as usize] += c as f64 / den;
                }
            }
        }
        Ok(p)
    }

    fn params(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for k in 0..self.order() {
            out.push((format!("beta{}", k + 1), fmt_param(self.params.beta[k])));
            out.push((format!("gamma{}", k + 1), fmt_param(self.params.gamma[k])));
        }
        out
    }

    fn dump(&self) -> Result<ModelDump> {
        let mut dump = ModelDump::new(self, self.events);
        for k in 1..=self.order() {
            for (h, node) in self.counts.histories(k - 1) {
                for &(w, _) in &node.words {
                    dump.push_gram(h, w, self.prob_at(k, h, w), None);
                }
                let a = self.alpha(k, node);
                dump.push_bow(h, a / (node.total as f64 + a));
            }
        }
        Ok(dump)
    }
}
