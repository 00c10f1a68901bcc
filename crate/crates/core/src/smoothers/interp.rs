//! Jelinek-Mercer interpolation with bucketed weights, in held-out,
//! deleted and average-count flavours.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::bucket::{BucketKey, BucketMap};
use super::{fmt_param, history, LanguageModel, Method, ModelDump};
use crate::corpus::{EncodedSentence, TokenId};
use crate::counts::{CountTable, HistoryNode};
use crate::error::{LmError, Result};
use crate::exec::Execution;
use crate::optimize::baum_welch::{baum_welch, BaumWelchOptions, BaumWelchResult, EmEvent, EmLevel, EmProblem};

pub const LAMBDA_0: f64 = 0.5;
pub const DELTA_STOP: f64 = 0.001;
pub const C_TOP: u64 = 100_000;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpParams {
    pub key: BucketKey,
    /// `u64::MAX` means one bucket per order.
    pub c_min: u64,
    pub c_top: u64,
    pub lambda0: f64,
    pub delta_stop: f64,
    pub max_iterations: usize,
}

impl InterpParams {
    pub fn new(key: BucketKey, c_min: u64) -> Self {
        InterpParams {
            key,
            c_min,
            c_top: C_TOP,
            lambda0: LAMBDA_0,
            delta_stop: DELTA_STOP,
            max_iterations: MAX_ITERATIONS,
        }
    }

    /// Defaults for one of the interpolated methods.
    pub fn for_method(method: Method, c_min: u64) -> Result<Self> {
        Ok(match method {
            Method::InterpHeldOut => Self::new(BucketKey::TotalCount, c_min),
            Method::InterpDelInt => Self::new(BucketKey::CountBeforeDeletion, c_min),
            Method::NewAvgCount => Self::new(BucketKey::AverageCount, c_min),
            Method::InterpBaseline => Self::new(BucketKey::TotalCount, u64::MAX),
            m => return Err(LmError::invalid(format!("{m} is not an interpolated method"))),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum LambdaTraining<'a> {
    /// Fit on held-out sentences disjoint from the counts.
    HeldOut(&'a [EncodedSentence]),
    /// Fit on the training counts, deleting one occurrence at a time.
    Deleted,
}

/// Distinct top-order events of held-out text with multiplicities, sorted.
pub fn held_out_events(sentences: &[EncodedSentence], n: usize) -> Vec<(Vec<TokenId>, u64)> {
    let mut map: FxHashMap<Vec<TokenId>, u64> = FxHashMap::default();
    for s in sentences {
        let ids = s.ids();
        for i in s.order() - 1..ids.len() {
            let lo = (i + 1).saturating_sub(n);
            let mut g: Vec<TokenId> = Vec::with_capacity(n);
            // sentences padded for a lower order are topped up with begin markers
            g.resize(n - (i + 1 - lo), crate::corpus::BOS);
            g.extend_from_slice(&ids[lo..=i]);
            *map.entry(g).or_default() += 1;
        }
    }
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort_unstable();
    v
}

/// Every training n-gram with its count, as the deletion events.
pub fn deleted_events(counts: &CountTable) -> Vec<(Vec<TokenId>, u64)> {
    counts.ngrams(counts.order()).collect()
}

#[derive(Debug, Clone)]
pub struct Interpolated {
    counts: Arc<CountTable>,
    events: usize,
    method: Method,
    params: InterpParams,
    // per order k at index k-1
    buckets: Vec<BucketMap>,
    lambdas: Vec<Vec<f64>>,
    trace: BaumWelchResult,
}

fn key_of(kind: BucketKey, node: Option<&HistoryNode>) -> f64 {
    node.map_or(0.0, |n| kind.value(n.total, n.distinct as u64))
}

impl Interpolated {
    pub fn train(
        counts: Arc<CountTable>,
        events: usize,
        method: Method,
        params: InterpParams,
        training: LambdaTraining<'_>,
        exec: Execution,
    ) -> Result<Self> {
        let n = counts.order();
        let (raw, deleted) = match training {
            LambdaTraining::HeldOut(dev) => (held_out_events(dev, n), false),
            LambdaTraining::Deleted => (deleted_events(&counts), true),
        };
        if raw.is_empty() {
            return Err(LmError::invalid("empty data for training interpolation weights"));
        }
        let buckets = build_buckets(&counts, &raw, params);
        let problem = em_problem(&counts, events, &buckets, &raw, deleted);
        let trace = baum_welch(
            &problem,
            BaumWelchOptions {
                lambda0: params.lambda0,
                delta_stop: params.delta_stop,
                max_iterations: params.max_iterations,
                exec,
            },
        )?;
        Ok(Interpolated {
            counts,
            events,
            method,
            params,
            buckets,
            lambdas: trace.lambdas.clone(),
            trace,
        })
    }

    /// A model with fixed weights.
    pub fn with_lambdas(
        counts: Arc<CountTable>,
        events: usize,
        buckets: Vec<BucketMap>,
        lambdas: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = counts.order();
        if buckets.len() != n || lambdas.len() != n {
            return Err(LmError::invalid("need one bucket map and weight set per order"));
        }
        for (b, l) in buckets.iter().zip(&lambdas) {
            if b.len() != l.len() || l.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(LmError::invalid("weights must be in [0, 1], one per bucket"));
            }
        }
        let key = buckets[0].key();
        Ok(Interpolated {
            counts,
            events,
            method: Method::InterpHeldOut,
            params: InterpParams::new(key, u64::MAX),
            buckets,
            lambdas,
            trace: BaumWelchResult::default(),
        })
    }

    pub fn lambdas(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    pub fn buckets(&self) -> &[BucketMap] {
        &self.buckets
    }

    pub fn trace(&self) -> &BaumWelchResult {
        &self.trace
    }

    pub fn params(&self) -> &InterpParams {
        &self.params
    }

    fn weight(&self, k: usize, node: &HistoryNode) -> f64 {
        let b = self.buckets[k - 1].bucket(key_of(self.params.key, Some(node)));
        self.lambdas[k - 1][b]
    }

    /// Order-`k` interpolated probability.
    pub fn prob_at(&self, k: usize, context: &[TokenId], word: TokenId) -> f64 {
        let mut p = 1.0 / self.events as f64;
        for j in 1..=k {
            if let Some(node) = self.counts.history(history(context, j)) {
                let lam = self.weight(j, node);
                p = lam * node.count(word) as f64 / node.total as f64 + (1.0 - lam) * p;
            }
        }
        p
    }
}

fn build_buckets(counts: &CountTable, raw: &[(Vec<TokenId>, u64)], params: InterpParams) -> Vec<BucketMap> {
    let n = counts.order();
    (1..=n)
        .map(|k| {
            let mut weights: FxHashMap<u64, u64> = FxHashMap::default();
            for (g, w) in raw {
                let h = &g[n - k..n - 1];
                let key = key_of(params.key, counts.history(h));
                *weights.entry(key.to_bits()).or_default() += w;
            }
            BucketMap::build(
                params.key,
                weights.into_iter().map(|(k, w)| (f64::from_bits(k), w)),
                params.c_min,
                params.c_top as f64,
            )
        })
        .collect()
}

fn em_problem(
    counts: &CountTable,
    events: usize,
    buckets: &[BucketMap],
    raw: &[(Vec<TokenId>, u64)],
    deleted: bool,
) -> EmProblem {
    let n = counts.order();
    let em_events = raw
        .iter()
        .map(|(g, weight)| {
            let w = g[n - 1];
            let levels = (1..=n)
                .map(|k| {
                    let node = counts.history(&g[n - k..n - 1])?;
                    let bucket = buckets[k - 1].bucket(key_of(buckets[k - 1].key(), Some(node))) as u32;
                    let (c, total) = (node.count(w), node.total);
                    let ml = if deleted {
                        if total <= 1 {
                            return None;
                        }
                        (c - 1) as f64 / (total - 1) as f64
                    } else {
                        c as f64 / total as f64
                    };
                    Some(EmLevel { bucket, ml })
                })
                .collect();
            EmEvent {
                weight: *weight as f64,
                levels,
            }
        })
        .collect();
    EmProblem {
        uniform: 1.0 / events as f64,
        buckets: buckets.iter().map(BucketMap::len).collect(),
        events: em_events,
    }
}

impl LanguageModel for Interpolated {
    fn method(&self) -> Method {
        self.method
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
                let lam = self.weight(k, node);
                p.iter_mut().for_each(|x| *x *= 1.0 - lam);
                for &(w, c) in &node.words {
                    p[w as usize] += lam * c as f64 / node.total as f64;
                }
            }
        }
        Ok(p)
    }

    fn params(&self) -> Vec<(String, String)> {
        let c_min = if self.params.c_min == u64::MAX {
            "inf".to_string()
        } else {
            self.params.c_min.to_string()
        };
        let mut out = vec![
            ("c_min".into(), c_min),
            ("c_top".into(), self.params.c_top.to_string()),
            ("lambda0".into(), fmt_param(self.params.lambda0)),
            ("delta_stop".into(), fmt_param(self.params.delta_stop)),
        ];
        for (k, l) in self.lambdas.iter().enumerate() {
            out.push((format!("buckets{}", k + 1), l.len().to_string()));
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
                dump.push_bow(h, 1.0 - self.weight(k, node));
            }
        }
        Ok(dump)
    }
}
