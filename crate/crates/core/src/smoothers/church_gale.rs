//! Church-Gale smoothing: n-grams are bucketed by the product of their
//! history's and word's estimated frequencies, and each bucket gets its own
//! Good-Turing estimate.
//!
//! Possible n-grams are never enumerated. Histories and words are grouped
//! into classes sharing one key (a unigram class is all words with the same
//! count; an order-k class is all k-grams in the same bucket with the same
//! count), so bucket populations are sums of class-size products.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::bucket::{BucketKey, BucketMap};
use super::{fmt_param, history, LanguageModel, Method, ModelDump};
use crate::corpus::{TokenId, BOS, EOS};
use crate::counts::{CountOfCounts, CountTable};
use crate::error::{LmError, Result};
use crate::goodturing::GoodTuring;

/// Minibucket density of the classic configuration.
pub const MINIBUCKETS_PER_DECADE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurchGaleParams {
    /// Number of minibuckets per order; `None` spaces them three per decade.
    pub c_mb: Option<usize>,
    /// Minimum nonzero n-grams per bucket; `u64::MAX` gives one bucket.
    pub c_min: u64,
    pub p_n1_0: f64,
    pub p_n1_n: f64,
}

impl Default for ChurchGaleParams {
    fn default() -> Self {
        ChurchGaleParams {
            c_mb: None,
            c_min: 500,
            p_n1_0: 0.01,
            p_n1_n: 0.995,
        }
    }
}

/// Corrected counts for one distribution (a bucket, or the unigrams).
#[derive(Debug, Clone, Default)]
struct ClassEstimate {
    p0: f64,
    zero: f64,
    seen: FxHashMap<u64, f64>,
}

impl ClassEstimate {
    fn new(coc: &CountOfCounts, n0: u64, params: &ChurchGaleParams) -> Self {
        let total = coc.total() as f64;
        let n1 = coc.get(1);
        let p0 = if n0 == 0 || coc.total() == 0 {
            0.0
        } else if n1 == 0 {
            params.p_n1_0
        } else if n1 == coc.total() {
            params.p_n1_n
        } else {
            n1 as f64 / total
        };
        let adjusted: Vec<(u64, u64, f64)> = match GoodTuring::fit(coc) {
            Ok(gt) => coc.iter().map(|(r, n)| (r, n, gt.adjusted(r))).collect(),
            Err(_) => coc.iter().map(|(r, n)| (r, n, r as f64)).collect(),
        };
        let norm: f64 = adjusted.iter().map(|&(_, n, rs)| n as f64 * rs).sum();
        let seen = adjusted
            .into_iter()
            .map(|(r, _, rs)| (r, total * (1.0 - p0) * rs / norm))
            .collect();
        let zero = if n0 > 0 { total * p0 / n0 as f64 } else { 0.0 };
        ClassEstimate { p0, zero, seen }
    }

    fn corrected(&self, r: u64) -> f64 {
        if r == 0 {
            self.zero
        } else {
            self.seen[&r]
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct WordClass {
    key: f64,
    count: u64,
    has_eos: bool,
}

#[derive(Debug, Clone)]
struct Level {
    lo: f64,
    span: f64,
    c_mb: usize,
    walls: BucketMap,
    buckets: Vec<ClassEstimate>,
    populations: Vec<u64>,
    class_norm: FxHashMap<u64, f64>,
    // aligned with CountTable::histories(k - 1)
    history_norm: Vec<f64>,
}

impl Level {
    fn minibucket(&self, x: f64) -> usize {
        if self.span <= 0.0 || x <= self.lo {
            return 0;
        }
        let i = ((x.ln() - self.lo.ln()) / self.span * self.c_mb as f64).floor() as usize;
        i.min(self.c_mb - 1)
    }

    fn bucket(&self, x: f64) -> usize {
        self.walls.bucket(self.minibucket(x) as f64)
    }
}

#[derive(Debug, Clone)]
pub struct ChurchGale {
    counts: Arc<CountTable>,
    events: usize,
    params: ChurchGaleParams,
    sentences: f64,
    unigram: ClassEstimate,
    unigram_total: f64,
    words: Vec<WordClass>,
    // index k-2 for order k
    levels: Vec<Level>,
}

impl ChurchGale {
    pub fn new(counts: Arc<CountTable>, events: usize, params: ChurchGaleParams) -> Result<Self> {
        for (name, p) in [("p_n1_0", params.p_n1_0), ("p_n1_n", params.p_n1_n)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(LmError::invalid(format!("{name} must lie in (0, 1), got {p}")));
            }
        }
        if params.c_min == 0 || params.c_mb == Some(0) {
            return Err(LmError::invalid("c_min and c_mb must be at least 1"));
        }
        if counts.is_empty() {
            return Err(LmError::invalid("church-gale needs training counts"));
        }

        let word_counts: Vec<u64> = (1..=events as TokenId).map(|w| counts.count(&[w])).collect();
        let unseen = word_counts.iter().filter(|&&c| c == 0).count() as u64;
        let coc = CountOfCounts::from_counts(word_counts.iter().copied());
        let unigram = ClassEstimate::new(&coc, unseen, &params);
        let mut by_count: std::collections::BTreeMap<u64, (u64, bool)> = Default::default();
        for (i, &c) in word_counts.iter().enumerate() {
            let e = by_count.entry(c).or_default();
            e.0 += 1;
            e.1 |= i as TokenId + 1 == EOS;
        }
        let words = by_count
            .into_iter()
            .map(|(r, (count, has_eos))| WordClass {
                key: unigram.corrected(r),
                count,
                has_eos,
            })
            .collect();
        let sentences = if counts.order() >= 2 {
            counts.history(&[BOS]).map_or(0, |n| n.total) as f64
        } else {
            0.0
        };

        let mut model = ChurchGale {
            unigram_total: counts.tokens() as f64,
            counts,
            events,
            params,
            sentences,
            unigram,
            words,
            levels: Vec::new(),
        };
        let mut history_classes: Vec<(f64, u64)> = model
            .words
            .iter()
            .map(|w| (w.key, w.count - w.has_eos as u64))
            .collect();
        for k in 2..=model.counts.order() {
            history_classes.push((model.sentences, 1));
            history_classes.retain(|&(key, c)| c > 0 && key > 0.0);
            let (level, next) = model.build_level(k, &history_classes);
            model.levels.push(level);
            history_classes = next;
        }
        Ok(model)
    }

    fn word_key(&self, w: TokenId) -> f64 {
        self.unigram.corrected(self.counts.count(&[w]))
    }

    /// Key of a k-gram used as a history: its corrected count.
    fn gram_key(&self, g: &[TokenId]) -> f64 {
        if g.iter().all(|&t| t == BOS) {
            return self.sentences;
        }
        if g.len() == 1 {
            return self.word_key(g[0]);
        }
        let level = &self.levels[g.len() - 2];
        let (h, w) = g.split_at(g.len() - 1);
        let b = level.bucket(self.gram_key(h) * self.word_key(w[0]));
        level.buckets[b].corrected(self.counts.count(g))
    }

    fn build_level(&self, k: usize, history_classes: &[(f64, u64)]) -> (Level, Vec<(f64, u64)>) {
        let hmin = history_classes.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hmax = history_classes.iter().map(|c| c.0).fold(0.0, f64::max);
        let live = self.words.iter().filter(|w| w.count > 0 && w.key > 0.0);
        let wmin = live.clone().map(|w| w.key).fold(f64::INFINITY, f64::min);
        let wmax = live.map(|w| w.key).fold(0.0, f64::max);
        let (lo, hi) = (hmin * wmin, hmax * wmax);
        let span = if hi > lo { hi.ln() - lo.ln() } else { 0.0 };
        let c_mb = self
            .params
            .c_mb
            .unwrap_or_else(|| ((MINIBUCKETS_PER_DECADE * span / std::f64::consts::LN_10).ceil() as usize).max(1));
        let mut level = Level {
            lo,
            span,
            c_mb,
            walls: BucketMap::single(BucketKey::CgProduct),
            buckets: Vec::new(),
            populations: Vec::new(),
            class_norm: FxHashMap::default(),
            history_norm: Vec::new(),
        };

        // minibucket of every seen k-gram
        let mut seen_mb: Vec<Vec<usize>> = Vec::with_capacity(self.counts.history_count(k - 1));
        let mut mb_weights: FxHashMap<usize, u64> = FxHashMap::default();
        for (h, node) in self.counts.histories(k - 1) {
            let kh = self.gram_key(h);
            let mbs: Vec<usize> = node
                .words
                .iter()
                .map(|&(w, _)| level.minibucket(kh * self.word_key(w)))
                .collect();
            for &mb in &mbs {
                *mb_weights.entry(mb).or_default() += 1;
            }
            seen_mb.push(mbs);
        }
        level.walls = BucketMap::build(
            BucketKey::CgProduct,
            mb_weights.into_iter().map(|(mb, n)| (mb as f64, n)),
            self.params.c_min,
            c_mb as f64,
        );
        let nb = level.walls.len();

        let mut seen: Vec<CountOfCounts> = vec![CountOfCounts::default(); nb];
        let mut seen_no_eos: Vec<FxHashMap<u64, u64>> = vec![FxHashMap::default(); nb];
        for ((_, node), mbs) in self.counts.histories(k - 1).zip(&seen_mb) {
            for (&(w, r), &mb) in node.words.iter().zip(mbs) {
                let b = level.walls.bucket(mb as f64);
                seen[b].add(r, 1);
                if w != EOS {
                    *seen_no_eos[b].entry(r).or_default() += 1;
                }
            }
        }

        let mut pop = vec![0u64; nb];
        let mut pop_no_eos = vec![0u64; nb];
        for &(kh, ch) in history_classes {
            for wc in &self.words {
                let b = level.bucket(kh * wc.key);
                pop[b] += ch * wc.count;
                pop_no_eos[b] += ch * (wc.count - wc.has_eos as u64);
            }
        }

        level.buckets = (0..nb)
            .map(|b| ClassEstimate::new(&seen[b], pop[b] - seen[b].types(), &self.params))
            .collect();
        level.populations = pop;

        for &(kh, _) in history_classes {
            let z = self.class_norm(&level, kh);
            level.class_norm.insert(kh.to_bits(), z);
        }
        level.history_norm = self
            .counts
            .histories(k - 1)
            .zip(&seen_mb)
            .map(|((h, node), mbs)| {
                let kh = self.gram_key(h);
                let mut z = level.class_norm[&kh.to_bits()];
                for (&(_, r), &mb) in node.words.iter().zip(mbs) {
                    let est = &level.buckets[level.walls.bucket(mb as f64)];
                    z += est.corrected(r) - est.zero;
                }
                z
            })
            .collect();

        let mut next = Vec::new();
        for b in 0..nb {
            let seen_total: u64 = seen_no_eos[b].values().sum();
            next.push((level.buckets[b].zero, pop_no_eos[b] - seen_total));
            let mut rs: Vec<_> = seen_no_eos[b].iter().map(|(&r, &c)| (r, c)).collect();
            rs.sort_unstable();
            for (r, c) in rs {
                next.push((level.buckets[b].corrected(r), c));
            }
        }
        (level, next)
    }

    /// Normalizer of a history none of whose continuations were seen.
    fn class_norm(&self, level: &Level, kh: f64) -> f64 {
        self.words
            .iter()
            .map(|wc| wc.count as f64 * level.buckets[level.bucket(kh * wc.key)].zero)
            .sum()
    }

    fn norm(&self, k: usize, h: &[TokenId]) -> f64 {
        let level = &self.levels[k - 2];
        if let Some((i, _)) = self.counts.history_entry(h) {
            return level.history_norm[i];
        }
        let kh = self.gram_key(h);
        match level.class_norm.get(&kh.to_bits()) {
            Some(&z) => z,
            None => self.class_norm(level, kh),
        }
    }

    pub fn prob_at(&self, k: usize, context: &[TokenId], word: TokenId) -> f64 {
        if k == 1 {
            return self.word_key(word) / self.unigram_total;
        }
        let h = history(context, k);
        let level = &self.levels[k - 2];
        let b = level.bucket(self.gram_key(h) * self.word_key(word));
        let r = self.counts.history(h).map_or(0, |n| n.count(word));
        level.buckets[b].corrected(r) / self.norm(k, h)
    }

    /// Bucket index of an n-gram at its own order (`len >= 2`).
    pub fn bucket_of(&self, gram: &[TokenId]) -> usize {
        let (h, w) = gram.split_at(gram.len() - 1);
        self.levels[gram.len() - 2].bucket(self.gram_key(h) * self.word_key(w[0]))
    }

    /// Total possible n-grams per bucket at order `k >= 2`.
    pub fn bucket_populations(&self, k: usize) -> &[u64] {
        &self.levels[k - 2].populations
    }

    /// Zero-count probability mass of each bucket at order `k >= 2`.
    pub fn bucket_zero_mass(&self, k: usize) -> Vec<f64> {
        self.levels[k - 2].buckets.iter().map(|b| b.p0).collect()
    }

    pub fn minibuckets(&self, k: usize) -> usize {
        self.levels[k - 2].c_mb
    }

    pub fn params(&self) -> &ChurchGaleParams {
        &self.params
    }
}

impl LanguageModel for ChurchGale {
    fn method(&self) -> Method {
        Method::ChurchGale
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
        let k = self.order();
        let mut p = vec![0.0; self.events + 1];
        if k == 1 {
            for (w, slot) in p.iter_mut().enumerate().skip(1) {
                *slot = self.prob_at(1, context, w as TokenId);
            }
            return Ok(p);
        }
        let h = history(context, k);
        let level = &self.levels[k - 2];
        let kh = self.gram_key(h);
        let z = self.norm(k, h);
        let node = self.counts.history(h);
        for (w, slot) in p.iter_mut().enumerate().skip(1) {
            let w = w as TokenId;
            let b = level.bucket(kh * self.word_key(w));
            let r = node.map_or(0, |n| n.count(w));
            *slot = level.buckets[b].corrected(r) / z;
        }
        Ok(p)
    }

    fn params(&self) -> Vec<(String, String)> {
        let c_min = if self.params.c_min == u64::MAX {
            "inf".to_string()
        } else {
            self.params.c_min.to_string()
        };
        vec![
            (
                "c_mb".into(),
                self.params.c_mb.map_or("auto".to_string(), |c| c.to_string()),
            ),
            ("c_min".into(), c_min),
            ("p_n1_0".into(), fmt_param(self.params.p_n1_0)),
            ("p_n1_n".into(), fmt_param(self.params.p_n1_n)),
        ]
    }

    fn dump(&self) -> Result<ModelDump> {
        let mut dump = ModelDump::new(self, self.events);
        dump.rebuild_from_counts = true;
        for k in 1..=self.order() {
            for (h, node) in self.counts.histories(k - 1) {
                for &(w, c) in &node.words {
                    dump.push_gram(h, w, self.prob_at(k, h, w), Some(c));
                }
            }
        }
        Ok(dump)
    }
}
