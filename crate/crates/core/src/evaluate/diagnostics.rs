//! Count-by-count analysis of how a model spreads probability over n-grams
//! grouped by their training count `r`.
//!
//! All measures look at top-order test events `(h, w)`. Events whose history
//! never occurs in training (`N(h) = 0`) get no count class; they are tallied
//! separately. The last row of every table aggregates `r >= tail`.

use rustc_hash::FxHashMap;

use crate::corpus::{EncodedSentence, TokenId};
use crate::counts::{CountTable, HistoryNode};
use crate::error::{LmError, Result};
use crate::exec::Execution;
use crate::smoothers::LanguageModel;

/// Default first count of the aggregated tail row.
pub const TAIL_COUNT: u64 = 40;

#[derive(Debug, Clone)]
struct Group {
    context: Vec<TokenId>,
    occurrences: u64,
    /// Test continuations with their test multiplicity, sorted by id.
    words: Vec<(TokenId, u64)>,
    /// Whether the history occurs in training.
    seen: bool,
}

/// Test events grouped by history, joined with the training counts.
#[derive(Debug, Clone)]
pub struct CountStatistics<'a> {
    train: &'a CountTable,
    events: usize,
    tail: u64,
    groups: Vec<Group>,
    rows: Vec<CountRow>,
    pub zero_history_events: u64,
    pub total_events: u64,
}

/// One count class.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub r: u64,
    /// True for the row aggregating `r` and above.
    pub tail: bool,
    /// Test occurrences of n-grams with this training count.
    pub actual: u64,
    /// Test occurrences predicted by the maximum-likelihood model.
    pub ml_expected: f64,
    /// Occurrences predicted per unit of corrected count: `Σ n_r(h) / N(h)`
    /// over test history occurrences.
    pub unit: f64,
    /// Ideal average corrected count `actual / unit`; `None` when no test
    /// history can produce this count.
    pub ideal: Option<f64>,
}

/// A model's view of one count class.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCountRow {
    pub r: u64,
    pub tail: bool,
    /// Test occurrences predicted by the model.
    pub expected: f64,
    /// Model's average corrected count `expected / unit`.
    pub average: Option<f64>,
    /// `expected / actual`, equal to the average over the ideal corrected count.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyFractions {
    /// Share of total test entropy per count row.
    pub by_count: Vec<f64>,
    /// Running sums of `by_count`.
    pub cumulative: Vec<f64>,
    /// Share from events whose history was unseen in training.
    pub zero_history: f64,
    /// Total bits, `-Σ log2 p` over every test event.
    pub total_bits: f64,
}

/// Test behaviour of zero counts for histories with a given `n1` and a band
/// of totals `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCountRow {
    pub n1: u64,
    /// Totals in `[n_lo, n_hi]`.
    pub n_lo: u64,
    pub n_hi: u64,
    pub histories: usize,
    pub occurrences: u64,
    /// Test events whose n-gram had zero training count.
    pub zero_events: u64,
    /// Total corrected count the zero counts should have received.
    pub desired: f64,
    /// Good-Turing's prediction, `n1`.
    pub predicted: f64,
}

fn row_of(r: u64, tail: u64) -> usize {
    r.min(tail) as usize
}

/// Group the test events and tabulate the maximum-likelihood view.
pub fn count_statistics<'a>(
    train: &'a CountTable,
    test: &[EncodedSentence],
    events: usize,
    tail: u64,
) -> Result<CountStatistics<'a>> {
    if tail == 0 {
        return Err(LmError::invalid("tail count must be at least 1"));
    }
    let n = train.order();
    let mut map: FxHashMap<&[TokenId], (u64, FxHashMap<TokenId, u64>)> = FxHashMap::default();
    for s in test {
        if s.order() != n {
            return Err(LmError::invalid(format!(
                "test padded for order {}, counts have order {n}",
                s.order()
            )));
        }
        for (ctx, w) in s.events() {
            let e = map.entry(ctx).or_default();
            e.0 += 1;
            *e.1.entry(w).or_default() += 1;
        }
    }
    let mut groups: Vec<Group> = map
        .into_iter()
        .map(|(ctx, (occ, words))| {
            let mut words: Vec<_> = words.into_iter().collect();
            words.sort_unstable();
            Group {
                context: ctx.to_vec(),
                occurrences: occ,
                words,
                seen: train.history(ctx).is_some(),
            }
        })
        .collect();
    groups.sort_unstable_by(|a, b| a.context.cmp(&b.context));

    let rows_len = tail as usize + 1;
    let mut actual = vec![0u64; rows_len];
    let mut unit = vec![0.0; rows_len];
    let mut ml = vec![0.0; rows_len];
    let mut zero_history_events = 0;
    let mut total_events = 0;
    for g in &groups {
        total_events += g.occurrences;
        let Some(node) = train.history(&g.context) else {
            zero_history_events += g.occurrences;
            continue;
        };
        for &(w, k) in &g.words {
            actual[row_of(node.count(w), tail)] += k;
        }
        let occ = g.occurrences as f64;
        let total = node.total as f64;
        let mut nr = vec![0u64; rows_len];
        let mut mass = vec![0u64; rows_len];
        for &(_, c) in &node.words {
            nr[row_of(c, tail)] += 1;
            mass[row_of(c, tail)] += c;
        }
        nr[0] = (events - node.words.len()) as u64;
        for i in 0..rows_len {
            if nr[i] > 0 {
                unit[i] += occ * nr[i] as f64 / total;
                ml[i] += occ * mass[i] as f64 / total;
            }
        }
    }
    let rows = (0..rows_len)
        .map(|i| CountRow {
            r: i as u64,
            tail: i as u64 == tail,
            actual: actual[i],
            ml_expected: ml[i],
            unit: unit[i],
            ideal: (unit[i] > 0.0).then(|| actual[i] as f64 / unit[i]),
        })
        .collect();
    Ok(CountStatistics {
        train,
        events,
        tail,
        groups,
        rows,
        zero_history_events,
        total_events,
    })
}

impl CountStatistics<'_> {
    pub fn rows(&self) -> &[CountRow] {
        &self.rows
    }

    pub fn tail(&self) -> u64 {
        self.tail
    }

    fn seen_groups(&self) -> impl Iterator<Item = (&Group, &HistoryNode)> {
        self.groups
            .iter()
            .filter(|g| g.seen)
            .map(|g| (g, self.train.history(&g.context).expect("seen history")))
    }

    /// Model probability mass on each count row for one seen history.
    fn model_mass(&self, model: &dyn LanguageModel, g: &Group, node: &HistoryNode) -> Result<Vec<f64>> {
        let mut mass = vec![0.0; self.tail as usize + 1];
        let dist = model.distribution(&g.context)?;
        let mut seen = node.words.iter().peekable();
        for (w, &p) in dist.iter().enumerate().skip(1) {
            match seen.peek() {
                Some(&&(v, c)) if v as usize == w => {
                    mass[row_of(c, self.tail)] += p;
                    seen.next();
                }
                _ => mass[0] += p,
            }
        }
        Ok(mass)
    }

    fn expected(&self, model: &dyn LanguageModel, exec: Execution) -> Result<Vec<f64>> {
        let seen: Vec<_> = self.seen_groups().collect();
        let per = exec.map(&seen, |&(g, node)| {
            self.model_mass(model, g, node)
                .map(|m| m.into_iter().map(|x| x * g.occurrences as f64).collect::<Vec<_>>())
        });
        let mut out = vec![0.0; self.tail as usize + 1];
        for m in per {
            out.iter_mut().zip(m?).for_each(|(a, b)| *a += b);
        }
        Ok(out)
    }
}

/// Ideal average corrected count per training count.
pub fn ideal_corrected_counts(
    train: &CountTable,
    test: &[EncodedSentence],
    events: usize,
    tail: u64,
) -> Result<Vec<CountRow>> {
    Ok(count_statistics(train, test, events, tail)?.rows)
}

/// How many test occurrences the model expects per count class, against the
/// actual number.
pub fn expected_over_actual(
    model: &dyn LanguageModel,
    stats: &CountStatistics<'_>,
    exec: Execution,
) -> Result<Vec<ModelCountRow>> {
    let expected = stats.expected(model, exec)?;
    Ok(stats
        .rows
        .iter()
        .zip(expected)
        .map(|(row, e)| ModelCountRow {
            r: row.r,
            tail: row.tail,
            expected: e,
            average: (row.unit > 0.0).then(|| e / row.unit),
            ratio: (row.actual > 0).then(|| e / row.actual as f64),
        })
        .collect())
}

/// Per-word entropy on the events of each count class after scaling the
/// model's mass on that class so it predicts the actual number of occurrences.
/// Scaling the mass of a class by any constant leaves its score unchanged.
pub fn bang_for_the_buck(
    model: &dyn LanguageModel,
    stats: &CountStatistics<'_>,
    exec: Execution,
) -> Result<Vec<Option<f64>>> {
    let expected = stats.expected(model, exec)?;
    let seen: Vec<_> = stats.seen_groups().collect();
    let tail = stats.tail;
    let per = exec.map(&seen, |&(g, node)| -> Result<Vec<f64>> {
        let mut bits = vec![0.0; tail as usize + 1];
        for &(w, k) in &g.words {
            let p = model.prob(&g.context, w)?;
            bits[row_of(node.count(w), tail)] -= k as f64 * p.log2();
        }
        Ok(bits)
    });
    let mut bits = vec![0.0; tail as usize + 1];
    for b in per {
        bits.iter_mut().zip(b?).for_each(|(a, x)| *a += x);
    }
    Ok(stats
        .rows
        .iter()
        .zip(bits)
        .zip(expected)
        .map(|((row, b), e)| {
            (row.actual > 0 && e > 0.0).then(|| {
                let actual = row.actual as f64;
                b / actual + (e / actual).log2()
            })
        })
        .collect())
}

/// Share of the total test entropy carried by each count class.
pub fn entropy_fraction_by_count(
    model: &dyn LanguageModel,
    stats: &CountStatistics<'_>,
    exec: Execution,
) -> Result<EntropyFractions> {
    let tail = stats.tail;
    let train = stats.train;
    let per = exec.map(&stats.groups, |g| -> Result<(Vec<f64>, f64)> {
        let node = train.history(&g.context);
        let mut bits = vec![0.0; tail as usize + 1];
        let mut zero_hist = 0.0;
        for &(w, k) in &g.words {
            let p = model.prob(&g.context, w)?;
            if !(p > 0.0) {
                let mut ngram = g.context.clone();
                ngram.push(w);
                return Err(LmError::InfiniteEntropy {
                    ngram: crate::smoothers::render_ids(&ngram),
                });
            }
            let b = -(k as f64) * p.log2();
            match node {
                Some(node) => bits[row_of(node.count(w), tail)] += b,
                None => zero_hist += b,
            }
        }
        Ok((bits, zero_hist))
    });
    let mut bits = vec![0.0; tail as usize + 1];
    let mut zero_hist = 0.0;
    for r in per {
        let (b, z) = r?;
        bits.iter_mut().zip(b).for_each(|(a, x)| *a += x);
        zero_hist += z;
    }
    let total = bits.iter().sum::<f64>() + zero_hist;
    if !(total > 0.0) {
        return Err(LmError::invalid("test set carries no entropy"));
    }
    let by_count: Vec<f64> = bits.iter().map(|b| b / total).collect();
    let cumulative = by_count
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    Ok(EntropyFractions {
        by_count,
        cumulative,
        zero_history: zero_hist / total,
        total_bits: total,
    })
}

/// Desired total corrected count for zero counts, grouped by the history's
/// number of singletons `n1 <= max_n1` and by its total `N` in bands
/// `[2^j, 2^(j+1))`. Empty groups are omitted.
pub fn gt_zero_count_study(
    stats: &CountStatistics<'_>,
    max_n1: u64,
) -> Vec<ZeroCountRow> {
    #[derive(Default)]
    struct Acc {
        histories: usize,
        occurrences: u64,
        zero_events: u64,
        inverse_total: f64,
    }
    let mut bands: std::collections::BTreeMap<(u64, u32), Acc> = Default::default();
    for (g, node) in stats.seen_groups() {
        let n1 = node.ones as u64;
        if n1 > max_n1 || node.words.len() >= stats.events {
            continue;
        }
        let band = node.total.ilog2();
        let acc = bands.entry((n1, band)).or_default();
        acc.histories += 1;
        acc.occurrences += g.occurrences;
        acc.inverse_total += g.occurrences as f64 / node.total as f64;
        acc.zero_events += g
            .words
            .iter()
            .filter(|&&(w, _)| node.count(w) == 0)
            .map(|&(_, k)| k)
            .sum::<u64>();
    }
    bands
        .into_iter()
        .map(|((n1, band), a)| ZeroCountRow {
            n1,
            n_lo: 1 << band,
            n_hi: (1u64 << (band + 1)) - 1,
            histories: a.histories,
            occurrences: a.occurrences,
            zero_events: a.zero_events,
            desired: a.zero_events as f64 / a.inverse_total,
            predicted: n1 as f64,
        })
        .collect()
}
