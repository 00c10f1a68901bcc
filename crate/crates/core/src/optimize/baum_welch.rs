//! Expectation-maximization for the bucketed weights of a recursive linear
//! interpolation `p_k = λ p_ML + (1-λ) p_{k-1}`, floored at a uniform `p_0`.

use crate::error::{LmError, Result};
use crate::exec::Execution;

/// Weights are kept strictly below one so the lower orders always keep some mass.
const MAX_LAMBDA: f64 = 1.0 - 1e-12;

/// One order's component for an event: its bucket and the ML estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmLevel {
    pub bucket: u32,
    pub ml: f64,
}

/// A distinct training event with its multiplicity. `levels[k-1]` is the
/// order-`k` component, `None` when that history has no counts.
#[derive(Debug, Clone, PartialEq)]
pub struct EmEvent {
    pub weight: f64,
    pub levels: Vec<Option<EmLevel>>,
}

#[derive(Debug, Clone)]
pub struct EmProblem {
    pub uniform: f64,
    /// Number of buckets per order.
    pub buckets: Vec<usize>,
    pub events: Vec<EmEvent>,
}

#[derive(Debug, Clone, Copy)]
pub struct BaumWelchOptions {
    pub lambda0: f64,
    pub delta_stop: f64,
    pub max_iterations: usize,
    pub exec: Execution,
}

impl Default for BaumWelchOptions {
    fn default() -> Self {
        BaumWelchOptions {
            lambda0: 0.5,
            delta_stop: 0.001,
            max_iterations: 200,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaumWelchResult {
    pub lambdas: Vec<Vec<f64>>,
    /// Per-word entropy (bits) of the training events before each update,
    /// plus the entropy under the returned weights.
    pub entropies: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `(order, bucket)` pairs that saw no events and kept `λ₀`.
    pub untrained: Vec<(usize, usize)>,
}

struct Stats {
    bits: f64,
    num: Vec<Vec<f64>>,
    den: Vec<Vec<f64>>,
}

impl Stats {
    fn zeros(buckets: &[usize]) -> Self {
        Stats {
            bits: 0.0,
            num: buckets.iter().map(|&b| vec![0.0; b]).collect(),
            den: buckets.iter().map(|&b| vec![0.0; b]).collect(),
        }
    }

    fn absorb(&mut self, other: Stats) {
        self.bits += other.bits;
        for (a, b) in self.num.iter_mut().zip(other.num) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.den.iter_mut().zip(other.den) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Probability of one event under `lambdas`, with every order's value.
fn chain(event: &EmEvent, uniform: f64, lambdas: &[Vec<f64>], p: &mut Vec<f64>) {
    p.clear();
    p.push(uniform);
    for (k, level) in event.levels.iter().enumerate() {
        let lower = p[k];
        p.push(match level {
            Some(l) => {
                let lam = lambdas[k][l.bucket as usize];
                lam * l.ml + (1.0 - lam) * lower
            }
            None => lower,
        });
    }
}

fn e_step(problem: &EmProblem, lambdas: &[Vec<f64>], exec: Execution) -> Stats {
    let chunk = exec.shard_size(problem.events.len());
    let parts = exec.map_chunks(&problem.events, chunk, |events| {
        let mut stats = Stats::zeros(&problem.buckets);
        let mut p = Vec::new();
        for ev in events {
            chain(ev, problem.uniform, lambdas, &mut p);
            let top = p[p.len() - 1];
            stats.bits -= ev.weight * top.log2();
            let mut reach = ev.weight;
            for k in (0..ev.levels.len()).rev() {
                if let Some(l) = ev.levels[k] {
                    let b = l.bucket as usize;
                    let lam = lambdas[k][b];
                    stats.num[k][b] += reach * lam * l.ml / p[k + 1];
                    stats.den[k][b] += reach;
                    reach *= (1.0 - lam) * p[k] / p[k + 1];
                }
            }
        }
        stats
    });
    let mut total = Stats::zeros(&problem.buckets);
    for part in parts {
        total.absorb(part);
    }
    total
}

impl EmProblem {
    pub fn total_weight(&self) -> f64 {
        self.events.iter().map(|e| e.weight).sum()
    }

    /// Per-word entropy of the events under `lambdas`.
    pub fn entropy(&self, lambdas: &[Vec<f64>]) -> f64 {
        let mut p = Vec::new();
        let bits: f64 = self
            .events
            .iter()
            .map(|ev| {
                chain(ev, self.uniform, lambdas, &mut p);
                -ev.weight * p[p.len() - 1].log2()
            })
            .sum();
        bits / self.total_weight()
    }
}

pub fn baum_welch(problem: &EmProblem, opts: BaumWelchOptions) -> Result<BaumWelchResult> {
    if problem.events.is_empty() || problem.total_weight() <= 0.0 {
        return Err(LmError::invalid("no events to train interpolation weights on"));
    }
    if !(opts.lambda0 > 0.0 && opts.lambda0 < 1.0) {
        return Err(LmError::invalid("lambda0 must lie in (0, 1)"));
    }
    let total = problem.total_weight();
    let mut lambdas: Vec<Vec<f64>> = problem
        .buckets
        .iter()
        .map(|&b| vec![opts.lambda0; b])
        .collect();
    let mut result = BaumWelchResult::default();
    let mut prev: Option<f64> = None;

    for _ in 0..opts.max_iterations {
        let stats = e_step(problem, &lambdas, opts.exec);
        let h = stats.bits / total;
        result.entropies.push(h);
        if let Some(p) = prev {
            if p - h < opts.delta_stop {
                result.converged = true;
                break;
            }
        }
        prev = Some(h);
        result.untrained.clear();
        for (k, (num, den)) in stats.num.iter().zip(&stats.den).enumerate() {
            for b in 0..num.len() {
                if den[b] > 0.0 {
                    lambdas[k][b] = (num[b] / den[b]).clamp(0.0, MAX_LAMBDA);
                } else {
                    result.untrained.push((k + 1, b));
                }
            }
        }
        result.iterations += 1;
    }
    if !result.converged {
        result.entropies.push(problem.entropy(&lambdas));
    }
    result.lambdas = lambdas;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn one_level(events: &[(f64, f64)], uniform: f64) -> EmProblem {
        EmProblem {
            uniform,
            buckets: vec![1],
            events: events
                .iter()
                .map(|&(w, ml)| EmEvent {
                    weight: w,
                    levels: vec![Some(EmLevel { bucket: 0, ml })],
                })
                .collect(),
        }
    }

    #[test]
    fn all_unseen_drives_lambda_to_zero() {
        let p = one_level(&[(3.0, 0.0), (2.0, 0.0)], 0.1);
        let r = baum_welch(&p, BaumWelchOptions::default()).unwrap();
        assert_eq!(r.lambdas[0][0], 0.0);
    }

    #[test]
    fn dominant_ml_pushes_lambda_up() {
        let p = one_level(&[(5.0, 0.9), (5.0, 0.8)], 0.001);
        let opts = BaumWelchOptions {
            delta_stop: 1e-9,
            ..Default::default()
        };
        let r = baum_welch(&p, opts).unwrap();
        assert!(r.lambdas[0][0] > 0.99);
        for w in r.entropies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn single_update_matches_hand_arithmetic() {
        // two events, ml 0.5 and 0, uniform 0.25, λ0 = 0.5
        let p = one_level(&[(1.0, 0.5), (1.0, 0.0)], 0.25);
        let opts = BaumWelchOptions {
            max_iterations: 1,
            ..Default::default()
        };
        let r = baum_welch(&p, opts).unwrap();
        // posterior for event 1: 0.25 / (0.25 + 0.125) = 2/3; event 2: 0
        assert_relative_eq!(r.lambdas[0][0], (2.0 / 3.0) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn empty_problem_is_rejected() {
        let p = one_level(&[], 0.5);
        assert!(baum_welch(&p, BaumWelchOptions::default()).is_err());
    }
}
