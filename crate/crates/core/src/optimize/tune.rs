//! Per-method parameter search. Every candidate is trained on the training
//! counts, with interpolation weights refit on the second development set,
//! and scored by cross-entropy on the first.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::powell::{powell_minimize, PowellOptions};
use crate::corpus::{EncodedSentence, Vocabulary};
use crate::counts::CountTable;
use crate::error::{LmError, Result};
use crate::evaluate::{cross_entropy, EvalOptions};
use crate::exec::Execution;
use crate::smoothers::{build_model, KatzParams, LanguageModel, Method, ModelParams, TrainingData};

#[derive(Debug, Clone, Copy)]
pub struct TuneData<'a> {
    pub counts: &'a Arc<CountTable>,
    pub vocab: &'a Vocabulary,
    /// Scores candidates.
    pub dev1: &'a [EncodedSentence],
    /// Fits interpolation weights inside each candidate.
    pub dev2: &'a [EncodedSentence],
    pub exec: Execution,
}

impl<'a> TuneData<'a> {
    pub fn training(&self) -> TrainingData<'a> {
        TrainingData {
            counts: self.counts,
            vocab: self.vocab,
            held_out: Some(self.dev2),
            exec: self.exec,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    pub powell: PowellOptions,
    /// Extra starting points for the Church-Gale `p_n1_n` search.
    pub multi_start: bool,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            powell: PowellOptions::default(),
            multi_start: false,
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub params: Vec<(String, String)>,
    /// Bits per word on the first development set; infinite when the
    /// candidate could not be built or scored.
    pub entropy: f64,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub method: Method,
    pub params: ModelParams,
    pub entropy: f64,
    pub audit: Vec<AuditEntry>,
}

struct Search<'a> {
    method: Method,
    data: TuneData<'a>,
    audit: Vec<AuditEntry>,
}

fn describe(p: &ModelParams) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let f = |x: f64| format!("{x:?}");
    if let Some(x) = p.delta {
        out.push(("delta".into(), f(x)));
    }
    if let Some(x) = p.k {
        out.push(("k".into(), x.to_string()));
    }
    for (name, v) in [("beta", &p.beta), ("gamma", &p.gamma)] {
        if let Some(v) = v {
            for (i, x) in v.iter().enumerate() {
                out.push((format!("{name}{}", i + 1), f(*x)));
            }
        }
    }
    if let Some(x) = p.c_min {
        out.push(("c_min".into(), x.to_string()));
    }
    if let Some(x) = p.c_top {
        out.push(("c_top".into(), x.to_string()));
    }
    if let Some(x) = p.c_mb {
        out.push(("c_mb".into(), x.to_string()));
    }
    if let Some(x) = p.p_n1_0 {
        out.push(("p_n1_0".into(), f(x)));
    }
    if let Some(x) = p.p_n1_n {
        out.push(("p_n1_n".into(), f(x)));
    }
    out
}

impl Search<'_> {
    fn score(&self, params: &ModelParams) -> Result<f64> {
        let model: Box<dyn LanguageModel> = build_model(self.method, params, &self.data.training())?;
        let opts = EvalOptions {
            exec: self.data.exec,
            ..EvalOptions::default()
        };
        cross_entropy(model.as_ref(), self.data.dev1, opts)
    }

    /// Score and record; failures other than I/O count as infinite entropy.
    fn eval(&mut self, params: &ModelParams) -> Result<f64> {
        let h = match self.score(params) {
            Ok(h) => h,
            Err(LmError::Io(e)) => return Err(LmError::Io(e)),
            Err(_) => f64::INFINITY,
        };
        self.audit.push(AuditEntry {
            params: describe(params),
            entropy: h,
        });
        Ok(h)
    }

    /// Minimize over an integer parameter: a doubling grid on `[lo, hi]`,
    /// then geometric bisection around the best grid point.
    fn integer<F>(&mut self, lo: u64, hi: u64, mut with: F) -> Result<(u64, f64)>
    where
        F: FnMut(u64) -> ModelParams,
    {
        let mut seen: BTreeMap<u64, f64> = BTreeMap::new();
        let mut grid = Vec::new();
        let mut v = lo.max(1);
        while v < hi {
            grid.push(v);
            v = v.saturating_mul(2);
        }
        grid.push(hi.max(lo));
        for &g in &grid {
            let h = self.eval(&with(g))?;
            seen.insert(g, h);
        }
        loop {
            let (&best, &fb) = seen
                .iter()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty grid");
            let left = seen.range(..best).next_back().map(|(&k, _)| k);
            let right = seen.range(best + 1..).next().map(|(&k, _)| k);
            let mut probes = Vec::new();
            for (a, b) in [(left, Some(best)), (Some(best), right)] {
                if let (Some(a), Some(b)) = (a, b) {
                    if b - a > 1 {
                        let mid = ((a as f64 * b as f64).sqrt().round() as u64).clamp(a + 1, b - 1);
                        probes.push(mid);
                    }
                }
            }
            if probes.is_empty() {
                return Ok((best, fb));
            }
            for p in probes {
                let h = self.eval(&with(p))?;
                seen.insert(p, h);
            }
        }
    }

    /// Minimize over continuous coordinates with Powell's method.
    fn continuous<F>(
        &mut self,
        start: &[f64],
        bounds: &[(f64, f64)],
        opts: PowellOptions,
        mut with: F,
    ) -> Result<(Vec<f64>, f64)>
    where
        F: FnMut(&[f64]) -> ModelParams,
    {
        let r = powell_minimize(|x| self.eval(&with(x)), start, bounds, opts)?;
        Ok((r.x, r.value))
    }
}

/// Search the parameters that matter for `method`. Anything set in `fixed`
/// is held at that value and not searched.
pub fn tune_parameters(
    method: Method,
    data: TuneData<'_>,
    fixed: &ModelParams,
    opts: &TuneOptions,
) -> Result<TuneResult> {
    if data.dev1.is_empty() || data.dev2.is_empty() {
        return Err(LmError::invalid("tuning needs two non-empty development sets"));
    }
    fixed.check(method)?;
    let mut s = Search {
        method,
        data,
        audit: Vec::new(),
    };
    let tokens = data.counts.tokens().max(1);
    let mut params = fixed.clone();
    match method {
        Method::Ml | Method::PlusOne | Method::InterpBaseline => {}
        Method::PlusDelta if fixed.delta.is_none() => {
            let (x, _) = s.continuous(&[0.0], &[(-6.0, 1.0)], opts.powell, |x| ModelParams {
                delta: Some(10f64.powf(x[0])),
                ..fixed.clone()
            })?;
            params.delta = Some(10f64.powf(x[0]));
        }
        Method::Katz if fixed.delta.is_none() => {
            let preset = KatzParams::preset_delta(data.training().sentences());
            let start = preset.log10().clamp(-4.0, 2.0);
            let (x, _) = s.continuous(&[start], &[(-4.0, 2.0)], opts.powell, |x| ModelParams {
                delta: Some(10f64.powf(x[0])),
                ..fixed.clone()
            })?;
            params.delta = Some(10f64.powf(x[0]));
        }
        Method::NewOneCount => {
            let n = data.counts.order();
            let free_beta = fixed.beta.is_none();
            let free_gamma = fixed.gamma.is_none();
            let dims = n * (free_beta as usize + free_gamma as usize);
            if dims > 0 {
                let unpack = |x: &[f64]| {
                    let mut it = x.iter().map(|v| 10f64.powf(*v));
                    let beta = if free_beta {
                        Some(it.by_ref().take(n).collect())
                    } else {
                        fixed.beta.clone()
                    };
                    let gamma = if free_gamma {
                        Some(it.take(n).collect())
                    } else {
                        fixed.gamma.clone()
                    };
                    ModelParams {
                        beta,
                        gamma,
                        ..fixed.clone()
                    }
                };
                let (x, _) = s.continuous(&vec![0.0; dims], &vec![(-3.0, 3.0); dims], opts.powell, unpack)?;
                params = unpack(&x);
            }
        }
        Method::InterpHeldOut | Method::InterpDelInt | Method::NewAvgCount if fixed.c_min.is_none() => {
            let (c, _) = s.integer(1, tokens, |c| ModelParams {
                c_min: Some(c),
                ..fixed.clone()
            })?;
            params.c_min = Some(c);
        }
        Method::ChurchGale => {
            if fixed.c_min.is_none() {
                let (c, _) = s.integer(1, tokens, |c| ModelParams {
                    c_min: Some(c),
                    ..params.clone()
                })?;
                params.c_min = Some(c);
            }
            if fixed.c_mb.is_none() {
                let auto = s.eval(&params)?;
                let (mb, h) = s.integer(2, 4096, |m| ModelParams {
                    c_mb: Some(m as usize),
                    ..params.clone()
                })?;
                if h < auto {
                    params.c_mb = Some(mb as usize);
                }
            }
            if fixed.p_n1_0.is_none() {
                params.p_n1_0 = Some(0.01);
            }
            if fixed.p_n1_n.is_none() {
                let starts: &[f64] = if opts.multi_start { &[0.995, 0.9, 0.6] } else { &[0.995] };
                let mut best = (f64::INFINITY, 0.995);
                for &x0 in starts {
                    let base = params.clone();
                    let (x, h) = s.continuous(&[x0], &[(0.01, 0.99999)], opts.powell, |x| ModelParams {
                        p_n1_n: Some(x[0]),
                        ..base.clone()
                    })?;
                    if h < best.0 {
                        best = (h, x[0]);
                    }
                }
                params.p_n1_n = Some(best.1);
            }
        }
        _ => {}
    }
    let entropy = match s.score(&params) {
        Ok(h) => h,
        Err(LmError::InfiniteEntropy { .. }) | Err(LmError::UndefinedDistribution { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(TuneResult {
        method,
        params,
        entropy,
        audit: s.audit,
    })
}
