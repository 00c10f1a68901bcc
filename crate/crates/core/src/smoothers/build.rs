use std::sync::Arc;

use super::{
    Additive, ChurchGale, ChurchGaleParams, DenominatorSpace, InterpParams, Interpolated, Katz,
    KatzParams, LambdaTraining, LanguageModel, MaximumLikelihood, Method, OneCount, OneCountParams,
};
use crate::corpus::{EncodedSentence, Vocabulary, BOS};
use crate::counts::CountTable;
use crate::error::{LmError, Result};
use crate::exec::Execution;

/// Bucket size used by the bucketed interpolation methods when none is given.
pub const DEFAULT_C_MIN: u64 = 100;

/// Free parameters of every method; `None` means the method's default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelParams {
    pub delta: Option<f64>,
    pub k: Option<usize>,
    /// One value for all orders, or one per order.
    pub beta: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub c_min: Option<u64>,
    pub c_top: Option<u64>,
    pub c_mb: Option<usize>,
    pub p_n1_0: Option<f64>,
    pub p_n1_n: Option<f64>,
    pub denominator: Option<DenominatorSpace>,
}

impl ModelParams {
    fn set(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut mark = |on: bool, name| {
            if on {
                out.push(name)
            }
        };
        mark(self.delta.is_some(), "delta");
        mark(self.k.is_some(), "k");
        mark(self.beta.is_some(), "beta");
        mark(self.gamma.is_some(), "gamma");
        mark(self.c_min.is_some(), "c_min");
        mark(self.c_top.is_some(), "c_top");
        mark(self.c_mb.is_some(), "c_mb");
        mark(self.p_n1_0.is_some(), "p_n1_0");
        mark(self.p_n1_n.is_some(), "p_n1_n");
        mark(self.denominator.is_some(), "denominator");
        out
    }

    /// Names of the parameters `method` understands.
    pub fn accepted(method: Method) -> &'static [&'static str] {
        match method {
            Method::Ml => &[],
            Method::PlusOne => &["denominator"],
            Method::PlusDelta => &["delta", "denominator"],
            Method::Katz => &["delta", "k", "beta"],
            Method::ChurchGale => &["c_min", "c_mb", "p_n1_0", "p_n1_n"],
            Method::InterpHeldOut | Method::InterpDelInt | Method::NewAvgCount => &["c_min", "c_top"],
            Method::InterpBaseline => &[],
            Method::NewOneCount => &["beta", "gamma"],
        }
    }

    /// Reject parameters that `method` does not use.
    pub fn check(&self, method: Method) -> Result<()> {
        let ok = Self::accepted(method);
        let bad: Vec<_> = self.set().into_iter().filter(|p| !ok.contains(p)).collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(LmError::invalid(format!("{method} does not take {}", bad.join(", "))))
        }
    }

    fn per_order(v: &Option<Vec<f64>>, order: usize, default: f64, name: &str) -> Result<Vec<f64>> {
        match v {
            None => Ok(vec![default; order]),
            Some(x) if x.len() == 1 => Ok(vec![x[0]; order]),
            Some(x) if x.len() == order => Ok(x.clone()),
            Some(x) => Err(LmError::invalid(format!(
                "{name} needs 1 or {order} values, got {}",
                x.len()
            ))),
        }
    }
}

/// Everything a model is trained from.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub counts: &'a Arc<CountTable>,
    pub vocab: &'a Vocabulary,
    /// Sentences used to fit interpolation weights, disjoint from the counts.
    pub held_out: Option<&'a [EncodedSentence]>,
    pub exec: Execution,
}

impl TrainingData<'_> {
    /// Number of training sentences, read off the begin-marker history.
    pub fn sentences(&self) -> u64 {
        let h = vec![BOS; self.counts.order().saturating_sub(1)];
        if h.is_empty() {
            return self.counts.count(&[crate::corpus::EOS]);
        }
        self.counts.history(&h).map_or(0, |n| n.total)
    }
}

/// Train a model of `method` with `params`.
pub fn build_model(
    method: Method,
    params: &ModelParams,
    data: &TrainingData<'_>,
) -> Result<Box<dyn LanguageModel>> {
    params.check(method)?;
    let counts = data.counts.clone();
    let events = data.vocab.event_count();
    let order = counts.order();
    let space = params.denominator.unwrap_or_default();
    let content = data.vocab.content_len();
    Ok(match method {
        Method::Ml => Box::new(MaximumLikelihood::new(counts, events)),
        Method::PlusOne => Box::new(Additive::new(counts, events, content, 1.0, space)?),
        Method::PlusDelta => {
            let delta = params
                .delta
                .ok_or_else(|| LmError::invalid("plus-delta needs delta (set it or tune it)"))?;
            Box::new(Additive::new(counts, events, content, delta, space)?)
        }
        Method::Katz => {
            let beta = match &params.beta {
                None => 1.0,
                Some(b) if b.len() == 1 => b[0],
                Some(_) => return Err(LmError::invalid("katz takes a single beta")),
            };
            let kp = KatzParams {
                k: params.k,
                delta: params
                    .delta
                    .unwrap_or_else(|| KatzParams::preset_delta(data.sentences())),
                beta,
            };
            Box::new(Katz::new(counts, events, kp, data.exec)?)
        }
        Method::ChurchGale => {
            let d = ChurchGaleParams::default();
            let cp = ChurchGaleParams {
                c_mb: params.c_mb.or(d.c_mb),
                c_min: params.c_min.unwrap_or(d.c_min),
                p_n1_0: params.p_n1_0.unwrap_or(d.p_n1_0),
                p_n1_n: params.p_n1_n.unwrap_or(d.p_n1_n),
            };
            Box::new(ChurchGale::new(counts, events, cp)?)
        }
        Method::NewOneCount => {
            let op = OneCountParams {
                beta: ModelParams::per_order(&params.beta, order, 1.0, "beta")?,
                gamma: ModelParams::per_order(&params.gamma, order, 1.0, "gamma")?,
            };
            Box::new(OneCount::new(counts, events, op)?)
        }
        Method::InterpHeldOut | Method::InterpDelInt | Method::NewAvgCount | Method::InterpBaseline => {
            let mut ip = InterpParams::for_method(method, params.c_min.unwrap_or(DEFAULT_C_MIN))?;
            if let Some(t) = params.c_top {
                ip.c_top = t;
            }
            let training = if method == Method::InterpDelInt {
                LambdaTraining::Deleted
            } else {
                LambdaTraining::HeldOut(data.held_out.ok_or_else(|| {
                    LmError::invalid(format!("{method} needs held-out sentences for its weights"))
                })?)
            };
            Box::new(Interpolated::train(counts, events, method, ip, training, data.exec)?)
        }
    })
}
