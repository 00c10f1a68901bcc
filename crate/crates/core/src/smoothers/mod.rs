//! Conditional n-gram models behind one query interface.

use std::fmt;
use std::str::FromStr;

use crate::corpus::TokenId;
use crate::error::{LmError, Result};

mod additive;
pub mod bucket;
mod build;
mod church_gale;
pub mod export;
mod interp;
mod katz;
mod ml;
mod one_count;

pub use additive::{Additive, DenominatorSpace};
pub use bucket::{BucketKey, BucketMap};
pub use build::{build_model, ModelParams, TrainingData, DEFAULT_C_MIN};
pub use church_gale::{ChurchGale, ChurchGaleParams, MINIBUCKETS_PER_DECADE};
pub use export::{BackoffModel, ModelDump};
pub use interp::{
    deleted_events, held_out_events, InterpParams, Interpolated, LambdaTraining, C_TOP, DELTA_STOP,
    LAMBDA_0,
};
pub use katz::{katz_discounts, Katz, KatzDiscounts, KatzParams};
pub use ml::MaximumLikelihood;
pub use one_count::{OneCount, OneCountParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ml,
    PlusOne,
    PlusDelta,
    Katz,
    ChurchGale,
    InterpHeldOut,
    InterpDelInt,
    NewAvgCount,
    NewOneCount,
    InterpBaseline,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Ml,
        Method::PlusOne,
        Method::PlusDelta,
        Method::Katz,
        Method::ChurchGale,
        Method::InterpHeldOut,
        Method::InterpDelInt,
        Method::NewAvgCount,
        Method::NewOneCount,
        Method::InterpBaseline,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Ml => "ml",
            Method::PlusOne => "plus-one",
            Method::PlusDelta => "plus-delta",
            Method::Katz => "katz",
            Method::ChurchGale => "church-gale",
            Method::InterpHeldOut => "interp-held-out",
            Method::InterpDelInt => "interp-del-int",
            Method::NewAvgCount => "new-avg-count",
            Method::NewOneCount => "new-one-count",
            Method::InterpBaseline => "interp-baseline",
        }
    }

    /// Methods whose weights are fit by Baum-Welch.
    pub fn is_interpolated(self) -> bool {
        matches!(
            self,
            Method::InterpHeldOut | Method::InterpDelInt | Method::NewAvgCount | Method::InterpBaseline
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = LmError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| LmError::invalid(format!("unknown method '{s}'")))
    }
}

/// An immutable conditional distribution `p(w | h)` over every id except the
/// begin marker.
pub trait LanguageModel: Send + Sync {
    fn method(&self) -> Method;

    fn order(&self) -> usize;

    /// Size of the predicted-event space.
    fn event_count(&self) -> usize;

    /// `p(word | context)`; only the last `order - 1` ids of `context` are used.
    fn prob(&self, context: &[TokenId], word: TokenId) -> Result<f64>;

    fn log2_prob(&self, context: &[TokenId], word: TokenId) -> Result<f64> {
        self.prob(context, word).map(f64::log2)
    }

    /// The whole distribution for one context, indexed by id (index 0, the
    /// begin marker, is always zero).
    fn distribution(&self, context: &[TokenId]) -> Result<Vec<f64>> {
        let mut p = vec![0.0; self.event_count() + 1];
        for (w, slot) in p.iter_mut().enumerate().skip(1) {
            *slot = self.prob(context, w as TokenId)?;
        }
        Ok(p)
    }

    /// Parameters recorded in exported model files.
    fn params(&self) -> Vec<(String, String)>;

    /// Explicit probabilities and backoff weights for export.
    fn dump(&self) -> Result<ModelDump>;
}

/// The last `k - 1` ids of `context`: the history used at order `k`.
pub(crate) fn history(context: &[TokenId], k: usize) -> &[TokenId] {
    let len = k - 1;
    assert!(
        context.len() >= len,
        "context of length {} too short for order {k}",
        context.len()
    );
    &context[context.len() - len..]
}

pub(crate) fn render_ids(ids: &[TokenId]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn fmt_param(x: f64) -> String {
    format!("{x:?}")
}
