//! N-gram language models under a family of smoothing methods, with
//! parameter tuning on held-out data and count-by-count diagnostics.
//!
//! The usual flow is: read sentences ([`corpus`]), count n-grams
//! ([`counts`]), build a model ([`smoothers`]), tune its parameters
//! ([`optimize`]) and score test text ([`evaluate`]).

pub mod corpus;
pub mod counts;
pub mod error;
pub mod evaluate;
pub mod exec;
pub mod goodturing;
pub mod optimize;
pub mod smoothers;

pub use corpus::{TokenId, Vocabulary, BOS, EOS, UNK};
pub use counts::{CountOfCounts, CountTable};
pub use error::{LmError, Result};
pub use exec::Execution;
pub use smoothers::{LanguageModel, Method};
