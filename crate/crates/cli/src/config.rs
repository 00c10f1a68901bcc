//! Experiment configuration files (TOML).
//!
//! ```toml
//! corpus = "data/sample.txt"
//! lowercase = true
//! order = 3
//! method = "katz"
//! output_dir = "runs/katz"
//!
//! [vocab]
//! min_count = 1
//!
//! [split]
//! test_words = 10000
//! dev1_words = 5000
//! dev2_words = 5000
//! seed = 7
//!
//! [params]
//! delta = 0.5
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use lmsmooth::smoothers::{DenominatorSpace, ModelParams};
use lmsmooth::{LmError, Method, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    #[serde(default)]
    pub lowercase: bool,
    pub order: usize,
    pub method: String,
    #[serde(default)]
    pub vocab: VocabConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitConfig>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabConfig {
    /// Keep training words seen at least this often.
    #[serde(default = "one")]
    pub min_count: u64,
    /// Explicit word list instead of a frequency cut.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn one() -> u64 {
    1
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            min_count: 1,
            file: None,
        }
    }
}

/// Word budgets for the four segments, taken in order test, dev1, dev2,
/// train from sentence `start`. Without `train_words` the rest is training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub test_words: usize,
    pub dev1_words: usize,
    pub dev2_words: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_words: Option<usize>,
    #[serde(default)]
    pub start: usize,
    /// Shuffle sentences with this seed before splitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_min: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_top: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_mb: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_n1_0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_n1_n: Option<f64>,
    /// `events` or `content-words`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
}

pub fn parse_denominator(s: &str) -> Result<DenominatorSpace> {
    match s {
        "events" => Ok(DenominatorSpace::Events),
        "content-words" => Ok(DenominatorSpace::ContentWords),
        _ => Err(LmError::InvalidParameter(format!(
            "denominator must be 'events' or 'content-words', got '{s}'"
        ))),
    }
}

impl ParamsConfig {
    pub fn to_model(&self) -> Result<ModelParams> {
        Ok(ModelParams {
            delta: self.delta,
            k: self.k,
            beta: self.beta.clone(),
            gamma: self.gamma.clone(),
            c_min: self.c_min,
            c_top: self.c_top,
            c_mb: self.c_mb,
            p_n1_0: self.p_n1_0,
            p_n1_n: self.p_n1_n,
            denominator: self.denominator.as_deref().map(parse_denominator).transpose()?,
        })
    }

    pub fn from_model(p: &ModelParams) -> Self {
        ParamsConfig {
            delta: p.delta,
            k: p.k,
            beta: p.beta.clone(),
            gamma: p.gamma.clone(),
            c_min: p.c_min,
            c_top: p.c_top,
            c_mb: p.c_mb,
            p_n1_0: p.p_n1_0,
            p_n1_n: p.p_n1_n,
            denominator: p.denominator.map(|d| {
                match d {
                    DenominatorSpace::Events => "events",
                    DenominatorSpace::ContentWords => "content-words",
                }
                .to_string()
            }),
        }
    }

    /// Values in `over` replace those here.
    pub fn merge(&mut self, over: &ParamsConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if over.$f.is_some() {
                    self.$f = over.$f.clone();
                }
            )*};
        }
        take!(delta, k, beta, gamma, c_min, c_top, c_mb, p_n1_0, p_n1_n, denominator);
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| LmError::Format {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: format!("{}: {}", path.display(), e.message()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        if let Some(f) = self.vocab.file.as_mut() {
            fix(f);
        }
        if let Some(d) = self.output_dir.as_mut() {
            fix(d);
        }
    }

    pub fn method(&self) -> Result<Method> {
        self.method.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let method = self.method()?;
        if self.order == 0 {
            return Err(LmError::InvalidParameter("order must be at least 1".into()));
        }
        if self.vocab.min_count == 0 {
            return Err(LmError::InvalidParameter("vocab.min_count must be at least 1".into()));
        }
        self.params.to_model()?.check(method)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
