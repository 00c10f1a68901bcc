//! Cross-entropy and perplexity on test text, plus count-by-count diagnostics
//! in [`diagnostics`].

pub mod diagnostics;

use std::fmt;
use std::io::Write;

use crate::corpus::{EncodedSentence, Vocabulary, EOS};
use crate::error::{LmError, Result};
use crate::exec::Execution;
use crate::smoothers::LanguageModel;

pub use diagnostics::{
    bang_for_the_buck, count_statistics, entropy_fraction_by_count, expected_over_actual,
    gt_zero_count_study, ideal_corrected_counts, CountRow, CountStatistics, EntropyFractions,
    ModelCountRow, ZeroCountRow, TAIL_COUNT,
};

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions<'a> {
    /// Count the end marker of each sentence as a word.
    pub count_eos: bool,
    pub exec: Execution,
    /// Used to spell out n-grams in error messages.
    pub vocab: Option<&'a Vocabulary>,
}

impl Default for EvalOptions<'_> {
    fn default() -> Self {
        EvalOptions {
            count_eos: true,
            exec: Execution::default(),
            vocab: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Bits per word.
    pub entropy: f64,
    pub perplexity: f64,
    /// Words scored: content tokens, plus end markers when counted.
    pub tokens: u64,
    pub sentences: usize,
    /// Total `log2 p` over the test set.
    pub log2_prob: f64,
    pub sentence_log2_probs: Vec<f64>,
}

impl EvalReport {
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "entropy\tperplexity\ttokens\tsentences\tlog2_prob")?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            self.entropy, self.perplexity, self.tokens, self.sentences, self.log2_prob
        )?;
        writeln!(out)?;
        writeln!(out, "sentence\tlog2_prob\tprob")?;
        for (i, lp) in self.sentence_log2_probs.iter().enumerate() {
            writeln!(out, "{i}\t{lp}\t{}", lp.exp2())?;
        }
        Ok(())
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sentences   {}", self.sentences)?;
        writeln!(f, "tokens      {}", self.tokens)?;
        writeln!(f, "log2 prob   {:.6}", self.log2_prob)?;
        writeln!(f, "entropy     {:.6} bits/word", self.entropy)?;
        write!(f, "perplexity  {:.4}", self.perplexity)
    }
}

pub fn perplexity(entropy: f64) -> f64 {
    entropy.exp2()
}

/// `log2 p(sentence)`: the sum over every predicted position, end marker included.
pub fn sentence_log2_prob(
    model: &dyn LanguageModel,
    sentence: &EncodedSentence,
    vocab: Option<&Vocabulary>,
) -> Result<f64> {
    if sentence.order() != model.order() {
        return Err(LmError::invalid(format!(
            "sentence padded for order {}, model has order {}",
            sentence.order(),
            model.order()
        )));
    }
    let mut total = 0.0;
    for (ctx, w) in sentence.events() {
        let p = model.prob(ctx, w)?;
        if !(p > 0.0) {
            let mut g = ctx.to_vec();
            g.push(w);
            let ngram = match vocab {
                Some(v) => v.render(&g),
                None => crate::smoothers::render_ids(&g),
            };
            return Err(LmError::InfiniteEntropy { ngram });
        }
        total += p.log2();
    }
    Ok(total)
}

fn scored_tokens(sentences: &[EncodedSentence], count_eos: bool) -> u64 {
    sentences
        .iter()
        .map(|s| {
            let eos = s.ids().last() == Some(&EOS);
            (s.predicted() - usize::from(eos && !count_eos)) as u64
        })
        .sum()
}

/// Score every sentence, in parallel when `opts.exec` allows, and reduce in
/// sentence order.
pub fn evaluate(
    model: &dyn LanguageModel,
    sentences: &[EncodedSentence],
    opts: EvalOptions<'_>,
) -> Result<EvalReport> {
    let tokens = scored_tokens(sentences, opts.count_eos);
    if tokens == 0 {
        return Err(LmError::invalid("test set has no words to score"));
    }
    let per = opts
        .exec
        .map(sentences, |s| sentence_log2_prob(model, s, opts.vocab))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let log2_prob: f64 = per.iter().sum();
    let entropy = -log2_prob / tokens as f64;
    Ok(EvalReport {
        entropy,
        perplexity: perplexity(entropy),
        tokens,
        sentences: sentences.len(),
        log2_prob,
        sentence_log2_probs: per,
    })
}

/// Bits per word of `model` on `sentences`.
pub fn cross_entropy(
    model: &dyn LanguageModel,
    sentences: &[EncodedSentence],
    opts: EvalOptions<'_>,
) -> Result<f64> {
    evaluate(model, sentences, opts).map(|r| r.entropy)
}
