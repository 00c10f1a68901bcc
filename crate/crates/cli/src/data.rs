use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lmsmooth::corpus::{
    build_vocabulary, encode_corpus, read_sentences, split_corpus_at, EncodedSentence, SplitSizes,
};
use lmsmooth::counts::count_ngrams_with;
use lmsmooth::{CountTable, Execution, LmError, Result, Vocabulary};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, SplitConfig};

/// Corpus segments encoded for one order, with training counts.
pub struct Prepared {
    pub vocab: Vocabulary,
    pub counts: Arc<CountTable>,
    pub train: Vec<EncodedSentence>,
    pub dev1: Vec<EncodedSentence>,
    pub dev2: Vec<EncodedSentence>,
    pub test: Vec<EncodedSentence>,
}

pub fn load_vocab(file: Option<&Path>, train: &[Vec<String>], min_count: u64) -> Result<Vocabulary> {
    match file {
        Some(p) => Vocabulary::load(p),
        None => build_vocabulary(train, min_count, None),
    }
}

fn segments(
    sentences: Vec<Vec<String>>,
    split: &SplitConfig,
) -> Result<[Vec<Vec<String>>; 4]> {
    let mut sentences = sentences;
    if let Some(seed) = split.seed {
        sentences.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let sizes = SplitSizes::from_word_budgets(
        &sentences,
        split.start,
        [split.test_words, split.dev1_words, split.dev2_words],
        split.train_words,
    );
    let ranges = split_corpus_at(sentences.len(), split.start, sizes)?;
    let budgets = [
        (split.test_words, sizes.test),
        (split.dev1_words, sizes.dev1),
        (split.dev2_words, sizes.dev2),
        (split.train_words.unwrap_or(1), sizes.train),
    ];
    if budgets.iter().any(|&(words, got)| words > 0 && got == 0) {
        let needed = split.start + sizes.total() + 1;
        return Err(LmError::InsufficientData {
            needed,
            available: sentences.len(),
            shortfall: needed.saturating_sub(sentences.len()),
        });
    }
    let take = |r: &std::ops::Range<usize>| sentences[r.clone()].to_vec();
    Ok([
        take(&ranges.test),
        take(&ranges.dev1),
        take(&ranges.dev2),
        take(&ranges.train),
    ])
}

pub fn prepare(cfg: &ExperimentConfig, exec: Execution) -> Result<Prepared> {
    let sentences = read_sentences(&cfg.corpus, cfg.lowercase)?;
    let [test, dev1, dev2, train] = match &cfg.split {
        Some(split) => segments(sentences, split)?,
        None => [Vec::new(), Vec::new(), Vec::new(), sentences],
    };
    if train.is_empty() {
        return Err(LmError::InvalidParameter("no training sentences".into()));
    }
    let vocab = load_vocab(cfg.vocab.file.as_deref(), &train, cfg.vocab.min_count)?;
    let n = cfg.order;
    let train = encode_corpus(&train, &vocab, n);
    let counts = Arc::new(count_ngrams_with(&train, n, exec));
    Ok(Prepared {
        counts,
        train,
        dev1: encode_corpus(&dev1, &vocab, n),
        dev2: encode_corpus(&dev2, &vocab, n),
        test: encode_corpus(&test, &vocab, n),
        vocab,
    })
}

/// Writes files, or only reports them on a dry run.
pub struct Output {
    pub dry_run: bool,
}

impl Output {
    pub fn write(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        if self.dry_run {
            println!("dry run: would write {} ({} bytes)", path.display(), bytes.len());
            return Ok(());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, bytes)?;
        Ok(())
    }
}

pub fn with_extension_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
