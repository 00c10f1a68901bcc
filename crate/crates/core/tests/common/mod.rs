#![allow(dead_code)]

use std::sync::Arc;

use lmsmooth::corpus::{build_vocabulary, encode_corpus, parse_sentences, EncodedSentence};
use lmsmooth::counts::count_ngrams;
use lmsmooth::{CountTable, Vocabulary};
use rand::Rng;

pub const TOY: &str = "John read Moby Dick\nMary read a different book\nshe read a book by Cher";

pub struct Corpus {
    pub vocab: Vocabulary,
    pub counts: Arc<CountTable>,
    pub train: Vec<EncodedSentence>,
}

pub fn prepare(text: &str, n: usize) -> Corpus {
    let s = parse_sentences(text, false);
    prepare_sentences(&s, n)
}

pub fn prepare_sentences(s: &[Vec<String>], n: usize) -> Corpus {
    let vocab = build_vocabulary(s, 1, None).unwrap();
    let train = encode_corpus(s, &vocab, n);
    let counts = Arc::new(count_ngrams(&train, n));
    Corpus { vocab, counts, train }
}

/// Sentences over `w0..w{size}` with a skewed word distribution.
pub fn random_sentences<R: Rng>(rng: &mut R, size: usize, sentences: usize, max_len: usize) -> Vec<Vec<String>> {
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len)
                .map(|_| {
                    let u: f64 = rng.gen();
                    format!("w{}", ((u * u) * size as f64) as usize)
                })
                .collect()
        })
        .collect()
}

pub fn sample_text() -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample.txt");
    std::fs::read_to_string(path).unwrap().to_lowercase()
}
