//! Text ingestion: vocabularies, boundary-padded sentence encoding, and
//! carving a corpus into adjacent test / development / training segments.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::Path;

use rustc_hash::FxHashMap;
use sha2::{Digest, Sha256};

use crate::error::{LmError, Result};

pub type TokenId = u32;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const UNK: TokenId = 2;

pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";

const SPECIALS: [&str; 3] = [BOS_TOKEN, EOS_TOKEN, UNK_TOKEN];

/// A closed word list with dense ids. Ids 0..3 are the begin, end and unknown
/// markers; content words follow in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: FxHashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn from_words<I, S>(content: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut sorted: Vec<String> = content
            .into_iter()
            .map(Into::into)
            .filter(|w| !SPECIALS.contains(&w.as_str()))
            .collect();
        sorted.sort_unstable();
        sorted.dedup();
        let words: Vec<String> = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(sorted)
            .collect();
        let ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as TokenId))
            .collect();
        Vocabulary { words, ids }
    }

    /// Number of ids including the three markers.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.content_len() == 0
    }

    pub fn content_len(&self) -> usize {
        self.words.len() - SPECIALS.len()
    }

    /// Size of the predicted-event space: every id except the begin marker.
    pub fn event_count(&self) -> usize {
        self.words.len() - 1
    }

    /// Ids that can appear as predicted events, in id order.
    pub fn events(&self) -> impl Iterator<Item = TokenId> + '_ {
        (1..self.words.len() as TokenId).into_iter()
    }

    pub fn id(&self, word: &str) -> TokenId {
        self.ids.get(word).copied().unwrap_or(UNK)
    }

    pub fn get(&self, word: &str) -> Option<TokenId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: TokenId) -> &str {
        &self.words[id as usize]
    }

    pub fn content_words(&self) -> &[String] {
        &self.words[SPECIALS.len()..]
    }

    pub fn render(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .map(|&i| self.word(i))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Short content hash identifying this vocabulary in model and report files.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.words {
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# vocabulary {} entries, hash {}", self.len(), self.hash())?;
        writeln!(
            out,
            "# ids 0..2 are {BOS_TOKEN} {EOS_TOKEN} {UNK_TOKEN}; word on line k has id k+3"
        )?;
        for w in self.content_words() {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = fs::File::open(path)?;
        let mut words = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.split_whitespace().count() != 1 {
                return Err(LmError::format(i + 1, "vocabulary lines hold one word"));
            }
            words.push(line.to_string());
        }
        Ok(Vocabulary::from_words(words))
    }
}

/// Build a vocabulary from corpus frequencies, or from an explicit list.
pub fn build_vocabulary(
    sentences: &[Vec<String>],
    min_count: u64,
    explicit: Option<&[String]>,
) -> Result<Vocabulary> {
    if let Some(list) = explicit {
        return Ok(Vocabulary::from_words(list.iter().cloned()));
    }
    if min_count < 1 {
        return Err(LmError::invalid("min_count must be at least 1"));
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for s in sentences {
        for w in s {
            *freq.entry(w.as_str()).or_default() += 1;
        }
    }
    Ok(Vocabulary::from_words(
        freq.into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(w, _)| w.to_string()),
    ))
}

/// A sentence padded for an order-`n` model: `n-1` begin markers, the words,
/// and one end marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodedSentence {
    ids: Vec<TokenId>,
    order: usize,
}

impl EncodedSentence {
    pub fn ids(&self) -> &[TokenId] {
        &self.ids
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of predicted positions (words plus the end marker).
    pub fn predicted(&self) -> usize {
        self.ids.len() - (self.order - 1)
    }

    /// Iterate `(context, word)` over predicted positions; the context is the
    /// preceding `n-1` ids.
    pub fn events(&self) -> impl Iterator<Item = (&[TokenId], TokenId)> + '_ {
        let n = self.order;
        (n - 1..self.ids.len()).map(move |i| (&self.ids[i + 1 - n..i], self.ids[i]))
    }

    /// The words without padding, as surface strings.
    pub fn decode(&self, vocab: &Vocabulary) -> Vec<String> {
        self.ids[self.order - 1..self.ids.len() - 1]
            .iter()
            .map(|&i| vocab.word(i).to_string())
            .collect()
    }
}

pub fn encode_sentence<S: AsRef<str>>(
    words: &[S],
    vocab: &Vocabulary,
    order: usize,
) -> EncodedSentence {
    let order = order.max(1);
    let mut ids = Vec::with_capacity(words.len() + order);
    ids.extend(std::iter::repeat(BOS).take(order - 1));
    ids.extend(words.iter().map(|w| match vocab.id(w.as_ref()) {
        // markers in running text are treated as unknown words
        BOS | EOS => UNK,
        id => id,
    }));
    ids.push(EOS);
    EncodedSentence { ids, order }
}

pub fn encode_corpus(
    sentences: &[Vec<String>],
    vocab: &Vocabulary,
    order: usize,
) -> Vec<EncodedSentence> {
    sentences
        .iter()
        .map(|s| encode_sentence(s, vocab, order))
        .collect()
}

pub fn tokenize(line: &str, lowercase: bool) -> Vec<String> {
    line.split_whitespace()
        .map(|w| {
            if lowercase {
                w.to_lowercase()
            } else {
                w.to_string()
            }
        })
        .collect()
}

/// Read UTF-8 text, one sentence per line. Blank lines are skipped.
pub fn read_sentences(path: &Path, lowercase: bool) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_sentences(&text, lowercase))
}

pub fn parse_sentences(text: &str, lowercase: bool) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| tokenize(l, lowercase))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Segment sizes in sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub test: usize,
    pub dev1: usize,
    pub dev2: usize,
    pub train: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.test + self.dev1 + self.dev2 + self.train
    }

    /// Convert word budgets into sentence counts, walking the corpus from
    /// `start` in segment order. A `train_words` of `None` takes the rest.
    pub fn from_word_budgets(
        sentences: &[Vec<String>],
        start: usize,
        held_out_words: [usize; 3],
        train_words: Option<usize>,
    ) -> SplitSizes {
        let mut pos = start.min(sentences.len());
        let mut take = |budget: usize| {
            let begin = pos;
            let mut words = 0;
            while pos < sentences.len() && words < budget {
                words += sentences[pos].len();
                pos += 1;
            }
            pos - begin
        };
        let test = take(held_out_words[0]);
        let dev1 = take(held_out_words[1]);
        let dev2 = take(held_out_words[2]);
        let train = match train_words {
            Some(w) => take(w),
            None => sentences.len() - pos,
        };
        SplitSizes {
            test,
            dev1,
            dev2,
            train,
        }
    }
}

/// Four adjacent, disjoint sentence ranges; held-out segments precede training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSplit {
    pub test: Range<usize>,
    pub dev1: Range<usize>,
    pub dev2: Range<usize>,
    pub train: Range<usize>,
}

impl DataSplit {
    pub fn select<'a, T>(&self, items: &'a [T], range: &Range<usize>) -> &'a [T] {
        &items[range.clone()]
    }
}

pub fn split_corpus(corpus_len: usize, sizes: SplitSizes) -> Result<DataSplit> {
    split_corpus_at(corpus_len, 0, sizes)
}

/// Like [`split_corpus`] but starting at sentence `start`, which lets repeated
/// runs use completely disjoint regions of one corpus.
pub fn split_corpus_at(corpus_len: usize, start: usize, sizes: SplitSizes) -> Result<DataSplit> {
    let needed = start + sizes.total();
    if needed > corpus_len {
        return Err(LmError::InsufficientData {
            needed,
            available: corpus_len,
            shortfall: needed - corpus_len,
        });
    }
    let mut at = start;
    let mut next = |len: usize| {
        let r = at..at + len;
        at += len;
        r
    };
    Ok(DataSplit {
        test: next(sizes.test),
        dev1: next(sizes.dev1),
        dev2: next(sizes.dev2),
        train: next(sizes.train),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<Vec<String>> {
        parse_sentences(
            "John read Moby Dick\nMary read a different book\nshe read a book by Cher\n",
            false,
        )
    }

    #[test]
    fn toy_vocabulary_has_eleven_words() {
        let v = build_vocabulary(&toy(), 1, None).unwrap();
        assert_eq!(v.content_len(), 11);
        assert_eq!(v.len(), 14);
        assert_eq!(v.event_count(), 13);
        assert_eq!(v.word(BOS), BOS_TOKEN);
        // lexicographic after the markers
        assert_eq!(v.word(3), "Cher");
    }

    #[test]
    fn min_count_threshold_is_inclusive() {
        let mut corpus = vec![vec!["a".to_string()]; 100];
        corpus.extend(vec![vec!["b".to_string()]; 69]);
        let v = build_vocabulary(&corpus, 70, None).unwrap();
        assert_eq!(v.content_words(), &["a".to_string()]);
        assert!(build_vocabulary(&corpus, 0, None).is_err());
    }

    #[test]
    fn empty_corpus_gives_markers_only() {
        let v = build_vocabulary(&[], 1, None).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.is_empty());
    }

    #[test]
    fn explicit_list_overrides_min_count() {
        let list = vec!["zeta".to_string(), "alpha".to_string()];
        let v = build_vocabulary(&toy(), 1000, Some(&list)).unwrap();
        assert_eq!(v.content_words(), &["alpha".to_string(), "zeta".to_string()]);
    }

    #[test]
    fn padding_follows_order() {
        let v = build_vocabulary(&toy(), 1, None).unwrap();
        let s = ["John", "read", "a", "book"];
        let e2 = encode_sentence(&s, &v, 2);
        assert_eq!(v.render(e2.ids()), "<s> John read a book </s>");
        let e3 = encode_sentence(&s, &v, 3);
        assert_eq!(v.render(e3.ids()), "<s> <s> John read a book </s>");
        assert_eq!(e3.predicted(), 5);
        let oov = encode_sentence(&["xyzzy"], &v, 2);
        assert_eq!(oov.ids(), &[BOS, UNK, EOS]);
    }

    #[test]
    fn events_carry_full_contexts() {
        let v = build_vocabulary(&toy(), 1, None).unwrap();
        let e = encode_sentence(&["John", "read"], &v, 3);
        let ev: Vec<_> = e.events().map(|(c, w)| (c.to_vec(), w)).collect();
        assert_eq!(ev.len(), 3);
        assert_eq!(ev[0].0, vec![BOS, BOS]);
        assert_eq!(ev[2].1, EOS);
    }

    #[test]
    fn split_ranges_are_adjacent() {
        let sizes = SplitSizes {
            test: 10,
            dev1: 10,
            dev2: 10,
            train: 70,
        };
        let s = split_corpus(100, sizes).unwrap();
        assert_eq!(s.test, 0..10);
        assert_eq!(s.dev1, 10..20);
        assert_eq!(s.dev2, 20..30);
        assert_eq!(s.train, 30..100);
        let err = split_corpus(90, sizes).unwrap_err();
        match err {
            LmError::InsufficientData { shortfall, .. } => assert_eq!(shortfall, 10),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn word_budgets_cover_whole_sentences() {
        let corpus: Vec<Vec<String>> = (0..50)
            .map(|i| vec![format!("w{i}"); 1 + i % 3])
            .collect();
        let sizes = SplitSizes::from_word_budgets(&corpus, 0, [10, 10, 10], None);
        assert_eq!(sizes.total(), 50);
        assert!(sizes.test >= 4);
    }

    #[test]
    fn vocabulary_file_round_trip() {
        let v = build_vocabulary(&toy(), 1, None).unwrap();
        let dir = std::env::temp_dir().join(format!("lmsmooth-vocab-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("v.txt");
        v.save(&p).unwrap();
        let back = Vocabulary::load(&p).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.hash(), v.hash());
        fs::remove_dir_all(&dir).ok();
    }
}
