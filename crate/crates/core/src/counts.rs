//! N-gram counts for every order up to `n`, grouped by history.
//!
//! Each predicted position contributes one k-gram for every k in 1..=n, so
//! the begin marker is never counted as an event and the end marker never
//! appears inside a history.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rustc_hash::FxHashMap;

use crate::corpus::{EncodedSentence, TokenId, Vocabulary};
use crate::error::{LmError, Result};
use crate::exec::Execution;

/// Continuations of one history, sorted by word id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HistoryNode {
    pub total: u64,
    pub distinct: u32,
    pub ones: u32,
    pub words: Vec<(TokenId, u64)>,
}

impl HistoryNode {
    fn from_words(mut words: Vec<(TokenId, u64)>) -> Self {
        words.sort_unstable_by_key(|&(w, _)| w);
        let total = words.iter().map(|&(_, c)| c).sum();
        let ones = words.iter().filter(|&&(_, c)| c == 1).count() as u32;
        HistoryNode {
            total,
            distinct: words.len() as u32,
            ones,
            words,
        }
    }

    pub fn count(&self, word: TokenId) -> u64 {
        match self.words.binary_search_by_key(&word, |&(w, _)| w) {
            Ok(i) => self.words[i].1,
            Err(_) => 0,
        }
    }

    pub fn stats(&self) -> HistoryStats {
        HistoryStats {
            total: self.total,
            distinct: self.distinct as u64,
            ones: self.ones as u64,
        }
    }
}

/// `(N(h), distinct(h), ones(h))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HistoryStats {
    pub total: u64,
    pub distinct: u64,
    pub ones: u64,
}

/// All histories of one length, in lexicographic id order.
#[derive(Debug, Clone, Default)]
struct Level {
    keys: Vec<Box<[TokenId]>>,
    nodes: Vec<HistoryNode>,
    index: FxHashMap<Box<[TokenId]>, u32>,
}

impl Level {
    fn build(grams: FxHashMap<Vec<TokenId>, u64>) -> Level {
        let mut grouped: BTreeMap<Box<[TokenId]>, Vec<(TokenId, u64)>> = BTreeMap::new();
        for (gram, c) in grams {
            let (&w, h) = gram.split_last().expect("non-empty n-gram");
            grouped.entry(h.into()).or_default().push((w, c));
        }
        let mut level = Level::default();
        for (i, (h, words)) in grouped.into_iter().enumerate() {
            level.index.insert(h.clone(), i as u32);
            level.keys.push(h);
            level.nodes.push(HistoryNode::from_words(words));
        }
        level
    }

    fn get(&self, h: &[TokenId]) -> Option<&HistoryNode> {
        self.index.get(h).map(|&i| &self.nodes[i as usize])
    }
}

impl PartialEq for Level {
    fn eq(&self, other: &Self) -> bool {
        self.keys == other.keys && self.nodes == other.nodes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    order: usize,
    // levels[k] holds histories of length k, i.e. (k+1)-grams
    levels: Vec<Level>,
}

type ShardCounts = Vec<FxHashMap<Vec<TokenId>, u64>>;

fn count_shard(sentences: &[EncodedSentence], n: usize) -> ShardCounts {
    let mut levels: ShardCounts = vec![FxHashMap::default(); n];
    for s in sentences {
        let ids = s.ids();
        for i in n - 1..ids.len() {
            for k in 1..=n {
                *levels[k - 1].entry(ids[i + 1 - k..=i].to_vec()).or_default() += 1;
            }
        }
    }
    levels
}

/// Count all k-grams, k = 1..=n. Sentences must be padded for at least order n.
pub fn count_ngrams(sentences: &[EncodedSentence], n: usize) -> CountTable {
    count_ngrams_with(sentences, n, Execution::default())
}

pub fn count_ngrams_with(sentences: &[EncodedSentence], n: usize, exec: Execution) -> CountTable {
    assert!(n >= 1, "order must be at least 1");
    if let Some(s) = sentences.iter().find(|s| s.order() < n) {
        panic!("sentence padded for order {} used for order {n}", s.order());
    }
    let shards = exec.map_chunks(sentences, exec.shard_size(sentences.len()), |chunk| {
        count_shard(chunk, n)
    });
    let mut merged: ShardCounts = vec![FxHashMap::default(); n];
    for shard in shards {
        for (into, from) in merged.iter_mut().zip(shard) {
            if into.is_empty() {
                *into = from;
                continue;
            }
            for (g, c) in from {
                *into.entry(g).or_default() += c;
            }
        }
    }
    CountTable {
        order: n,
        levels: merged.into_iter().map(Level::build).collect(),
    }
}

impl CountTable {
    /// Assemble a table from explicit `(k-gram, count)` pairs of every order.
    pub fn from_ngrams<I>(order: usize, grams: I) -> Result<CountTable>
    where
        I: IntoIterator<Item = (Vec<TokenId>, u64)>,
    {
        if order == 0 {
            return Err(LmError::invalid("order must be at least 1"));
        }
        let mut levels: ShardCounts = vec![FxHashMap::default(); order];
        for (g, c) in grams {
            if g.is_empty() || g.len() > order {
                return Err(LmError::invalid("n-gram length out of range"));
            }
            *levels[g.len() - 1].entry(g).or_default() += c;
        }
        Ok(CountTable {
            order,
            levels: levels.into_iter().map(Level::build).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of predicted tokens (unigram total).
    pub fn tokens(&self) -> u64 {
        self.levels[0].get(&[]).map_or(0, |n| n.total)
    }

    pub fn is_empty(&self) -> bool {
        self.tokens() == 0
    }

    pub fn count(&self, gram: &[TokenId]) -> u64 {
        match gram.split_last() {
            Some((&w, h)) if gram.len() <= self.order => {
                self.history(h).map_or(0, |node| node.count(w))
            }
            _ => 0,
        }
    }

    pub fn history(&self, h: &[TokenId]) -> Option<&HistoryNode> {
        self.levels.get(h.len()).and_then(|l| l.get(h))
    }

    /// Like [`CountTable::history`], also returning the position of `h` in
    /// [`CountTable::histories`] order.
    pub fn history_entry(&self, h: &[TokenId]) -> Option<(usize, &HistoryNode)> {
        let level = self.levels.get(h.len())?;
        level
            .index
            .get(h)
            .map(|&i| (i as usize, &level.nodes[i as usize]))
    }

    /// `(N, distinct, ones)` for `h`; zeros for an unseen history.
    pub fn history_aggregate(&self, h: &[TokenId]) -> HistoryStats {
        assert!(h.len() < self.order, "history too long for this table");
        self.history(h).map(HistoryNode::stats).unwrap_or_default()
    }

    /// Histories of length `len` in lexicographic id order.
    pub fn histories(&self, len: usize) -> impl Iterator<Item = (&[TokenId], &HistoryNode)> + '_ {
        let level = &self.levels[len];
        level.keys.iter().map(|k| &**k).zip(level.nodes.iter())
    }

    pub fn history_count(&self, len: usize) -> usize {
        self.levels[len].keys.len()
    }

    /// All k-grams of one order with their counts, in lexicographic id order.
    pub fn ngrams(&self, k: usize) -> impl Iterator<Item = (Vec<TokenId>, u64)> + '_ {
        self.histories(k - 1).flat_map(|(h, node)| {
            node.words.iter().map(move |&(w, c)| {
                let mut g = h.to_vec();
                g.push(w);
                (g, c)
            })
        })
    }

    pub fn count_of_counts(&self, k: usize) -> CountOfCounts {
        assert!(k >= 1 && k <= self.order, "order out of range");
        CountOfCounts::from_counts(
            self.histories(k - 1)
                .flat_map(|(_, n)| n.words.iter().map(|&(_, c)| c)),
        )
    }

    /// Write the sorted text dump: a header, then one line per n-gram.
    pub fn write_to<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> Result<()> {
        writeln!(
            out,
            "#order {} #tokens {} #vocab {}",
            self.order,
            self.tokens(),
            vocab.hash()
        )?;
        for k in 1..=self.order {
            let mut lines: Vec<(Vec<&str>, u64)> = self
                .ngrams(k)
                .map(|(g, c)| (g.iter().map(|&t| vocab.word(t)).collect(), c))
                .collect();
            lines.sort();
            for (words, c) in lines {
                writeln!(out, "{}\t{c}", words.join("\t"))?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R, vocab: &Vocabulary) -> Result<CountTable> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| LmError::format(1, "empty count file"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (order, tokens, hash) = match fields.as_slice() {
            ["#order", n, "#tokens", t, "#vocab", h] => (
                n.parse::<usize>()
                    .map_err(|_| LmError::format(1, "bad order"))?,
                t.parse::<u64>()
                    .map_err(|_| LmError::format(1, "bad token count"))?,
                *h,
            ),
            _ => {
                return Err(LmError::format(
                    1,
                    "expected '#order <n> #tokens <N> #vocab <hash>'",
                ))
            }
        };
        if hash != vocab.hash() {
            return Err(LmError::VocabularyMismatch {
                expected: hash.to_string(),
                found: vocab.hash(),
            });
        }
        if order == 0 {
            return Err(LmError::format(1, "order must be at least 1"));
        }
        let mut grams: ShardCounts = vec![FxHashMap::default(); order];
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts: Vec<&str> = line.split('\t').collect();
            let count = parts
                .pop()
                .and_then(|c| c.parse::<u64>().ok())
                .ok_or_else(|| LmError::format(i + 2, "missing count"))?;
            if parts.is_empty() || parts.len() > order {
                return Err(LmError::format(i + 2, "n-gram length out of range"));
            }
            let ids: Vec<TokenId> = parts.iter().map(|w| vocab.id(w)).collect();
            *grams[ids.len() - 1].entry(ids).or_default() += count;
        }
        let table = CountTable {
            order,
            levels: grams.into_iter().map(Level::build).collect(),
        };
        if table.tokens() != tokens {
            return Err(LmError::format(
                1,
                format!("header declares {tokens} tokens, unigrams sum to {}", table.tokens()),
            ));
        }
        Ok(table)
    }
}

/// Sparse `r -> n_r` for one order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountOfCounts {
    n: BTreeMap<u64, u64>,
    total: u64,
}

impl CountOfCounts {
    pub fn from_counts<I: IntoIterator<Item = u64>>(counts: I) -> Self {
        let mut coc = CountOfCounts::default();
        for c in counts {
            coc.add(c, 1);
        }
        coc
    }

    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        let mut coc = CountOfCounts::default();
        for (r, n) in pairs {
            coc.add(r, n);
        }
        coc
    }

    /// Add `times` n-grams with count `r`; zero counts are ignored.
    pub fn add(&mut self, r: u64, times: u64) {
        if r == 0 || times == 0 {
            return;
        }
        *self.n.entry(r).or_default() += times;
        self.total += r * times;
    }

    pub fn get(&self, r: u64) -> u64 {
        self.n.get(&r).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct n-grams seen at least once.
    pub fn types(&self) -> u64 {
        self.n.values().sum()
    }

    pub fn max_r(&self) -> u64 {
        self.n.keys().next_back().copied().unwrap_or(0)
    }

    /// Nonzero entries in increasing `r`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.n.iter().map(|(&r, &n)| (r, n))
    }

    pub fn nonzero(&self) -> usize {
        self.n.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, encode_corpus, parse_sentences, BOS, EOS};

    fn toy(n: usize) -> (Vocabulary, CountTable) {
        let s = parse_sentences(
            "John read Moby Dick\nMary read a different book\nshe read a book by Cher",
            false,
        );
        let v = build_vocabulary(&s, 1, None).unwrap();
        let t = count_ngrams(&encode_corpus(&s, &v, n), n);
        (v, t)
    }

    #[test]
    fn toy_bigram_counts() {
        let (v, t) = toy(2);
        assert_eq!(t.count(&[v.id("read"), v.id("a")]), 2);
        assert_eq!(t.count(&[BOS, v.id("John")]), 1);
        assert_eq!(t.history_aggregate(&[BOS]).total, 3);
        let read = t.history_aggregate(&[v.id("read")]);
        assert_eq!((read.total, read.distinct, read.ones), (3, 2, 1));
        assert_eq!(t.history_aggregate(&[v.id("Cher")]).total, 1);
        assert_eq!(t.tokens(), 18);
        assert_eq!(t.count_of_counts(2).total(), 18);
        assert_eq!(t.count(&[EOS]), 3);
        assert_eq!(t.count(&[BOS]), 0);
    }

    #[test]
    fn unseen_history_is_zero() {
        let (v, t) = toy(2);
        assert_eq!(t.history_aggregate(&[v.id("book")]).total, 2);
        assert_eq!(t.history_aggregate(&[EOS]), HistoryStats::default());
    }

    #[test]
    fn empty_corpus_gives_empty_table() {
        let t = count_ngrams(&[], 3);
        assert!(t.is_empty());
        assert_eq!(t.count_of_counts(3).total(), 0);
    }

    #[test]
    fn count_of_counts_basics() {
        let c = CountOfCounts::from_counts([1, 1, 2]);
        assert_eq!((c.get(1), c.get(2), c.total()), (2, 1, 4));
        let c = CountOfCounts::from_counts([5]);
        assert_eq!((c.get(5), c.get(1), c.total()), (1, 0, 5));
    }

    #[test]
    fn count_file_round_trip() {
        let (v, t) = toy(3);
        let mut buf = Vec::new();
        t.write_to(&v, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("#order 3 #tokens 18 #vocab {}\n", v.hash())));
        let back = CountTable::read_from(buf.as_slice(), &v).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let (v, _) = toy(1);
        let text = format!("#order 1 #tokens 5 #vocab {}\nread\t3\n", v.hash());
        assert!(matches!(
            CountTable::read_from(text.as_bytes(), &v),
            Err(LmError::Format { .. })
        ));
        let text = "#order 1 #tokens 3 #vocab 0000\nread\t3\n";
        assert!(matches!(
            CountTable::read_from(text.as_bytes(), &v),
            Err(LmError::VocabularyMismatch { .. })
        ));
    }
}
