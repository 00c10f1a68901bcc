//! Text model files and the generic back-off model they load into.
//!
//! ```text
//! #method <tag> #order <n> #params k=v ...
//! #vocab <hash> <size>
//! #base <uniform denominator>
//! \vocab
//! <content words, one per line>
//! \1-grams
//! log10p<TAB>w1[<TAB>log10bow | r=<count>]
//! \2-grams
//! ...
//! \contexts
//! log10bow<TAB>h1 h2 ...
//! \end
//! ```
//!
//! `p(w|h)` is the listed probability of `h w` if present, otherwise the
//! backoff weight of `h` (1 when absent) times `p(w|h')` for the history `h'`
//! one word shorter, ending at the uniform `1/base`. Church-Gale files also
//! carry every count and are rebuilt from them on load.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::church_gale::{ChurchGale, ChurchGaleParams};
use super::{history, render_ids, LanguageModel, Method};
use crate::corpus::{TokenId, Vocabulary};
use crate::counts::CountTable;
use crate::error::{LmError, Result};

/// Explicit contents of a model, ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDump {
    pub method: Method,
    pub order: usize,
    pub events: usize,
    pub params: Vec<(String, String)>,
    pub base_size: usize,
    /// Unseen top-order histories have no distribution.
    pub strict: bool,
    pub rebuild_from_counts: bool,
    /// Index `k-1`: `(k-gram, probability, count)`.
    pub grams: Vec<Vec<(Vec<TokenId>, f64, Option<u64>)>>,
    /// Index = history length.
    pub bows: Vec<Vec<(Vec<TokenId>, f64)>>,
}

impl ModelDump {
    pub fn new<M: LanguageModel + ?Sized>(model: &M, base_size: usize) -> Self {
        let n = model.order();
        ModelDump {
            method: model.method(),
            order: n,
            events: model.event_count(),
            params: model.params(),
            base_size,
            strict: false,
            rebuild_from_counts: false,
            grams: vec![Vec::new(); n],
            bows: vec![Vec::new(); n],
        }
    }

    pub fn push_gram(&mut self, h: &[TokenId], w: TokenId, p: f64, count: Option<u64>) {
        let mut g = h.to_vec();
        g.push(w);
        self.grams[h.len()].push((g, p, count));
    }

    pub fn push_bow(&mut self, h: &[TokenId], bow: f64) {
        self.bows[h.len()].push((h.to_vec(), bow));
    }
}

fn words(vocab: &Vocabulary, ids: &[TokenId]) -> String {
    ids.iter()
        .map(|&i| vocab.word(i))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_model<W: Write>(dump: &ModelDump, vocab: &Vocabulary, mut out: W) -> Result<()> {
    let params: Vec<String> = dump.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(
        out,
        "#method {} #order {} #params {}",
        dump.method,
        dump.order,
        params.join(" ")
    )?;
    writeln!(out, "#vocab {} {}", vocab.hash(), vocab.len())?;
    writeln!(out, "#base {}", dump.base_size)?;
    if dump.strict {
        writeln!(out, "#strict")?;
    }
    writeln!(out, "\\vocab")?;
    for w in vocab.content_words() {
        writeln!(out, "{w}")?;
    }
    let mut bows: Vec<BTreeMap<&[TokenId], f64>> = dump
        .bows
        .iter()
        .map(|level| level.iter().map(|(h, b)| (h.as_slice(), *b)).collect())
        .collect();
    for (k, level) in dump.grams.iter().enumerate() {
        writeln!(out, "\\{}-grams", k + 1)?;
        for (g, p, count) in level {
            write!(out, "{}\t{}", p.log10(), words(vocab, g))?;
            if let Some(c) = count {
                write!(out, "\tr={c}")?;
            } else if let Some(b) = bows.get_mut(g.len()).and_then(|m| m.remove(g.as_slice())) {
                write!(out, "\t{}", b.log10())?;
            }
            writeln!(out)?;
        }
    }
    writeln!(out, "\\contexts")?;
    for level in &bows {
        for (h, b) in level {
            writeln!(out, "{}\t{}", b.log10(), words(vocab, h))?;
        }
    }
    writeln!(out, "\\end")?;
    Ok(())
}

/// A model read from file: explicit probabilities plus backoff weights.
#[derive(Debug, Clone)]
pub struct BackoffModel {
    method: Method,
    order: usize,
    events: usize,
    base_size: usize,
    strict: bool,
    params: Vec<(String, String)>,
    probs: Vec<FxHashMap<Box<[TokenId]>, f64>>,
    bows: FxHashMap<Box<[TokenId]>, f64>,
}

impl BackoffModel {
    pub fn from_dump(dump: &ModelDump) -> Self {
        BackoffModel {
            method: dump.method,
            order: dump.order,
            events: dump.events,
            base_size: dump.base_size,
            strict: dump.strict,
            params: dump.params.clone(),
            probs: dump
                .grams
                .iter()
                .map(|l| l.iter().map(|(g, p, _)| (g.clone().into_boxed_slice(), *p)).collect())
                .collect(),
            bows: dump
                .bows
                .iter()
                .flatten()
                .map(|(h, b)| (h.clone().into_boxed_slice(), *b))
                .collect(),
        }
    }
}

impl LanguageModel for BackoffModel {
    fn method(&self) -> Method {
        self.method
    }

    fn order(&self) -> usize {
        self.order
    }

    fn event_count(&self) -> usize {
        self.events
    }

    fn prob(&self, context: &[TokenId], word: TokenId) -> Result<f64> {
        let h = history(context, self.order);
        if self.strict && !self.bows.contains_key(h) {
            return Err(LmError::UndefinedDistribution {
                history: render_ids(h),
            });
        }
        let mut g = Vec::with_capacity(self.order);
        let mut acc = 1.0;
        for len in (0..self.order).rev() {
            let hs = &h[h.len() - len..];
            g.clear();
            g.extend_from_slice(hs);
            g.push(word);
            if let Some(&p) = self.probs[len].get(g.as_slice()) {
                return Ok(acc * p);
            }
            if let Some(&b) = self.bows.get(hs) {
                acc *= b;
            }
        }
        Ok(acc / self.base_size as f64)
    }

    fn params(&self) -> Vec<(String, String)> {
        self.params.clone()
    }

    fn dump(&self) -> Result<ModelDump> {
        let mut dump = ModelDump::new(self, self.base_size);
        dump.strict = self.strict;
        for (k, level) in self.probs.iter().enumerate() {
            let mut v: Vec<_> = level.iter().map(|(g, &p)| (g.to_vec(), p, None)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            dump.grams[k] = v;
        }
        let mut bows: Vec<_> = self.bows.iter().map(|(h, &b)| (h.to_vec(), b)).collect();
        bows.sort_by(|a, b| a.0.cmp(&b.0));
        for (h, b) in bows {
            dump.bows[h.len()].push((h, b));
        }
        Ok(dump)
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| LmError::format(line, format!("bad number '{s}'")))
}

fn parse_ids(vocab: &Vocabulary, s: &str, line: usize) -> Result<Vec<TokenId>> {
    s.split(' ')
        .filter(|w| !w.is_empty())
        .map(|w| {
            vocab
                .get(w)
                .ok_or_else(|| LmError::format(line, format!("word '{w}' missing from vocabulary")))
        })
        .collect()
}

fn param<'a>(params: &'a [(String, String)], key: &str) -> Result<&'a str> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| LmError::format(1, format!("missing parameter {key}")))
}

fn count_param(s: &str) -> Result<u64> {
    if s == "inf" {
        return Ok(u64::MAX);
    }
    s.parse().map_err(|_| LmError::format(1, format!("bad count parameter '{s}'")))
}

/// Read a model file, returning its vocabulary and a queryable model.
pub fn read_model<R: BufRead>(input: R) -> Result<(Vocabulary, Box<dyn LanguageModel>)> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((i, l)) => Ok(Some((i, l?))),
            None => Ok(None),
        }
    };
    let eof = |what: &str| LmError::format(0, format!("unexpected end of file, expected {what}"));

    let (_, header) = next()?.ok_or_else(|| eof("header"))?;
    let rest = header
        .strip_prefix("#method ")
        .ok_or_else(|| LmError::format(1, "expected '#method'"))?;
    let (tag, rest) = rest.split_once(" #order ").ok_or_else(|| LmError::format(1, "expected '#order'"))?;
    let (order, rest) = rest.split_once(" #params").ok_or_else(|| LmError::format(1, "expected '#params'"))?;
    let method: Method = tag.parse()?;
    let order: usize = order.trim().parse().map_err(|_| LmError::format(1, "bad order"))?;
    if order == 0 {
        return Err(LmError::format(1, "order must be at least 1"));
    }
    let params: Vec<(String, String)> = rest
        .split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| LmError::format(1, format!("bad parameter '{kv}'")))
        })
        .collect::<Result<_>>()?;

    let (ln, vline) = next()?.ok_or_else(|| eof("#vocab"))?;
    let vf: Vec<&str> = vline.split_whitespace().collect();
    let (hash, size) = match vf.as_slice() {
        ["#vocab", h, s] => (h.to_string(), s.parse::<usize>().map_err(|_| LmError::format(ln, "bad vocabulary size"))?),
        _ => return Err(LmError::format(ln, "expected '#vocab <hash> <size>'")),
    };
    let (ln, bline) = next()?.ok_or_else(|| eof("#base"))?;
    let base_size: usize = bline
        .strip_prefix("#base ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| LmError::format(ln, "expected '#base <size>'"))?;

    let mut strict = false;
    let (mut ln, mut line) = next()?.ok_or_else(|| eof("\\vocab"))?;
    if line == "#strict" {
        strict = true;
        (ln, line) = next()?.ok_or_else(|| eof("\\vocab"))?;
    }
    if line != "\\vocab" {
        return Err(LmError::format(ln, "expected '\\vocab'"));
    }
    let mut content = Vec::new();
    loop {
        let (ln, line) = next()?.ok_or_else(|| eof("\\1-grams"))?;
        if line == "\\1-grams" {
            break;
        }
        if line.starts_with('\\') {
            return Err(LmError::format(ln, "expected '\\1-grams'"));
        }
        content.push(line);
    }
    let vocab = Vocabulary::from_words(content);
    if vocab.len() != size || vocab.hash() != hash {
        return Err(LmError::VocabularyMismatch {
            expected: hash,
            found: vocab.hash(),
        });
    }

    let mut dump = ModelDump {
        method,
        order,
        events: vocab.event_count(),
        params,
        base_size,
        strict,
        rebuild_from_counts: false,
        grams: vec![Vec::new(); order],
        bows: vec![Vec::new(); order],
    };
    let mut k = 1;
    let mut in_contexts = false;
    loop {
        let (ln, line) = next()?.ok_or_else(|| eof("\\end"))?;
        if line == "\\end" {
            break;
        }
        if line == "\\contexts" {
            in_contexts = true;
            continue;
        }
        if let Some(hdr) = line.strip_prefix('\\') {
            let kk = hdr
                .strip_suffix("-grams")
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&x| x == k + 1 && x <= order && !in_contexts)
                .ok_or_else(|| LmError::format(ln, format!("unexpected section '{line}'")))?;
            k = kk;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if in_contexts {
            if fields.len() != 2 {
                return Err(LmError::format(ln, "context lines hold a weight and a history"));
            }
            let b = 10f64.powf(parse_f64(fields[0], ln)?);
            let h = parse_ids(&vocab, fields[1], ln)?;
            if h.len() >= order {
                return Err(LmError::format(ln, "history too long"));
            }
            dump.bows[h.len()].push((h, b));
            continue;
        }
        if !(2..=3).contains(&fields.len()) {
            return Err(LmError::format(ln, "expected log10p, n-gram and optional state"));
        }
        let p = 10f64.powf(parse_f64(fields[0], ln)?);
        let g = parse_ids(&vocab, fields[1], ln)?;
        if g.len() != k {
            return Err(LmError::format(ln, format!("expected a {k}-gram")));
        }
        let mut count = None;
        if let Some(state) = fields.get(2) {
            if let Some(c) = state.strip_prefix("r=") {
                count = Some(c.parse::<u64>().map_err(|_| LmError::format(ln, "bad count"))?);
            } else {
                let b = 10f64.powf(parse_f64(state, ln)?);
                if g.len() < order {
                    dump.bows[g.len()].push((g.clone(), b));
                }
            }
        }
        dump.grams[k - 1].push((g, p, count));
    }

    if method == Method::ChurchGale {
        let grams = dump.grams.iter().flatten().map(|(g, _, c)| {
            c.map(|c| (g.clone(), c))
                .ok_or_else(|| LmError::format(0, "church-gale files need counts on every n-gram"))
        });
        let grams: Vec<_> = grams.collect::<Result<_>>()?;
        let counts = Arc::new(CountTable::from_ngrams(order, grams)?);
        let c_mb = param(&dump.params, "c_mb")?;
        let params = ChurchGaleParams {
            c_mb: if c_mb == "auto" {
                None
            } else {
                Some(count_param(c_mb)? as usize)
            },
            c_min: count_param(param(&dump.params, "c_min")?)?,
            p_n1_0: parse_f64(param(&dump.params, "p_n1_0")?, 1)?,
            p_n1_n: parse_f64(param(&dump.params, "p_n1_n")?, 1)?,
        };
        let model = ChurchGale::new(counts, vocab.event_count(), params)?;
        return Ok((vocab, Box::new(model)));
    }
    Ok((vocab, Box::new(BackoffModel::from_dump(&dump))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_file_is_a_format_error() {
        let text = "#method ml #order 2 #params\n#vocab abc 5\n";
        assert!(matches!(read_model(text.as_bytes()), Err(LmError::Format { .. })));
    }

    #[test]
    fn unknown_method_is_rejected() {
        let text = "#method kneser-ney #order 2 #params\n";
        assert!(read_model(text.as_bytes()).is_err());
    }
}
