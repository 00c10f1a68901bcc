//! Tab-separated and plain-text renderings of analysis results.

use std::fmt::Write;

use lmsmooth::evaluate::{CountRow, EntropyFractions, ModelCountRow, ZeroCountRow};

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| v.to_string())
}

fn opt_short(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

fn label(r: u64, tail: bool) -> String {
    if tail {
        format!("{r}+")
    } else {
        r.to_string()
    }
}

pub fn counts_tsv(rows: &[CountRow], model: &[ModelCountRow], bang: &[Option<f64>]) -> String {
    let mut s = String::from(
        "r\tactual\tml_expected\tideal_corrected\tmodel_expected\tmodel_corrected\texpected_over_actual\tbang_for_the_buck\n",
    );
    for ((row, m), b) in rows.iter().zip(model).zip(bang) {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            label(row.r, row.tail),
            row.actual,
            row.ml_expected,
            opt(row.ideal),
            m.expected,
            opt(m.average),
            opt(m.ratio),
            opt(*b)
        )
        .unwrap();
    }
    s
}

pub fn counts_text(rows: &[CountRow], model: &[ModelCountRow], bang: &[Option<f64>]) -> String {
    let mut s = format!(
        "{:>5} {:>9} {:>10} {:>10} {:>10} {:>10}\n",
        "r", "actual", "ideal r*", "model r*", "exp/act", "bang"
    );
    for ((row, m), b) in rows.iter().zip(model).zip(bang) {
        if row.actual == 0 && row.ideal.is_none() {
            continue;
        }
        writeln!(
            s,
            "{:>5} {:>9} {:>10} {:>10} {:>10} {:>10}",
            label(row.r, row.tail),
            row.actual,
            opt_short(row.ideal),
            opt_short(m.average),
            opt_short(m.ratio),
            opt_short(*b)
        )
        .unwrap();
    }
    s
}

pub fn entropy_tsv(rows: &[CountRow], f: &EntropyFractions) -> String {
    let mut s = String::from("r\tfraction\tcumulative\n");
    for (row, (x, c)) in rows.iter().zip(f.by_count.iter().zip(&f.cumulative)) {
        writeln!(s, "{}\t{x}\t{c}", label(row.r, row.tail)).unwrap();
    }
    writeln!(s, "zero-history\t{}\t{}", f.zero_history, 1.0).unwrap();
    s
}

pub fn zero_counts_tsv(rows: &[ZeroCountRow]) -> String {
    let mut s = String::from("n1\tn_lo\tn_hi\thistories\toccurrences\tzero_events\tdesired\tgood_turing\n");
    for r in rows {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.n1, r.n_lo, r.n_hi, r.histories, r.occurrences, r.zero_events, r.desired, r.predicted
        )
        .unwrap();
    }
    s
}

pub struct CompareRow {
    pub method: String,
    pub params: String,
    pub dev_entropy: f64,
    pub test_entropy: f64,
    pub tokens: u64,
}

pub fn compare_tsv(rows: &[CompareRow], baseline: f64) -> String {
    let mut s = String::from("method\tdev1_entropy\ttest_entropy\tperplexity\tdiff_vs_baseline\ttokens\tparams\n");
    for r in rows {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.method,
            r.dev_entropy,
            r.test_entropy,
            r.test_entropy.exp2(),
            r.test_entropy - baseline,
            r.tokens,
            r.params
        )
        .unwrap();
    }
    s
}

pub fn compare_text(rows: &[CompareRow], baseline: f64) -> String {
    let mut s = format!(
        "{:<16} {:>10} {:>10} {:>11} {:>10}  params\n",
        "method", "dev1 H", "test H", "perplexity", "vs base"
    );
    for r in rows {
        writeln!(
            s,
            "{:<16} {:>10.4} {:>10.4} {:>11.2} {:>+10.4}  {}",
            r.method,
            r.dev_entropy,
            r.test_entropy,
            r.test_entropy.exp2(),
            r.test_entropy - baseline,
            r.params
        )
        .unwrap();
    }
    s
}
