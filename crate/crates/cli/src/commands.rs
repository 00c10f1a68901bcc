use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use lmsmooth::corpus::{encode_corpus, read_sentences, EncodedSentence};
use lmsmooth::counts::count_ngrams_with;
use lmsmooth::evaluate::{
    bang_for_the_buck, count_statistics, entropy_fraction_by_count, evaluate, expected_over_actual,
    gt_zero_count_study, EvalOptions,
};
use lmsmooth::optimize::tune::TuneOptions;
use lmsmooth::optimize::{tune_parameters, TuneData};
use lmsmooth::smoothers::export::{read_model, write_model};
use lmsmooth::smoothers::{build_model, LanguageModel, ModelParams, TrainingData};
use lmsmooth::{CountTable, Execution, LmError, Method, Result, Vocabulary};

use crate::config::{ExperimentConfig, ParamsConfig, VocabConfig};
use crate::data::{load_vocab, prepare, with_extension_suffix, Output, Prepared};
use crate::report::{self, CompareRow};
use crate::{AnalyzeArgs, CompareArgs, CorpusArgs, CountArgs, EvalArgs, TrainArgs, TuneArgs};

pub struct Context {
    pub exec: Execution,
    pub dry_run: bool,
}

impl Context {
    fn output(&self) -> Output {
        Output {
            dry_run: self.dry_run,
        }
    }
}

fn invalid(msg: impl Into<String>) -> LmError {
    LmError::InvalidParameter(msg.into())
}

fn model_bytes(model: &dyn LanguageModel, vocab: &Vocabulary) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_model(&model.dump()?, vocab, &mut buf)?;
    Ok(buf)
}

fn open_model(path: &Path) -> Result<(Vocabulary, Box<dyn LanguageModel>)> {
    read_model(BufReader::new(File::open(path)?))
}

fn check_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(LmError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        )))
    }
}

fn describe(params: &ModelParams) -> String {
    let cfg = ParamsConfig::from_model(params);
    toml::to_string(&cfg)
        .unwrap_or_default()
        .lines()
        .map(|l| l.replace(" = ", "="))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn count(ctx: &Context, a: CountArgs) -> Result<()> {
    let corpus = a.corpus.corpus.as_deref().ok_or_else(|| invalid("count needs --corpus"))?;
    let n = a.corpus.order.ok_or_else(|| invalid("count needs --order"))?;
    if n == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let sentences = read_sentences(corpus, a.corpus.lowercase)?;
    let vocab = load_vocab(a.corpus.vocab.as_deref(), &sentences, a.corpus.min_count.unwrap_or(1))?;
    let encoded = encode_corpus(&sentences, &vocab, n);
    let counts = count_ngrams_with(&encoded, n, ctx.exec);
    let mut buf = Vec::new();
    counts.write_to(&vocab, &mut buf)?;
    let vocab_out = a.vocab_out.unwrap_or_else(|| with_extension_suffix(&a.out, ".vocab"));
    let mut vbuf = Vec::new();
    vocab.write_to(&mut vbuf)?;
    let out = ctx.output();
    out.write(&a.out, &buf)?;
    out.write(&vocab_out, &vbuf)?;
    println!(
        "{} sentences, {} tokens, vocabulary {} ({}), order {n}",
        sentences.len(),
        counts.tokens(),
        vocab.len(),
        vocab.hash()
    );
    Ok(())
}

/// Build a configuration from an optional file plus command-line overrides.
fn config_from(
    path: Option<&Path>,
    corpus: &CorpusArgs,
    method: Option<&str>,
    params: &ParamsConfig,
) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig {
            corpus: corpus
                .corpus
                .clone()
                .ok_or_else(|| invalid("give --config or --corpus"))?,
            lowercase: false,
            order: corpus.order.ok_or_else(|| invalid("give --config or --order"))?,
            method: method
                .ok_or_else(|| invalid("give --config or --method"))?
                .to_string(),
            vocab: VocabConfig::default(),
            split: None,
            params: ParamsConfig::default(),
            output_dir: None,
        },
    };
    if let Some(c) = &corpus.corpus {
        cfg.corpus = c.clone();
    }
    if let Some(n) = corpus.order {
        cfg.order = n;
    }
    cfg.lowercase |= corpus.lowercase;
    if let Some(m) = corpus.min_count {
        cfg.vocab.min_count = m;
    }
    if let Some(v) = &corpus.vocab {
        cfg.vocab.file = Some(v.clone());
    }
    if let Some(m) = method {
        cfg.method = m.to_string();
    }
    cfg.params.merge(params);
    cfg.validate()?;
    check_exists(&cfg.corpus)?;
    Ok(cfg)
}

fn output_path(explicit: Option<PathBuf>, cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    explicit
        .or_else(|| cfg.output_dir.as_ref().map(|d| d.join(name)))
        .ok_or_else(|| invalid(format!("give --out or set output_dir for {name}")))
}

pub fn train(ctx: &Context, a: TrainArgs) -> Result<()> {
    let cfg = config_from(a.config.as_deref(), &a.corpus, a.method.as_deref(), &a.params.to_config())?;
    let out_path = output_path(a.out, &cfg, "model.lm")?;
    let method = cfg.method()?;
    let data = prepare(&cfg, ctx.exec)?;
    let external;
    let held_out: Option<&[EncodedSentence]> = match &a.held_out {
        Some(p) => {
            external = encode_corpus(&read_sentences(p, cfg.lowercase)?, &data.vocab, cfg.order);
            Some(&external)
        }
        None if !data.dev2.is_empty() => Some(&data.dev2),
        None => None,
    };
    let training = TrainingData {
        counts: &data.counts,
        vocab: &data.vocab,
        held_out,
        exec: ctx.exec,
    };
    let model = build_model(method, &cfg.params.to_model()?, &training)?;
    ctx.output().write(&out_path, &model_bytes(model.as_ref(), &data.vocab)?)?;
    println!(
        "trained {method} order {} on {} sentences ({} tokens), vocabulary {} -> {}",
        cfg.order,
        data.train.len(),
        data.counts.tokens(),
        data.vocab.hash(),
        out_path.display()
    );
    Ok(())
}

fn tune_data<'a>(data: &'a Prepared, exec: Execution) -> Result<TuneData<'a>> {
    if data.dev1.is_empty() || data.dev2.is_empty() {
        return Err(invalid("tuning needs a split with dev1_words and dev2_words"));
    }
    Ok(TuneData {
        counts: &data.counts,
        vocab: &data.vocab,
        dev1: &data.dev1,
        dev2: &data.dev2,
        exec,
    })
}

pub fn tune(ctx: &Context, a: TuneArgs) -> Result<()> {
    let cfg = config_from(Some(&a.config), &CorpusArgs::default(), a.method.as_deref(), &a.params.to_config())?;
    let dir = a
        .out_dir
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| invalid("give --out-dir or set output_dir"))?;
    let method = cfg.method()?;
    let data = prepare(&cfg, ctx.exec)?;
    let td = tune_data(&data, ctx.exec)?;
    if ctx.dry_run {
        println!("dry run: would tune {method} on {} training sentences", data.train.len());
        for f in ["params.toml", "audit.tsv", "model.lm"] {
            println!("dry run: would write {}", dir.join(f).display());
        }
        return Ok(());
    }
    let opts = TuneOptions {
        multi_start: a.multi_start,
        ..TuneOptions::default()
    };
    let result = tune_parameters(method, td, &cfg.params.to_model()?, &opts)?;

    let mut fitted = cfg.clone();
    fitted.params = ParamsConfig::from_model(&result.params);
    fitted.output_dir = None;
    let mut audit = String::from("evaluation\tdev1_entropy\tparams\n");
    for (i, e) in result.audit.iter().enumerate() {
        let p: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        audit.push_str(&format!("{i}\t{}\t{}\n", e.entropy, p.join(" ")));
    }
    let model = build_model(method, &result.params, &td.training())?;
    let out = ctx.output();
    out.write(&dir.join("params.toml"), fitted.to_toml().as_bytes())?;
    out.write(&dir.join("audit.tsv"), audit.as_bytes())?;
    out.write(&dir.join("model.lm"), &model_bytes(model.as_ref(), &data.vocab)?)?;
    println!(
        "{method}: dev1 entropy {:.4} bits/word after {} evaluations; {}",
        result.entropy,
        result.audit.len(),
        describe(&result.params)
    );
    Ok(())
}

fn encode_test(path: &Path, lowercase: bool, vocab: &Vocabulary, n: usize) -> Result<Vec<EncodedSentence>> {
    Ok(encode_corpus(&read_sentences(path, lowercase)?, vocab, n))
}

pub fn eval(ctx: &Context, a: EvalArgs) -> Result<()> {
    let (vocab, model) = open_model(&a.model)?;
    if let Some(v) = &a.vocab {
        let other = Vocabulary::load(v)?;
        if other.hash() != vocab.hash() {
            return Err(LmError::VocabularyMismatch {
                expected: vocab.hash(),
                found: other.hash(),
            });
        }
    }
    let test = encode_test(&a.test, a.lowercase, &vocab, model.order())?;
    let opts = EvalOptions {
        count_eos: a.count_eos,
        exec: ctx.exec,
        vocab: Some(&vocab),
    };
    let report = evaluate(model.as_ref(), &test, opts)?;
    println!("model       {} order {}", model.method(), model.order());
    println!("{report}");
    if report.sentences <= 20 {
        for (i, lp) in report.sentence_log2_probs.iter().enumerate() {
            println!("sentence {i}: p = {:.6e} (log2 {lp:.6})", lp.exp2());
        }
    }
    if let Some(out) = &a.out {
        let mut buf = Vec::new();
        report.write_tsv(&mut buf)?;
        ctx.output().write(out, &buf)?;
    }
    Ok(())
}

pub fn analyze(ctx: &Context, a: AnalyzeArgs) -> Result<()> {
    let (vocab, model) = open_model(&a.model)?;
    let counts = CountTable::read_from(BufReader::new(File::open(&a.counts)?), &vocab)?;
    if counts.order() != model.order() {
        return Err(invalid(format!(
            "count file has order {}, model has order {}",
            counts.order(),
            model.order()
        )));
    }
    let test = encode_test(&a.test, a.lowercase, &vocab, model.order())?;
    let stats = count_statistics(&counts, &test, vocab.event_count(), a.tail)?;
    let rows = stats.rows();
    let m = model.as_ref();
    let model_rows = expected_over_actual(m, &stats, ctx.exec)?;
    let bang = bang_for_the_buck(m, &stats, ctx.exec)?;
    let fractions = entropy_fraction_by_count(m, &stats, ctx.exec)?;
    let zero = gt_zero_count_study(&stats, a.max_n1);

    println!("model {} order {}; {} test events, {} in unseen histories", m.method(), m.order(), stats.total_events, stats.zero_history_events);
    print!("{}", report::counts_text(rows, &model_rows, &bang));
    println!(
        "entropy share: r=0 {:.4}, r=1 {:.4}, unseen history {:.4}",
        fractions.by_count[0],
        fractions.by_count.get(1).copied().unwrap_or(0.0),
        fractions.zero_history
    );
    if let Some(dir) = &a.out_dir {
        let out = ctx.output();
        out.write(&dir.join("counts.tsv"), report::counts_tsv(rows, &model_rows, &bang).as_bytes())?;
        out.write(&dir.join("entropy.tsv"), report::entropy_tsv(rows, &fractions).as_bytes())?;
        out.write(&dir.join("zero_counts.tsv"), report::zero_counts_tsv(&zero).as_bytes())?;
    }
    Ok(())
}

pub fn compare(ctx: &Context, a: CompareArgs) -> Result<()> {
    let configs = a
        .configs
        .iter()
        .map(|p| ExperimentConfig::load(p))
        .collect::<Result<Vec<_>>>()?;
    let base = &configs[0];
    let entries: Vec<(Method, ModelParams)> = match &a.methods {
        Some(ms) => ms
            .iter()
            .map(|m| Ok((m.parse::<Method>()?, ModelParams::default())))
            .collect::<Result<_>>()?,
        None => configs
            .iter()
            .map(|c| Ok((c.method()?, c.params.to_model()?)))
            .collect::<Result<_>>()?,
    };
    for c in &configs[1..] {
        if c.order != base.order {
            return Err(invalid("compared configurations must share the model order"));
        }
    }
    check_exists(&base.corpus)?;
    let data = prepare(base, ctx.exec)?;
    if data.test.is_empty() {
        return Err(invalid("comparison needs a split with test_words"));
    }
    if ctx.dry_run {
        for (m, _) in &entries {
            println!("dry run: would compare {m}");
        }
        if let Some(out) = &a.out {
            println!("dry run: would write {}", out.display());
        }
        return Ok(());
    }
    let opts = EvalOptions {
        exec: ctx.exec,
        vocab: Some(&data.vocab),
        ..EvalOptions::default()
    };
    let mut rows = Vec::new();
    for (method, fixed) in entries {
        let (params, dev_entropy) = if a.no_tune {
            (fixed, f64::NAN)
        } else {
            let td = tune_data(&data, ctx.exec)?;
            let r = tune_parameters(method, td, &fixed, &TuneOptions::default())?;
            (r.params, r.entropy)
        };
        let training = TrainingData {
            counts: &data.counts,
            vocab: &data.vocab,
            held_out: (!data.dev2.is_empty()).then_some(data.dev2.as_slice()),
            exec: ctx.exec,
        };
        let model = build_model(method, &params, &training)?;
        let report = evaluate(model.as_ref(), &data.test, opts)?;
        rows.push(CompareRow {
            method: method.to_string(),
            params: describe(&params),
            dev_entropy,
            test_entropy: report.entropy,
            tokens: report.tokens,
        });
    }
    let baseline = rows
        .iter()
        .find(|r| r.method == Method::InterpBaseline.tag())
        .unwrap_or(&rows[0])
        .test_entropy;
    print!("{}", report::compare_text(&rows, baseline));
    if let Some(out) = &a.out {
        ctx.output().write(out, report::compare_tsv(&rows, baseline).as_bytes())?;
    }
    Ok(())
}
