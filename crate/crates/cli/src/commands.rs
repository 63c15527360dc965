use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use treelin::evalsuite::Buckets;
use treelin::lineariz::{delinearize as decode, linearize as encode, read_corpus, read_corpus_lines, write_corpus, CorpusRecord};
use treelin::treebank::{parse_treebank, random_treebank, read_export, write_treebank, BracketFormat, ExportOptions, SynthParams};
use treelin::{build_vocab, EvalReport, ExecMode, LinearizationSpec, PunctuationPolicy, TokenSequence, TreebankEntry};

use crate::{read_text, write_output, CmdResult, Failure, Format, ScoreArgs, TreebankArgs};

fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool starts");
    pool.install(|| items.par_iter().map(f).collect())
}

fn read_treebank(path: &Path, tb: &TreebankArgs) -> Result<Vec<TreebankEntry>, Failure> {
    let text = read_text(path)?;
    let mut entries = match tb.format {
        Format::Ptb => parse_treebank(&text, BracketFormat::Ptb)?,
        Format::Discbracket => parse_treebank(&text, BracketFormat::Disc)?,
        Format::Export => read_export(
            &text,
            ExportOptions {
                keep_tags: tb.keep_preterminals,
            },
        )?,
    };
    if !tb.keep_preterminals {
        for e in &mut entries {
            e.tree = e.tree.strip_preterminals();
        }
    }
    Ok(entries)
}

fn render_treebank(entries: &[TreebankEntry], format: Format) -> Result<String, Failure> {
    let format = match format {
        Format::Ptb => BracketFormat::Ptb,
        Format::Discbracket => BracketFormat::Disc,
        Format::Export => return Err(Failure::Usage("export format can only be read".into())),
    };
    Ok(write_treebank(entries.iter().map(|e| &e.tree), format)?)
}

fn policy(spec: &str) -> Result<PunctuationPolicy, Failure> {
    match spec {
        "default" => Ok(PunctuationPolicy::default()),
        "none" => Ok(PunctuationPolicy::None),
        _ => match spec.strip_prefix("file:") {
            Some(path) => {
                let text = read_text(Path::new(path))?;
                Ok(PunctuationPolicy::from_tokens(text.split_whitespace()))
            }
            None => Err(Failure::Usage(format!(
                "--punct expects default, none or file:PATH, got {spec:?}"
            ))),
        },
    }
}

fn print_report<T: std::fmt::Display + serde::Serialize>(report: &T, json: bool) -> CmdResult {
    let text = if json {
        serde_json::to_string_pretty(report).expect("report serializes") + "\n"
    } else {
        report.to_string()
    };
    write_output(None, &text)
}

pub fn linearize(input: &Path, output: Option<&Path>, spec: LinearizationSpec, tb: &TreebankArgs, jobs: usize) -> CmdResult {
    let entries = read_treebank(input, tb)?;
    let results = par_map(jobs, &entries, |e| encode(&e.tree, spec));
    let mut records = Vec::with_capacity(entries.len());
    let mut failed = 0;
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(tokens) => records.push(CorpusRecord {
                id: e.id.clone(),
                words: e.tree.sentence().to_line(),
                tokens: tokens.to_string(),
            }),
            Err(err) => {
                failed += 1;
                eprintln!("tree {}: {err}", e.id);
            }
        }
    }
    write_output(output, &write_corpus(&records))?;
    if failed > 0 {
        return Err(Failure::Semantic(format!(
            "{failed} of {} trees could not be linearized",
            entries.len()
        )));
    }
    Ok(())
}

pub fn delinearize(
    predictions: &Path,
    sentences: Option<&Path>,
    output: Option<&Path>,
    spec: LinearizationSpec,
    mode: ExecMode,
    format: Format,
    jobs: usize,
) -> CmdResult {
    let preds = read_corpus_lines(&read_text(predictions)?)?;
    let sents = match sentences {
        Some(p) => read_corpus_lines(&read_text(p)?)?,
        None => preds.clone(),
    };

    let mut by_id: HashMap<&str, (usize, &CorpusRecord)> = HashMap::with_capacity(preds.len());
    for (line, r) in &preds {
        if by_id.insert(r.id.as_str(), (*line, r)).is_some() {
            return Err(Failure::Format(format!(
                "{}: line {line}: duplicate id {}",
                predictions.display(),
                r.id
            )));
        }
    }

    struct Job<'a> {
        id: &'a str,
        line: Option<usize>,
        words: &'a str,
        tokens: TokenSequence,
    }
    let mut wanted = 0;
    let jobs_in: Vec<Job> = sents
        .iter()
        .map(|(_, s)| {
            let pred = by_id.get(s.id.as_str());
            wanted += usize::from(pred.is_some());
            Job {
                id: &s.id,
                line: pred.map(|(l, _)| *l),
                words: &s.words,
                tokens: pred.map(|(_, r)| r.token_sequence()).unwrap_or_default(),
            }
        })
        .collect();
    if wanted < preds.len() {
        eprintln!("warning: {} predictions have no matching sentence", preds.len() - wanted);
    }

    let results = par_map(jobs, &jobs_in, |j| -> Result<TreebankEntry, String> {
        if j.line.is_none() && mode == ExecMode::Strict {
            return Err("no prediction for this id".into());
        }
        let sentence = treelin::Sentence::from_line(j.words).map_err(|e| e.to_string())?;
        let tree = decode(&j.tokens, &sentence, spec, mode).map_err(|e| e.to_string())?;
        Ok(TreebankEntry {
            id: j.id.to_string(),
            tree,
        })
    });

    let mut trees = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (j, r) in jobs_in.iter().zip(results) {
        match r {
            Ok(t) => trees.push(t),
            Err(msg) => {
                failed += 1;
                match j.line {
                    Some(line) => eprintln!("line {line} (id {}): {msg}", j.id),
                    None => eprintln!("id {}: {msg}", j.id),
                }
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Semantic(format!(
            "{failed} of {} sequences could not be decoded",
            jobs_in.len()
        )));
    }
    write_output(output, &render_treebank(&trees, format)?)
}

pub fn roundtrip(input: &Path, spec: LinearizationSpec, tb: &TreebankArgs, jobs: usize) -> CmdResult {
    let entries = read_treebank(input, tb)?;
    let verdicts = par_map(jobs, &entries, |e| -> Result<bool, String> {
        let tokens = encode(&e.tree, spec).map_err(|err| err.to_string())?;
        let sentence = e.tree.sentence();
        let rebuilt = decode(&tokens, sentence, spec, ExecMode::Strict)
            .or_else(|_| decode(&tokens, sentence, spec, ExecMode::Repair))
            .map_err(|err| err.to_string())?;
        Ok(rebuilt == e.tree)
    });
    let mut out = String::new();
    let mut exact = 0;
    for (e, v) in entries.iter().zip(&verdicts) {
        match v {
            Ok(true) => {
                exact += 1;
                out.push_str(&format!("{}\tok\n", e.id));
            }
            Ok(false) => out.push_str(&format!("{}\tmismatch\n", e.id)),
            Err(msg) => out.push_str(&format!("{}\terror\t{msg}\n", e.id)),
        }
    }
    let n = entries.len();
    let pct = if n == 0 { 100.0 } else { 100.0 * exact as f64 / n as f64 };
    out.push_str(&format!("exact {exact}/{n} ({pct:.2}%)\n"));
    write_output(None, &out)?;
    if spec.is_lossless() && exact < n {
        return Err(Failure::Semantic(format!("{} trees did not round-trip", n - exact)));
    }
    Ok(())
}

pub fn eval(gold: &Path, pred: &Path, tb: &TreebankArgs, score: &ScoreArgs) -> CmdResult {
    let policy = policy(&score.punct)?;
    let g = read_treebank(gold, tb)?;
    let p = read_treebank(pred, tb)?;
    let report = treelin::score(&g, &p, &policy, !score.keep_root)?;
    print_report(&report, score.json)
}

pub fn lossiness(gold: &Path, spec: LinearizationSpec, tb: &TreebankArgs, score: &ScoreArgs) -> CmdResult {
    let policy = policy(&score.punct)?;
    let g = read_treebank(gold, tb)?;
    let report = treelin::lossiness_report(&g, spec, &policy, !score.keep_root)?;
    print_report(&report, score.json)
}

fn buckets(edges: Vec<usize>, flag: &str) -> Result<Buckets, Failure> {
    if edges.is_empty() || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage(format!("{flag} must be a strictly increasing list")));
    }
    Ok(Buckets(edges))
}

pub fn analyze(
    gold: &Path,
    pred: &Path,
    tb: &TreebankArgs,
    score: &ScoreArgs,
    span_edges: Vec<usize>,
    sentence_edges: Vec<usize>,
) -> CmdResult {
    let span = buckets(span_edges, "--span-buckets")?;
    let sentence = buckets(sentence_edges, "--sentence-buckets")?;
    let policy = policy(&score.punct)?;
    let g = read_treebank(gold, tb)?;
    let p = read_treebank(pred, tb)?;
    let report = treelin::breakdown(&g, &p, &policy, !score.keep_root, &span, &sentence)?;
    print_report(&report, score.json)
}

pub fn synth(
    seed: u64,
    count: usize,
    min_words: usize,
    max_words: usize,
    params: &SynthParams,
    format: Format,
    output: Option<&Path>,
) -> CmdResult {
    if min_words == 0 || max_words < min_words {
        return Err(Failure::Usage("need 1 <= --min-words <= --max-words".into()));
    }
    if !(0.0..=1.0).contains(&params.discontinuity_rate) {
        return Err(Failure::Usage("--rate must lie in [0, 1]".into()));
    }
    let entries = random_treebank(seed, count, min_words, max_words, params);
    write_output(output, &render_treebank(&entries, format)?)
}

pub fn vocab(corpus: &Path, spec: LinearizationSpec, output: Option<&Path>) -> CmdResult {
    let records = read_corpus(&read_text(corpus)?)?;
    let seqs: Vec<TokenSequence> = records.iter().map(CorpusRecord::token_sequence).collect();
    write_output(output, &build_vocab(&seqs, spec).to_text())
}

const METRICS: [&str; 7] = [
    "precision",
    "recall",
    "f1",
    "disco_precision",
    "disco_recall",
    "disco_f1",
    "exact_match",
];

fn metric(r: &EvalReport, name: &str) -> Option<f64> {
    match name {
        "precision" => Some(r.precision),
        "recall" => Some(r.recall),
        "f1" => Some(r.f1),
        "disco_precision" => r.disco_precision,
        "disco_recall" => r.disco_recall,
        "disco_f1" => r.disco_f1,
        "exact_match" => Some(r.exact_match),
        _ => unreachable!("unknown metric"),
    }
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn merge_reports(paths: &[PathBuf], as_json: bool) -> CmdResult {
    let mut reports = Vec::with_capacity(paths.len());
    for p in paths {
        let r: EvalReport = serde_json::from_str(&read_text(p)?)
            .map_err(|e| Failure::Format(format!("{}: {e}", p.display())))?;
        reports.push(r);
    }
    let mut obj = serde_json::Map::new();
    obj.insert("n_reports".into(), json!(reports.len()));
    let mut text = format!("{:<16}{:>10}{:>10}{:>4}\n", "metric", "mean", "std", "n");
    for name in METRICS {
        let values: Vec<f64> = reports.iter().filter_map(|r| metric(r, name)).collect();
        if values.is_empty() {
            obj.insert(name.into(), serde_json::Value::Null);
            text.push_str(&format!("{name:<16}{:>10}{:>10}{:>4}\n", "-", "-", 0));
            continue;
        }
        let (mean, std) = mean_std(&values);
        obj.insert(name.into(), json!({"mean": mean, "std": std, "n": values.len()}));
        text.push_str(&format!("{name:<16}{mean:>10.2}{std:>10.2}{:>4}\n", values.len()));
    }
    if as_json {
        text = serde_json::to_string_pretty(&obj).expect("json serializes") + "\n";
    }
    write_output(None, &text)
}
