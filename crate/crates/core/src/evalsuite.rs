//! Labeled bracket scoring.
//!
//! Brackets are `(label, yield)` pairs taken after deleting punctuation and
//! re-indexing the remaining words. Scores are micro-averaged over a corpus;
//! the discontinuous scores use only brackets whose yield has a gap.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::{is_contiguous, ConstituentTree, Node, PunctuationPolicy, TreebankEntry};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bracket {
    pub label: String,
    pub positions: Vec<usize>,
}

impl Bracket {
    pub fn is_discontinuous(&self) -> bool {
        !is_contiguous(&self.positions)
    }

    pub fn span_length(&self) -> usize {
        self.positions.len()
    }
}

/// Brackets of one tree, duplicates kept.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BracketMultiset {
    pub brackets: Vec<Bracket>,
}

impl BracketMultiset {
    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }

    fn counts(&self) -> HashMap<&Bracket, usize> {
        let mut m = HashMap::new();
        for b in &self.brackets {
            *m.entry(b).or_insert(0) += 1;
        }
        m
    }

    /// Size of the multiset intersection.
    pub fn matched(&self, other: &BracketMultiset) -> usize {
        let mine = self.counts();
        other
            .counts()
            .into_iter()
            .map(|(b, c)| c.min(mine.get(b).copied().unwrap_or(0)))
            .sum()
    }

    /// Brackets of `self` that have a partner in `other`, each partner used once.
    pub fn matched_brackets<'a>(&'a self, other: &BracketMultiset) -> Vec<&'a Bracket> {
        let mut available = other.counts();
        let mut out = Vec::new();
        for b in &self.brackets {
            if let Some(c) = available.get_mut(b) {
                if *c > 0 {
                    *c -= 1;
                    out.push(b);
                }
            }
        }
        out
    }

    pub fn same_as(&self, other: &BracketMultiset) -> bool {
        self.counts() == other.counts()
    }
}

pub fn brackets(tree: &ConstituentTree, policy: &PunctuationPolicy, exclude_root: bool) -> BracketMultiset {
    let sentence = tree.sentence();
    let mut new_index = Vec::with_capacity(sentence.len());
    let mut next = 0;
    for w in sentence.words() {
        if policy.is_punct(w) {
            new_index.push(None);
        } else {
            new_index.push(Some(next));
            next += 1;
        }
    }
    let mut out = Vec::new();
    collect(tree.root(), &new_index, true, exclude_root, &mut out);
    BracketMultiset { brackets: out }
}

fn collect(node: &Node, new_index: &[Option<usize>], is_root: bool, exclude_root: bool, out: &mut Vec<Bracket>) {
    if let Node::Internal { label, children } = node {
        if !(is_root && exclude_root) {
            let mut positions: Vec<usize> = node.leaves().into_iter().filter_map(|p| new_index[p]).collect();
            if !positions.is_empty() {
                positions.sort_unstable();
                out.push(Bracket {
                    label: label.clone(),
                    positions,
                });
            }
        }
        for c in children {
            collect(c, new_index, false, exclude_root, out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub gold: usize,
    pub pred: usize,
    pub matched: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.gold += other.gold;
        self.pred += other.pred;
        self.matched += other.matched;
    }

    /// Percentage; an empty denominator gives 0.
    pub fn precision(&self) -> f64 {
        percent(self.matched, self.pred)
    }

    pub fn recall(&self) -> f64 {
        percent(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        harmonic(self.precision(), self.recall())
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Corpus-level scores, as percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when the gold corpus has no discontinuous brackets.
    pub disco_precision: Option<f64>,
    pub disco_recall: Option<f64>,
    pub disco_f1: Option<f64>,
    pub exact_match: f64,
    pub n_sentences: usize,
    pub brackets: Counts,
    pub disco_brackets: Counts,
}

impl EvalReport {
    pub fn from_counts(all: Counts, disco: Counts, exact: usize, n_sentences: usize) -> Self {
        let has_disco = disco.gold > 0;
        EvalReport {
            precision: all.precision(),
            recall: all.recall(),
            f1: all.f1(),
            disco_precision: has_disco.then(|| disco.precision()),
            disco_recall: has_disco.then(|| disco.recall()),
            disco_f1: has_disco.then(|| disco.f1()),
            exact_match: percent(exact, n_sentences),
            n_sentences,
            brackets: all,
            disco_brackets: disco,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        writeln!(f, "{:<16}{:>10}", "sentences", self.n_sentences)?;
        writeln!(f, "{:<16}{:>10.2}", "precision", self.precision)?;
        writeln!(f, "{:<16}{:>10.2}", "recall", self.recall)?;
        writeln!(f, "{:<16}{:>10.2}", "f1", self.f1)?;
        writeln!(f, "{:<16}{:>10}", "disco_precision", opt(self.disco_precision))?;
        writeln!(f, "{:<16}{:>10}", "disco_recall", opt(self.disco_recall))?;
        writeln!(f, "{:<16}{:>10}", "disco_f1", opt(self.disco_f1))?;
        writeln!(f, "{:<16}{:>10.2}", "exact_match", self.exact_match)
    }
}

/// Pairs gold and predicted entries by id, in gold order.
pub fn align<'a>(
    gold: &'a [TreebankEntry],
    pred: &'a [TreebankEntry],
) -> Result<Vec<(&'a ConstituentTree, &'a ConstituentTree)>> {
    let mut by_id: HashMap<&str, &ConstituentTree> = HashMap::with_capacity(pred.len());
    for e in pred {
        if by_id.insert(e.id.as_str(), &e.tree).is_some() {
            return Err(Error::Alignment(format!("duplicate predicted id {}", e.id)));
        }
    }
    if pred.len() != gold.len() {
        return Err(Error::Alignment(format!(
            "{} gold trees but {} predicted trees",
            gold.len(),
            pred.len()
        )));
    }
    gold.iter()
        .map(|g| {
            let p = by_id
                .get(g.id.as_str())
                .ok_or_else(|| Error::Alignment(format!("no prediction for id {}", g.id)))?;
            if g.tree.sentence() != p.sentence() {
                return Err(Error::Alignment(format!("words differ for id {}", g.id)));
            }
            Ok((&g.tree, *p))
        })
        .collect()
}

/// Bracket counts for one sentence pair: all brackets and discontinuous ones.
pub fn sentence_counts(gold: &BracketMultiset, pred: &BracketMultiset) -> (Counts, Counts) {
    let all = Counts {
        gold: gold.len(),
        pred: pred.len(),
        matched: gold.matched(pred),
    };
    let only_disco = |m: &BracketMultiset| BracketMultiset {
        brackets: m.brackets.iter().filter(|b| b.is_discontinuous()).cloned().collect(),
    };
    let (gd, pd) = (only_disco(gold), only_disco(pred));
    let disco = Counts {
        gold: gd.len(),
        pred: pd.len(),
        matched: gd.matched(&pd),
    };
    (all, disco)
}

pub fn score(
    gold: &[TreebankEntry],
    pred: &[TreebankEntry],
    policy: &PunctuationPolicy,
    exclude_root: bool,
) -> Result<EvalReport> {
    let pairs = align(gold, pred)?;
    let mut all = Counts::default();
    let mut disco = Counts::default();
    let mut exact = 0;
    for (g, p) in &pairs {
        let gb = brackets(g, policy, exclude_root);
        let pb = brackets(p, policy, exclude_root);
        let (a, d) = sentence_counts(&gb, &pb);
        all.add(a);
        disco.add(d);
        if gb.same_as(&pb) {
            exact += 1;
        }
    }
    Ok(EvalReport::from_counts(all, disco, exact, pairs.len()))
}

/// Inclusive lower bounds of consecutive buckets; the last is open-ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Buckets(pub Vec<usize>);

impl Buckets {
    /// 1–2, 3–4, 5–9, 10–19, ≥20.
    pub fn span_lengths() -> Self {
        Buckets(vec![1, 3, 5, 10, 20])
    }

    /// ≤10, 11–20, 21–30, 31–40, 41–50, ≥51.
    pub fn sentence_lengths() -> Self {
        Buckets(vec![0, 11, 21, 31, 41, 51])
    }

    fn index(&self, value: usize) -> usize {
        self.0.iter().rposition(|&lo| value >= lo).unwrap_or(0)
    }

    fn name(&self, i: usize) -> String {
        match self.0.get(i + 1) {
            None => format!(">={}", self.0[i]),
            Some(&next) if i == 0 && self.0[0] <= 1 => format!("<={}", next - 1),
            Some(&next) if next - 1 == self.0[i] => format!("{}", self.0[i]),
            Some(&next) => format!("{}-{}", self.0[i], next - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketScore {
    pub bucket: String,
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean yield size of the gold brackets with this label.
    pub mean_gold_span: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub span_length: Vec<BucketScore>,
    pub sentence_length: Vec<BucketScore>,
    /// Sorted by gold frequency, most frequent first.
    pub labels: Vec<LabelScore>,
}

fn bucket_scores(buckets: &Buckets, counts: Vec<Counts>) -> Vec<BucketScore> {
    counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.gold + c.pred > 0)
        .map(|(i, c)| BucketScore {
            bucket: buckets.name(i),
            counts: c,
            precision: c.precision(),
            recall: c.recall(),
            f1: c.f1(),
        })
        .collect()
}

/// F1 by span length, by sentence length and by label. Empty buckets are
/// left out.
pub fn breakdown(
    gold: &[TreebankEntry],
    pred: &[TreebankEntry],
    policy: &PunctuationPolicy,
    exclude_root: bool,
    span_buckets: &Buckets,
    sentence_buckets: &Buckets,
) -> Result<BreakdownReport> {
    let pairs = align(gold, pred)?;
    let mut by_span = vec![Counts::default(); span_buckets.0.len()];
    let mut by_sentence = vec![Counts::default(); sentence_buckets.0.len()];
    let mut by_label: BTreeMap<String, (Counts, usize)> = BTreeMap::new();

    for (g, p) in &pairs {
        let gb = brackets(g, policy, exclude_root);
        let pb = brackets(p, policy, exclude_root);
        let (all, _) = sentence_counts(&gb, &pb);
        by_sentence[sentence_buckets.index(g.n_words())].add(all);

        for b in &gb.brackets {
            by_span[span_buckets.index(b.span_length())].gold += 1;
            let e = by_label.entry(b.label.clone()).or_default();
            e.0.gold += 1;
            e.1 += b.span_length();
        }
        for b in &pb.brackets {
            by_span[span_buckets.index(b.span_length())].pred += 1;
            by_label.entry(b.label.clone()).or_default().0.pred += 1;
        }
        for b in gb.matched_brackets(&pb) {
            by_span[span_buckets.index(b.span_length())].matched += 1;
            by_label.get_mut(&b.label).expect("gold label recorded").0.matched += 1;
        }
    }

    let mut labels: Vec<LabelScore> = by_label
        .into_iter()
        .map(|(label, (c, span_sum))| LabelScore {
            label,
            counts: c,
            precision: c.precision(),
            recall: c.recall(),
            f1: c.f1(),
            mean_gold_span: (c.gold > 0).then(|| span_sum as f64 / c.gold as f64),
        })
        .collect();
    labels.sort_by(|a, b| b.counts.gold.cmp(&a.counts.gold).then_with(|| a.label.cmp(&b.label)));

    Ok(BreakdownReport {
        span_length: bucket_scores(span_buckets, by_span),
        sentence_length: bucket_scores(sentence_buckets, by_sentence),
        labels,
    })
}

impl BreakdownReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for BreakdownReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut table = |title: &str, rows: &[BucketScore]| -> fmt::Result {
            writeln!(f, "{title}")?;
            writeln!(f, "{:<10}{:>8}{:>8}{:>8}{:>9}{:>9}{:>9}", "bucket", "gold", "pred", "match", "P", "R", "F1")?;
            for r in rows {
                writeln!(
                    f,
                    "{:<10}{:>8}{:>8}{:>8}{:>9.2}{:>9.2}{:>9.2}",
                    r.bucket, r.counts.gold, r.counts.pred, r.counts.matched, r.precision, r.recall, r.f1
                )?;
            }
            writeln!(f)
        };
        table("span length", &self.span_length)?;
        table("sentence length", &self.sentence_length)?;
        let mut out = String::new();
        let _ = writeln!(out, "labels");
        let _ = writeln!(
            out,
            "{:<10}{:>8}{:>8}{:>8}{:>9}{:>9}{:>9}{:>10}",
            "label", "gold", "pred", "match", "P", "R", "F1", "avg span"
        );
        for l in &self.labels {
            let span = l.mean_gold_span.map_or_else(|| "-".to_string(), |s| format!("{s:.2}"));
            let _ = writeln!(
                out,
                "{:<10}{:>8}{:>8}{:>8}{:>9.2}{:>9.2}{:>9.2}{:>10}",
                l.label, l.counts.gold, l.counts.pred, l.counts.matched, l.precision, l.recall, l.f1, span
            );
        }
        f.write_str(&out)
    }
}
