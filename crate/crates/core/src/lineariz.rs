//! Transition sequences as surface token sequences, and back.
//!
//! Non-lexicalized tokens are the `Display` forms of [`Transition`]
//! (`SH`, `SH#k`, `NT-X`, `RE`, `RE#k-X`, `SW`, `SW#k`). Lexicalized
//! sequences write every shift as the word it moves; decoding resolves a word
//! token to its first occurrence in the current buffer, which is lossy when a
//! shifted word has an identical word in front of it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalsuite::{score, EvalReport};
use crate::oracle::oracle;
use crate::transition::{execute, ExecMode, ParserState, SystemSpec, Transition};
use crate::treebank::{ConstituentTree, PunctuationPolicy, Sentence, TreebankEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearizationSpec {
    pub system: SystemSpec,
    pub lexicalized: bool,
}

impl LinearizationSpec {
    pub const fn new(system: SystemSpec, lexicalized: bool) -> Self {
        LinearizationSpec { system, lexicalized }
    }

    /// False only for lexicalized Shift#k, where first-occurrence decoding
    /// can pick the wrong copy of a repeated word.
    pub fn is_lossless(&self) -> bool {
        !(self.lexicalized && self.system.disc == crate::transition::DiscMechanism::ShiftK)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSequence(pub Vec<String>);

impl TokenSequence {
    /// Space-delimited.
    pub fn from_line(line: &str) -> Self {
        TokenSequence(line.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

pub fn to_tokens(ts: &[Transition], spec: LinearizationSpec, sentence: &Sentence) -> Result<TokenSequence> {
    let mut state = ParserState::initial(sentence.len());
    let mut out = Vec::with_capacity(ts.len());
    for (step, t) in ts.iter().enumerate() {
        let token = match (spec.lexicalized, t) {
            (true, Transition::Shift) => state.buffer.front().map(|&p| sentence.word(p).to_string()),
            (true, Transition::ShiftK(k)) => state.buffer.get(*k).map(|&p| sentence.word(p).to_string()),
            _ => None,
        };
        state.step(t, spec.system).map_err(|violation| Error::IllegalTransition {
            step,
            transition: t.clone(),
            violation,
        })?;
        out.push(token.unwrap_or_else(|| t.to_string()));
    }
    Ok(TokenSequence(out))
}

/// Oracle sequence for `tree`, rendered as tokens.
pub fn linearize(tree: &ConstituentTree, spec: LinearizationSpec) -> Result<TokenSequence> {
    let ts = oracle(tree, spec.system)?;
    to_tokens(&ts, spec, tree.sentence())
}

/// Decodes tokens into transitions. In lexicalized mode the state is
/// simulated (with repair semantics) so that word tokens can be resolved
/// against the buffer.
pub fn from_tokens(
    tokens: &TokenSequence,
    sentence: &Sentence,
    spec: LinearizationSpec,
    mode: ExecMode,
) -> Result<Vec<Transition>> {
    let mut out = Vec::with_capacity(tokens.len());
    if !spec.lexicalized {
        for (position, token) in tokens.0.iter().enumerate() {
            match token.parse::<Transition>() {
                Ok(t) => out.push(t),
                Err(_) if mode == ExecMode::Repair => {}
                Err(_) => {
                    return Err(Error::UnknownToken {
                        position,
                        token: token.clone(),
                    })
                }
            }
        }
        return Ok(out);
    }

    let mut state = ParserState::initial(sentence.len());
    for (position, token) in tokens.0.iter().enumerate() {
        let t = match token.parse::<Transition>() {
            Ok(t) => t,
            Err(_) => match state.buffer.iter().position(|&p| sentence.word(p) == token) {
                Some(0) => Transition::Shift,
                Some(k) => Transition::ShiftK(k),
                None if mode == ExecMode::Repair => Transition::Shift,
                None => {
                    return Err(Error::WordNotInBuffer {
                        position,
                        token: token.clone(),
                    })
                }
            },
        };
        state.step_repair(&t, spec.system);
        out.push(t);
    }
    Ok(out)
}

/// Tokens to tree: decode, then execute in the same mode.
pub fn delinearize(
    tokens: &TokenSequence,
    sentence: &Sentence,
    spec: LinearizationSpec,
    mode: ExecMode,
) -> Result<ConstituentTree> {
    let ts = from_tokens(tokens, sentence, spec, mode)?;
    execute(sentence, &ts, spec.system, mode)
}

/// Frequencies of the non-word tokens of a linearized corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocab {
    /// Sorted by frequency (descending), then token.
    pub entries: Vec<(String, usize)>,
}

impl Vocab {
    pub fn action_tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.iter().any(|(t, _)| t == token)
    }

    /// `token<TAB>count` per line.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(t, c)| format!("{t}\t{c}\n")).collect()
    }
}

pub fn build_vocab<'a, I>(corpus: I, spec: LinearizationSpec) -> Vocab
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for seq in corpus {
        for token in &seq.0 {
            if token.parse::<Transition>().is_ok_and(|t| spec.system.permits(&t)) {
                *counts.entry(token.as_str()).or_default() += 1;
            }
        }
    }
    let mut entries: Vec<(String, usize)> = counts.into_iter().map(|(t, c)| (t.to_string(), c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocab { entries }
}

/// Score ceiling of an encoding: every gold tree goes through
/// oracle, tokens, decoding and execution, and the result is scored
/// against the gold tree.
pub fn lossiness_report(
    gold: &[TreebankEntry],
    spec: LinearizationSpec,
    policy: &PunctuationPolicy,
    exclude_root: bool,
) -> Result<EvalReport> {
    let rebuilt = gold
        .iter()
        .map(|e| {
            let tokens = linearize(&e.tree, spec)?;
            let tree = delinearize(&tokens, e.tree.sentence(), spec, ExecMode::Strict)
                .or_else(|_| delinearize(&tokens, e.tree.sentence(), spec, ExecMode::Repair))?;
            Ok(TreebankEntry { id: e.id.clone(), tree })
        })
        .collect::<Result<Vec<_>>>()?;
    score(gold, &rebuilt, policy, exclude_root)
}

/// One line of a linearized corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default)]
    pub words: String,
    #[serde(default)]
    pub tokens: String,
}

impl CorpusRecord {
    pub fn sentence(&self) -> Result<Sentence> {
        Sentence::from_line(&self.words)
    }

    pub fn token_sequence(&self) -> TokenSequence {
        TokenSequence::from_line(&self.tokens)
    }
}

/// Reads JSON Lines; blank lines are ignored.
pub fn read_corpus(text: &str) -> Result<Vec<CorpusRecord>> {
    Ok(read_corpus_lines(text)?.into_iter().map(|(_, r)| r).collect())
}

/// Like [`read_corpus`], pairing each record with its 1-based line number.
pub fn read_corpus_lines(text: &str) -> Result<Vec<(usize, CorpusRecord)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map(|r| (i + 1, r)).map_err(|e| Error::Corpus {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_corpus<'a, I>(records: I) -> String
where
    I: IntoIterator<Item = &'a CorpusRecord>,
{
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("plain strings serialize"));
        out.push('\n');
    }
    out
}
