//! Constituent trees over a fixed sentence, with structural queries and I/O.
//!
//! A tree stores its words once, in a [`Sentence`], and refers to them by
//! zero-based position from its leaves. Discontinuous constituents are simply
//! internal nodes whose leaves are not a contiguous range of positions.

mod bracket;
mod export;
mod synth;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bracket::{parse_bracketed, parse_treebank, write_bracketed, write_treebank, BracketFormat};
pub use export::{read_export, ExportOptions};
pub use synth::{random_tree, random_treebank, SynthParams};

/// Label used when several top-level nodes have to share one root.
pub const ROOT_LABEL: &str = "ROOT";

/// Ordered words of one input sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Sentence {
    words: Vec<String>,
}

impl Sentence {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() {
            return Err(Error::InvalidSentence("sentence has no words".into()));
        }
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::InvalidSentence(format!(
                    "word {i} ({w:?}) is empty or contains whitespace"
                )));
            }
        }
        Ok(Sentence { words })
    }

    /// Splits on single spaces, the delimiter used by corpus files.
    pub fn from_line(line: &str) -> Result<Self> {
        Sentence::new(line.split(' ').filter(|w| !w.is_empty()))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, position: usize) -> &str {
        &self.words[position]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn to_line(&self) -> String {
        self.words.join(" ")
    }
}

impl TryFrom<Vec<String>> for Sentence {
    type Error = Error;

    fn try_from(words: Vec<String>) -> Result<Self> {
        Sentence::new(words)
    }
}

impl From<Sentence> for Vec<String> {
    fn from(s: Sentence) -> Self {
        s.words
    }
}

/// A node of a constituent tree. Leaves point into the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(usize),
    Internal { label: String, children: Vec<Node> },
}

impl Node {
    pub fn internal(label: impl Into<String>, children: Vec<Node>) -> Node {
        Node::Internal {
            label: label.into(),
            children,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Node::Leaf(_) => None,
            Node::Internal { label, .. } => Some(label),
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Leaf(_) => &[],
            Node::Internal { children, .. } => children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }

    /// Leaf positions in the order they are stored (depth-first, left to right).
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf(p) => out.push(*p),
            Node::Internal { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Sorted yield.
    pub fn yield_positions(&self) -> Vec<usize> {
        let mut y = self.leaves();
        y.sort_unstable();
        y
    }

    pub fn min_position(&self) -> usize {
        match self {
            Node::Leaf(p) => *p,
            Node::Internal { children, .. } => children
                .iter()
                .map(Node::min_position)
                .min()
                .expect("internal node without children"),
        }
    }

    fn sorted_children(&self) -> Node {
        match self {
            Node::Leaf(p) => Node::Leaf(*p),
            Node::Internal { label, children } => {
                let mut children: Vec<Node> = children.iter().map(Node::sorted_children).collect();
                children.sort_by_key(Node::min_position);
                Node::internal(label.clone(), children)
            }
        }
    }

    fn relabel(&self, new_position: &[usize]) -> Node {
        match self {
            Node::Leaf(p) => Node::Leaf(new_position[*p]),
            Node::Internal { label, children } => Node::internal(
                label.clone(),
                children.iter().map(|c| c.relabel(new_position)).collect(),
            ),
        }
    }

    fn visit_internal<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [Node])) {
        if let Node::Internal { label, children } = self {
            f(label, children);
            for c in children {
                c.visit_internal(f);
            }
        }
    }
}

/// A labeled constituent `(label, yield)`, the unit of bracket scoring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constituent {
    pub label: String,
    /// Sorted, non-empty.
    pub positions: Vec<usize>,
}

impl Constituent {
    pub fn is_continuous(&self) -> bool {
        is_contiguous(&self.positions)
    }

    pub fn gap_degree(&self) -> usize {
        gap_degree(&self.positions)
    }
}

/// Whether a sorted position list forms one contiguous range.
pub fn is_contiguous(sorted: &[usize]) -> bool {
    gap_degree(sorted) == 0
}

/// Number of maximal gaps in a sorted position list.
pub fn gap_degree(sorted: &[usize]) -> usize {
    sorted.windows(2).filter(|w| w[1] != w[0] + 1).count()
}

pub(crate) fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
        return Err(Error::InvalidTree(format!(
            "label {label:?} is empty or contains whitespace or brackets"
        )));
    }
    Ok(())
}

/// A sentence together with a constituent hierarchy over its positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstituentTree {
    sentence: Sentence,
    root: Node,
}

impl ConstituentTree {
    /// Validates that every position of the sentence is covered by exactly
    /// one leaf, that internal nodes are non-empty, and that the root is an
    /// internal node.
    pub fn new(sentence: Sentence, root: Node) -> Result<Self> {
        if root.is_leaf() {
            return Err(Error::InvalidTree("root must be a labeled constituent".into()));
        }
        let n = sentence.len();
        let mut seen = vec![false; n];
        check_node(&root, &mut seen)?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidTree(format!("position {missing} is not covered by any leaf")));
        }
        Ok(ConstituentTree { sentence, root })
    }

    pub fn sentence(&self) -> &Sentence {
        &self.sentence
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn n_words(&self) -> usize {
        self.sentence.len()
    }

    pub fn into_parts(self) -> (Sentence, Node) {
        (self.sentence, self.root)
    }

    /// All constituents in preorder, root first.
    pub fn constituents(&self) -> Vec<Constituent> {
        let mut out = Vec::new();
        self.root.visit_internal(&mut |label, children| {
            let mut positions: Vec<usize> = children.iter().flat_map(Node::leaves).collect();
            positions.sort_unstable();
            out.push(Constituent {
                label: label.to_string(),
                positions,
            });
        });
        out
    }

    pub fn n_constituents(&self) -> usize {
        let mut count = 0;
        self.root.visit_internal(&mut |_, _| count += 1);
        count
    }

    pub fn is_continuous(&self) -> bool {
        self.constituents().iter().all(Constituent::is_continuous)
    }

    /// Largest gap degree over all constituents.
    pub fn max_gap_degree(&self) -> usize {
        self.constituents().iter().map(Constituent::gap_degree).max().unwrap_or(0)
    }

    /// Leaf positions in stored order. Equal to the identity exactly when the
    /// tree can be built by shifting words left to right.
    pub fn leaf_order(&self) -> Vec<usize> {
        self.root.leaves()
    }

    pub fn in_surface_order(&self) -> bool {
        self.leaf_order().iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Word permutation obtained by sorting every node's children by their
    /// smallest position and reading the leaves left to right. Entry `i` is
    /// the original position of the `i`-th word in the projected order.
    pub fn canonical_order(&self) -> Vec<usize> {
        self.root.sorted_children().leaves()
    }

    /// Same tree with every node's children sorted by smallest position.
    pub fn with_sorted_children(&self) -> ConstituentTree {
        ConstituentTree {
            sentence: self.sentence.clone(),
            root: self.root.sorted_children(),
        }
    }

    /// Reorders the sentence so that word `order[i]` moves to position `i`,
    /// relabeling leaves accordingly. `order` must be a permutation.
    pub fn permute(&self, order: &[usize]) -> Result<ConstituentTree> {
        let n = self.n_words();
        if order.len() != n {
            return Err(Error::InvalidTree(format!(
                "permutation has {} entries for {n} words",
                order.len()
            )));
        }
        let mut new_position = vec![usize::MAX; n];
        for (i, &p) in order.iter().enumerate() {
            if p >= n || new_position[p] != usize::MAX {
                return Err(Error::InvalidTree("order is not a permutation".into()));
            }
            new_position[p] = i;
        }
        let sentence = Sentence {
            words: order.iter().map(|&p| self.sentence.words[p].clone()).collect(),
        };
        Ok(ConstituentTree {
            sentence,
            root: self.root.relabel(&new_position),
        })
    }

    /// Projects the tree onto its canonical word order. The result is
    /// continuous, with children in surface order.
    pub fn canonicalize(&self) -> ConstituentTree {
        self.permute(&self.canonical_order())
            .expect("canonical order is a permutation")
            .with_sorted_children()
    }

    /// Removes the part-of-speech layer: when every leaf hangs alone under a
    /// non-root node, those nodes are dropped and leaves attach to their
    /// grandparents. Trees without a complete layer are returned unchanged.
    pub fn strip_preterminals(&self) -> ConstituentTree {
        if !self.has_preterminal_layer() {
            return self.clone();
        }
        let root = match &self.root {
            Node::Internal { label, children } => {
                Node::internal(label.clone(), children.iter().map(strip_node).collect())
            }
            Node::Leaf(_) => unreachable!("root is internal"),
        };
        ConstituentTree {
            sentence: self.sentence.clone(),
            root,
        }
    }

    pub fn has_preterminal_layer(&self) -> bool {
        fn all_tagged(node: &Node, is_root: bool) -> bool {
            match node {
                Node::Leaf(_) => false,
                Node::Internal { children, .. } => {
                    if let [Node::Leaf(_)] = children.as_slice() {
                        return !is_root;
                    }
                    children.iter().all(|c| all_tagged(c, false))
                }
            }
        }
        all_tagged(&self.root, true)
    }
}

fn strip_node(node: &Node) -> Node {
    match node {
        Node::Leaf(p) => Node::Leaf(*p),
        Node::Internal { label, children } => match children.as_slice() {
            [Node::Leaf(p)] => Node::Leaf(*p),
            _ => Node::internal(label.clone(), children.iter().map(strip_node).collect()),
        },
    }
}

fn check_node(node: &Node, seen: &mut [bool]) -> Result<()> {
    match node {
        Node::Leaf(p) => {
            let slot = seen
                .get_mut(*p)
                .ok_or_else(|| Error::InvalidTree(format!("leaf position {p} is out of range")))?;
            if *slot {
                return Err(Error::InvalidTree(format!("position {p} appears more than once")));
            }
            *slot = true;
            Ok(())
        }
        Node::Internal { label, children } => {
            validate_label(label)?;
            if children.is_empty() {
                return Err(Error::InvalidTree(format!("constituent {label} has no children")));
            }
            children.iter().try_for_each(|c| check_node(c, seen))
        }
    }
}

/// A tree together with the identifier used to align corpora.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreebankEntry {
    pub id: String,
    pub tree: ConstituentTree,
}

/// Which surface forms count as punctuation for scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PunctuationPolicy {
    None,
    Tokens(BTreeSet<String>),
}

/// Surface forms the conventional bracket scorer deletes.
pub const DEFAULT_PUNCTUATION: &[&str] = &[".", ",", ":", "``", "''", "-LRB-", "-RRB-", "?", "!"];

impl Default for PunctuationPolicy {
    fn default() -> Self {
        PunctuationPolicy::Tokens(DEFAULT_PUNCTUATION.iter().map(|s| s.to_string()).collect())
    }
}

impl PunctuationPolicy {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PunctuationPolicy::Tokens(tokens.into_iter().map(Into::into).collect())
    }

    pub fn is_punct(&self, word: &str) -> bool {
        match self {
            PunctuationPolicy::None => false,
            PunctuationPolicy::Tokens(set) => set.contains(word),
        }
    }
}

impl fmt::Display for ConstituentTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_bracketed(self, BracketFormat::Disc).expect("discbracket is always writable"))
    }
}
