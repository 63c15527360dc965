//! Seeded random trees for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gap_degree, ConstituentTree, Node, Sentence, TreebankEntry};

const LABELS: &[&str] = &["S", "NP", "VP", "PP", "SBAR", "ADJP", "ADVP", "WHNP", "SQ", "PRN"];

// Small on purpose: repeated surface forms are what make lexicalized
// ShiftK decoding ambiguous.
const WORDS: &[&str] = &[
    "the", "a", "dog", "cat", "saw", "ran", "old", "man", "with", "it", "did", "what", ".", ",", "?",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_words: usize,
    /// Upper bound on children per node; splits of two or more words always
    /// allow at least binary nodes.
    pub max_arity: usize,
    /// Per-constituent probability of attempting to move a block of words.
    pub discontinuity_rate: f64,
    /// Moves that would give any constituent more gaps than this are undone.
    pub max_gap_degree: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_words: 10,
            max_arity: 4,
            discontinuity_rate: 0.3,
            max_gap_degree: 2,
        }
    }
}

pub fn random_tree(seed: u64, params: &SynthParams) -> ConstituentTree {
    let n = params.n_words.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // A continuous tree over slots; slots are later mapped to positions.
    let skeleton = if n == 1 {
        Node::internal(*LABELS.choose(&mut rng).unwrap(), vec![Node::Leaf(0)])
    } else {
        build(&mut rng, 0, n, params.max_arity.max(2))
    };

    let mut slot_at: Vec<usize> = (0..n).collect();
    if params.discontinuity_rate > 0.0 && params.max_gap_degree > 0 && n > 2 {
        let mut attempts = 0;
        count_internal(&skeleton, &mut attempts);
        for _ in 0..attempts {
            if !rng.gen_bool(params.discontinuity_rate.min(1.0)) {
                continue;
            }
            let start = rng.gen_range(0..n);
            let len = rng.gen_range(1..=(n - start).min(3));
            let target = rng.gen_range(0..=n - len);
            if target == start {
                continue;
            }
            let before = slot_at.clone();
            let block: Vec<usize> = slot_at.drain(start..start + len).collect();
            slot_at.splice(target..target, block);
            if max_gaps(&skeleton, &positions_of(&slot_at)) > params.max_gap_degree {
                slot_at = before;
            }
        }
    }

    let position_of = positions_of(&slot_at);
    let mut root = place(&skeleton, &position_of);
    while splice_complete_layer(&mut root) {}

    let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
    ConstituentTree::new(Sentence::new(words).expect("vocabulary words are valid"), root)
        .expect("generator produces valid trees")
}

/// `count` trees with lengths drawn uniformly from `min_words..=max_words`;
/// `params.n_words` is ignored. Ids are 1-based.
pub fn random_treebank(
    seed: u64,
    count: usize,
    min_words: usize,
    max_words: usize,
    params: &SynthParams,
) -> Vec<TreebankEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (min_words.max(1), max_words.max(min_words.max(1)));
    (0..count)
        .map(|i| {
            let p = SynthParams {
                n_words: rng.gen_range(lo..=hi),
                ..*params
            };
            TreebankEntry {
                id: (i + 1).to_string(),
                tree: random_tree(rng.gen(), &p),
            }
        })
        .collect()
}

fn build(rng: &mut ChaCha8Rng, start: usize, end: usize, max_arity: usize) -> Node {
    let len = end - start;
    if len == 1 {
        return if rng.gen_bool(0.3) {
            Node::internal(*LABELS.choose(rng).unwrap(), vec![Node::Leaf(start)])
        } else {
            Node::Leaf(start)
        };
    }
    let arity = rng.gen_range(2..=max_arity.min(len));
    let mut cuts = rand::seq::index::sample(rng, len - 1, arity - 1).into_vec();
    cuts.iter_mut().for_each(|c| *c += start + 1);
    cuts.sort_unstable();
    let mut bounds = vec![start];
    bounds.extend(cuts);
    bounds.push(end);
    let children = bounds.windows(2).map(|w| build(rng, w[0], w[1], max_arity)).collect();
    let mut node = Node::internal(*LABELS.choose(rng).unwrap(), children);
    if rng.gen_bool(0.1) {
        node = Node::internal(*LABELS.choose(rng).unwrap(), vec![node]);
    }
    node
}

fn count_internal(node: &Node, count: &mut usize) {
    if let Node::Internal { children, .. } = node {
        *count += 1;
        children.iter().for_each(|c| count_internal(c, count));
    }
}

fn positions_of(slot_at: &[usize]) -> Vec<usize> {
    let mut position_of = vec![0; slot_at.len()];
    for (pos, &slot) in slot_at.iter().enumerate() {
        position_of[slot] = pos;
    }
    position_of
}

fn max_gaps(node: &Node, position_of: &[usize]) -> usize {
    match node {
        Node::Leaf(_) => 0,
        Node::Internal { children, .. } => {
            let mut y: Vec<usize> = node.leaves().into_iter().map(|s| position_of[s]).collect();
            y.sort_unstable();
            let own = gap_degree(&y);
            children.iter().map(|c| max_gaps(c, position_of)).max().unwrap_or(0).max(own)
        }
    }
}

/// Maps slots to positions and orders children by smallest position.
fn place(node: &Node, position_of: &[usize]) -> Node {
    match node {
        Node::Leaf(s) => Node::Leaf(position_of[*s]),
        Node::Internal { label, children } => {
            let mut children: Vec<Node> = children.iter().map(|c| place(c, position_of)).collect();
            children.sort_by_key(Node::min_position);
            Node::internal(label.clone(), children)
        }
    }
}

/// If every leaf hangs alone under a non-root node, lifts the first such leaf
/// into its grandparent so the tree never looks like it carries a tag layer.
fn splice_complete_layer(root: &mut Node) -> bool {
    let probe = ConstituentTree {
        sentence: Sentence {
            words: vec![String::new(); root.leaves().len()],
        },
        root: root.clone(),
    };
    if !probe.has_preterminal_layer() {
        return false;
    }
    fn lift(node: &mut Node) -> bool {
        let Node::Internal { children, .. } = node else {
            return false;
        };
        for child in children.iter_mut() {
            if let Node::Internal { children: grand, .. } = child {
                if let [Node::Leaf(p)] = grand.as_slice() {
                    *child = Node::Leaf(*p);
                    return true;
                }
            }
            if lift(child) {
                return true;
            }
        }
        false
    }
    lift(root)
}
