//! Stack/buffer semantics of the top-down, bottom-up and in-order transition
//! systems and their discontinuous extensions (Swap, Swap#k, Shift#k).

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::treebank::{ConstituentTree, Node, Sentence, ROOT_LABEL};

/// One parser action. Its `Display` form is the token used in linearized
/// sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Transition {
    Shift,
    /// Moves the word at this zero-based buffer index onto the stack.
    ShiftK(usize),
    NonTerminal(String),
    Reduce,
    /// Pops this many items into a constituent with the given label.
    ReduceK(usize, String),
    Swap,
    SwapK(usize),
}

impl Transition {
    pub fn is_shift(&self) -> bool {
        matches!(self, Transition::Shift | Transition::ShiftK(_))
    }

    pub fn is_swap(&self) -> bool {
        matches!(self, Transition::Swap | Transition::SwapK(_))
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Shift => f.write_str("SH"),
            Transition::ShiftK(k) => write!(f, "SH#{k}"),
            Transition::NonTerminal(x) => write!(f, "NT-{x}"),
            Transition::Reduce => f.write_str("RE"),
            Transition::ReduceK(k, x) => write!(f, "RE#{k}-{x}"),
            Transition::Swap => f.write_str("SW"),
            Transition::SwapK(k) => write!(f, "SW#{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a transition token: {0:?}")]
pub struct ParseTransitionError(pub String);

fn parse_count(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl FromStr for Transition {
    type Err = ParseTransitionError;

    fn from_str(token: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || ParseTransitionError(token.to_string());
        let valid_label = |l: &str| !l.is_empty() && !l.chars().any(|c| c.is_whitespace() || c == '(' || c == ')');
        match token {
            "SH" => return Ok(Transition::Shift),
            "RE" => return Ok(Transition::Reduce),
            "SW" => return Ok(Transition::Swap),
            _ => {}
        }
        if let Some(k) = token.strip_prefix("SH#") {
            return parse_count(k).map(Transition::ShiftK).ok_or_else(bad);
        }
        if let Some(k) = token.strip_prefix("SW#") {
            return parse_count(k)
                .filter(|&k| k >= 1)
                .map(Transition::SwapK)
                .ok_or_else(bad);
        }
        if let Some(label) = token.strip_prefix("NT-") {
            return if valid_label(label) {
                Ok(Transition::NonTerminal(label.to_string()))
            } else {
                Err(bad())
            };
        }
        if let Some(rest) = token.strip_prefix("RE#") {
            let (k, label) = rest.split_once('-').ok_or_else(bad)?;
            let k = parse_count(k).filter(|&k| k >= 1).ok_or_else(bad)?;
            return if valid_label(label) {
                Ok(Transition::ReduceK(k, label.to_string()))
            } else {
                Err(bad())
            };
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseSystem {
    TopDown,
    BottomUp,
    InOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscMechanism {
    None,
    Swap,
    SwapK,
    ShiftK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemSpec {
    pub base: BaseSystem,
    pub disc: DiscMechanism,
}

impl SystemSpec {
    pub const fn new(base: BaseSystem, disc: DiscMechanism) -> Self {
        SystemSpec { base, disc }
    }

    pub const ALL_BASES: [BaseSystem; 3] = [BaseSystem::TopDown, BaseSystem::BottomUp, BaseSystem::InOrder];
    pub const ALL_DISC: [DiscMechanism; 4] = [
        DiscMechanism::None,
        DiscMechanism::Swap,
        DiscMechanism::SwapK,
        DiscMechanism::ShiftK,
    ];

    /// Every base × mechanism combination.
    pub fn all() -> impl Iterator<Item = SystemSpec> {
        Self::ALL_BASES
            .into_iter()
            .flat_map(|b| Self::ALL_DISC.into_iter().map(move |d| SystemSpec::new(b, d)))
    }

    /// Whether the action belongs to this system's action set.
    pub fn permits(&self, t: &Transition) -> bool {
        use Transition::*;
        match t {
            Shift => true,
            ShiftK(_) => self.disc == DiscMechanism::ShiftK,
            NonTerminal(_) | Reduce => self.base != BaseSystem::BottomUp,
            ReduceK(..) => self.base == BaseSystem::BottomUp,
            Swap => matches!(self.disc, DiscMechanism::Swap | DiscMechanism::SwapK),
            SwapK(_) => self.disc == DiscMechanism::SwapK,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StackItem {
    Word(usize),
    Subtree(Node),
    /// Marker pushed by NonTerminal; it has no yield until reduced.
    Open(String),
}

impl StackItem {
    pub fn is_complete(&self) -> bool {
        !matches!(self, StackItem::Open(_))
    }

    fn into_node(self) -> Node {
        match self {
            StackItem::Word(p) => Node::Leaf(p),
            StackItem::Subtree(n) => n,
            StackItem::Open(_) => unreachable!("markers are never children"),
        }
    }
}

/// Why an action cannot be applied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("action is not part of the transition system")]
    NotPermitted,
    #[error("buffer is empty")]
    EmptyBuffer,
    #[error("buffer index {k} out of range for buffer of length {len}")]
    BufferIndex { k: usize, len: usize },
    #[error("no open non-terminal on the stack")]
    NoOpenNonTerminal,
    #[error("reduce would build an empty constituent")]
    EmptyConstituent,
    #[error("no completed first child at the top of the stack")]
    FirstChildMissing,
    #[error("stack has {have} items, {needed} needed")]
    StackTooShort { needed: usize, have: usize },
    #[error("an open non-terminal cannot be grouped into a constituent")]
    MarkerInReduce,
    #[error("swap needs a word second from the top and a completed item on top")]
    SwapTarget,
    #[error("count parameter must be at least 1")]
    ZeroCount,
}

/// Stack and buffer of a running derivation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParserState {
    pub stack: Vec<StackItem>,
    pub buffer: VecDeque<usize>,
}

impl ParserState {
    pub fn initial(n_words: usize) -> Self {
        ParserState {
            stack: Vec::new(),
            buffer: (0..n_words).collect(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.buffer.is_empty() && matches!(self.stack.as_slice(), [StackItem::Subtree(_)])
    }

    fn nearest_open(&self) -> Option<usize> {
        self.stack.iter().rposition(|i| !i.is_complete())
    }

    /// All word positions held by the state, in no particular order.
    pub fn positions(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.buffer.iter().copied().collect();
        for item in &self.stack {
            match item {
                StackItem::Word(p) => out.push(*p),
                StackItem::Subtree(n) => out.extend(n.leaves()),
                StackItem::Open(_) => {}
            }
        }
        out
    }

    /// Checks whether `t` can be applied under strict semantics.
    pub fn check(&self, t: &Transition, spec: SystemSpec) -> std::result::Result<(), Violation> {
        if !spec.permits(t) {
            return Err(Violation::NotPermitted);
        }
        let depth = self.stack.len();
        match t {
            Transition::Shift => {
                if self.buffer.is_empty() {
                    return Err(Violation::EmptyBuffer);
                }
            }
            Transition::ShiftK(k) => {
                if self.buffer.is_empty() {
                    return Err(Violation::EmptyBuffer);
                }
                if *k >= self.buffer.len() {
                    return Err(Violation::BufferIndex {
                        k: *k,
                        len: self.buffer.len(),
                    });
                }
            }
            Transition::NonTerminal(_) => match spec.base {
                BaseSystem::InOrder => {
                    if !self.stack.last().is_some_and(StackItem::is_complete) {
                        return Err(Violation::FirstChildMissing);
                    }
                }
                _ => {
                    if self.buffer.is_empty() {
                        return Err(Violation::EmptyBuffer);
                    }
                }
            },
            Transition::Reduce => {
                let open = self.nearest_open().ok_or(Violation::NoOpenNonTerminal)?;
                match spec.base {
                    BaseSystem::InOrder => {
                        if open == 0 || !self.stack[open - 1].is_complete() {
                            return Err(Violation::FirstChildMissing);
                        }
                    }
                    _ => {
                        if open + 1 == depth {
                            return Err(Violation::EmptyConstituent);
                        }
                    }
                }
            }
            Transition::ReduceK(k, _) => {
                if *k == 0 {
                    return Err(Violation::ZeroCount);
                }
                if *k > depth {
                    return Err(Violation::StackTooShort { needed: *k, have: depth });
                }
                if self.stack[depth - k..].iter().any(|i| !i.is_complete()) {
                    return Err(Violation::MarkerInReduce);
                }
            }
            Transition::Swap => self.check_swap()?,
            Transition::SwapK(k) => {
                if *k == 0 {
                    return Err(Violation::ZeroCount);
                }
                // k consecutive swaps each remove the item under the top
                if depth < k + 1 {
                    return Err(Violation::StackTooShort {
                        needed: k + 1,
                        have: depth,
                    });
                }
                if !self.stack[depth - 1].is_complete()
                    || !self.stack[depth - 1 - k..depth - 1]
                        .iter()
                        .all(|i| matches!(i, StackItem::Word(_)))
                {
                    return Err(Violation::SwapTarget);
                }
            }
        }
        Ok(())
    }

    fn check_swap(&self) -> std::result::Result<(), Violation> {
        let depth = self.stack.len();
        if depth < 2 {
            return Err(Violation::StackTooShort { needed: 2, have: depth });
        }
        if !self.stack[depth - 1].is_complete() || !matches!(self.stack[depth - 2], StackItem::Word(_)) {
            return Err(Violation::SwapTarget);
        }
        Ok(())
    }

    pub fn is_legal(&self, t: &Transition, spec: SystemSpec) -> bool {
        self.check(t, spec).is_ok()
    }

    /// Returns the successor state, leaving `self` untouched.
    pub fn apply(&self, t: &Transition, spec: SystemSpec) -> std::result::Result<ParserState, Violation> {
        let mut next = self.clone();
        next.step(t, spec)?;
        Ok(next)
    }

    /// In-place form of [`ParserState::apply`]. On error the state is unchanged.
    pub fn step(&mut self, t: &Transition, spec: SystemSpec) -> std::result::Result<(), Violation> {
        self.check(t, spec)?;
        self.step_unchecked(t, spec.base);
        Ok(())
    }

    fn step_unchecked(&mut self, t: &Transition, base: BaseSystem) {
        match t {
            Transition::Shift => self.shift_at(0),
            Transition::ShiftK(k) => self.shift_at(*k),
            Transition::NonTerminal(x) => self.stack.push(StackItem::Open(x.clone())),
            Transition::Reduce => {
                let open = self.nearest_open().expect("checked");
                let above: Vec<StackItem> = self.stack.drain(open + 1..).collect();
                let Some(StackItem::Open(label)) = self.stack.pop() else {
                    unreachable!("checked")
                };
                let mut children = Vec::with_capacity(above.len() + 1);
                if base == BaseSystem::InOrder {
                    children.push(self.stack.pop().expect("checked").into_node());
                }
                children.extend(above.into_iter().map(StackItem::into_node));
                self.stack.push(StackItem::Subtree(Node::Internal { label, children }));
            }
            Transition::ReduceK(k, x) => {
                let at = self.stack.len() - k;
                let children = self.stack.drain(at..).map(StackItem::into_node).collect();
                self.stack.push(StackItem::Subtree(Node::internal(x.clone(), children)));
            }
            Transition::Swap => self.swap_once(),
            Transition::SwapK(k) => (0..*k).for_each(|_| self.swap_once()),
        }
    }

    fn shift_at(&mut self, k: usize) {
        let p = self.buffer.remove(k).expect("checked");
        self.stack.push(StackItem::Word(p));
    }

    fn swap_once(&mut self) {
        let at = self.stack.len() - 2;
        let StackItem::Word(p) = self.stack.remove(at) else {
            unreachable!("checked")
        };
        self.buffer.push_front(p);
    }

    /// Applies `t` if legal; otherwise applies the local fix for ill-formed
    /// model output, or does nothing.
    pub fn step_repair(&mut self, t: &Transition, spec: SystemSpec) {
        if self.step(t, spec).is_ok() {
            return;
        }
        match t {
            Transition::ShiftK(k) if spec.permits(t) && !self.buffer.is_empty() && *k >= self.buffer.len() => {
                self.shift_at(self.buffer.len() - 1)
            }
            Transition::NonTerminal(x) if spec.permits(t) && spec.base == BaseSystem::InOrder => {
                self.stack.push(StackItem::Open(x.clone()))
            }
            _ => {}
        }
    }

    /// End-of-sequence completion: shifts what is left in the buffer, closes
    /// open markers innermost first, and groups leftovers under a root.
    fn finish_repair(mut self, base: BaseSystem) -> Node {
        while let Some(p) = self.buffer.pop_front() {
            self.stack.push(StackItem::Word(p));
        }
        while let Some(open) = self.nearest_open() {
            let above: Vec<StackItem> = self.stack.drain(open + 1..).collect();
            let Some(StackItem::Open(label)) = self.stack.pop() else {
                unreachable!()
            };
            let mut children = Vec::with_capacity(above.len() + 1);
            if base == BaseSystem::InOrder && self.stack.last().is_some_and(StackItem::is_complete) {
                children.push(self.stack.pop().unwrap().into_node());
            }
            children.extend(above.into_iter().map(StackItem::into_node));
            if !children.is_empty() {
                self.stack.push(StackItem::Subtree(Node::Internal { label, children }));
            }
        }
        match self.stack.as_slice() {
            [StackItem::Subtree(_)] => self.stack.pop().unwrap().into_node(),
            _ => Node::internal(ROOT_LABEL, self.stack.into_iter().map(StackItem::into_node).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Strict,
    Repair,
}

/// Runs a transition sequence over a sentence and returns the tree it builds.
///
/// Strict mode fails on the first illegal action or a non-terminal final
/// state. Repair mode always succeeds.
pub fn execute(sentence: &Sentence, ts: &[Transition], spec: SystemSpec, mode: ExecMode) -> Result<ConstituentTree> {
    let mut state = ParserState::initial(sentence.len());
    match mode {
        ExecMode::Strict => {
            for (step, t) in ts.iter().enumerate() {
                state.step(t, spec).map_err(|violation| Error::IllegalTransition {
                    step,
                    transition: t.clone(),
                    violation,
                })?;
            }
            if !state.is_terminal() {
                return Err(Error::NonTerminalState {
                    stack_len: state.stack.len(),
                    buffer_len: state.buffer.len(),
                });
            }
            let root = state.stack.pop().unwrap().into_node();
            ConstituentTree::new(sentence.clone(), root)
        }
        ExecMode::Repair => {
            for t in ts {
                state.step_repair(t, spec);
            }
            let root = state.finish_repair(spec.base);
            Ok(ConstituentTree::new(sentence.clone(), root).expect("repair preserves every position"))
        }
    }
}
