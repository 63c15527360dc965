//! Static oracles: gold tree to transition sequence.
//!
//! Every oracle walks the tree in its stored child order, which for trees with
//! children sorted by smallest position is the canonical projection order. The
//! walk yields abstract shift/open/close events; the base system decides where
//! NonTerminal and Reduce go, and the discontinuity mechanism decides how each
//! shift of a word that is not at the buffer front is realized.

use crate::error::{Error, Result};
use crate::transition::{BaseSystem, DiscMechanism, SystemSpec, Transition};
use crate::treebank::{ConstituentTree, Node};

struct Emitter {
    disc: DiscMechanism,
    /// Remaining buffer, always in surface order under these oracles.
    buffer: Vec<usize>,
    out: Vec<Transition>,
}

impl Emitter {
    fn shift(&mut self, p: usize) -> Result<()> {
        let j = self
            .buffer
            .iter()
            .position(|&b| b == p)
            .expect("every leaf is shifted exactly once");
        self.buffer.remove(j);
        match self.disc {
            DiscMechanism::None => {
                if j != 0 {
                    return Err(Error::NotContinuous);
                }
                self.out.push(Transition::Shift);
            }
            DiscMechanism::ShiftK => self.out.push(Transition::ShiftK(j)),
            // shift the j intervening words, then the target, then hand the
            // intervening words back to the buffer front
            DiscMechanism::Swap | DiscMechanism::SwapK => {
                self.out.extend(std::iter::repeat_n(Transition::Shift, j + 1));
                self.out.extend(std::iter::repeat_n(Transition::Swap, j));
            }
        }
        Ok(())
    }

    fn visit(&mut self, node: &Node, base: BaseSystem) -> Result<()> {
        match node {
            Node::Leaf(p) => self.shift(*p),
            Node::Internal { label, children } => {
                match base {
                    BaseSystem::TopDown => {
                        self.out.push(Transition::NonTerminal(label.clone()));
                        for c in children {
                            self.visit(c, base)?;
                        }
                        self.out.push(Transition::Reduce);
                    }
                    BaseSystem::BottomUp => {
                        for c in children {
                            self.visit(c, base)?;
                        }
                        self.out.push(Transition::ReduceK(children.len(), label.clone()));
                    }
                    BaseSystem::InOrder => {
                        self.visit(&children[0], base)?;
                        self.out.push(Transition::NonTerminal(label.clone()));
                        for c in &children[1..] {
                            self.visit(c, base)?;
                        }
                        self.out.push(Transition::Reduce);
                    }
                }
                Ok(())
            }
        }
    }
}

/// Transition sequence that rebuilds `tree` under `spec`.
///
/// Fails with [`Error::NotContinuous`] when `spec` has no discontinuity
/// mechanism and the tree's leaves are not in surface order.
pub fn oracle(tree: &ConstituentTree, spec: SystemSpec) -> Result<Vec<Transition>> {
    let mut e = Emitter {
        disc: spec.disc,
        buffer: (0..tree.n_words()).collect(),
        out: Vec::new(),
    };
    e.visit(tree.root(), spec.base)?;
    Ok(match spec.disc {
        DiscMechanism::SwapK => compress_swaps(&e.out),
        _ => e.out,
    })
}

pub fn oracle_continuous(tree: &ConstituentTree, base: BaseSystem) -> Result<Vec<Transition>> {
    oracle(tree, SystemSpec::new(base, DiscMechanism::None))
}

pub fn oracle_swap(tree: &ConstituentTree, base: BaseSystem) -> Result<Vec<Transition>> {
    oracle(tree, SystemSpec::new(base, DiscMechanism::Swap))
}

pub fn oracle_swapk(tree: &ConstituentTree, base: BaseSystem) -> Result<Vec<Transition>> {
    oracle(tree, SystemSpec::new(base, DiscMechanism::SwapK))
}

pub fn oracle_shiftk(tree: &ConstituentTree, base: BaseSystem) -> Result<Vec<Transition>> {
    oracle(tree, SystemSpec::new(base, DiscMechanism::ShiftK))
}

/// Replaces every maximal run of `r` plain Swaps with `SwapK(r)`.
pub fn compress_swaps(ts: &[Transition]) -> Vec<Transition> {
    let mut out = Vec::with_capacity(ts.len());
    let mut run = 0;
    for t in ts {
        if *t == Transition::Swap {
            run += 1;
            continue;
        }
        if run > 0 {
            out.push(Transition::SwapK(run));
            run = 0;
        }
        out.push(t.clone());
    }
    if run > 0 {
        out.push(Transition::SwapK(run));
    }
    out
}
