//! Transition-based linearization of constituent trees.
//!
//! Trees (continuous or discontinuous) are turned into transition sequences by
//! static oracles, rendered as token sequences for a sequence-to-sequence
//! model, decoded back (strictly, or with repair for ill-formed model output)
//! and scored with bracket F1 and discontinuous F1.
//!
//! ```
//! use treelin::treebank::{parse_bracketed, BracketFormat};
//! use treelin::lineariz::{delinearize, linearize};
//! use treelin::{BaseSystem, DiscMechanism, ExecMode, LinearizationSpec, SystemSpec};
//!
//! let tree = parse_bracketed("(S (VP 0=What 2=do) 1=I)", BracketFormat::Disc).unwrap();
//! let spec = LinearizationSpec::new(SystemSpec::new(BaseSystem::InOrder, DiscMechanism::ShiftK), false);
//! let tokens = linearize(&tree, spec).unwrap();
//! assert_eq!(tokens.to_string(), "SH#0 NT-VP SH#1 RE NT-S SH#0 RE");
//! assert_eq!(delinearize(&tokens, tree.sentence(), spec, ExecMode::Strict).unwrap(), tree);
//! ```

pub mod error;
pub mod evalsuite;
pub mod lineariz;
pub mod oracle;
pub mod transition;
pub mod treebank;

pub use error::{Error, Result};
pub use evalsuite::{breakdown, brackets, score, BracketMultiset, BreakdownReport, EvalReport};
pub use lineariz::{from_tokens, lossiness_report, to_tokens, build_vocab, LinearizationSpec, TokenSequence, Vocab};
pub use oracle::{compress_swaps, oracle, oracle_continuous, oracle_shiftk, oracle_swap};
pub use transition::{execute, BaseSystem, DiscMechanism, ExecMode, ParserState, SystemSpec, Transition};
pub use treebank::{ConstituentTree, Node, PunctuationPolicy, Sentence, TreebankEntry};
