use thiserror::Error;

use crate::transition::{Transition, Violation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("bracket syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("export format error on line {line}: {message}")]
    Export { line: usize, message: String },

    #[error("tree is not in surface order and cannot be written in ptb format")]
    NotPtbWritable,

    #[error("tree is not continuous in its stored leaf order; a discontinuity mechanism is required")]
    NotContinuous,

    #[error("illegal transition {transition} at step {step}: {violation}")]
    IllegalTransition {
        step: usize,
        transition: Transition,
        violation: Violation,
    },

    #[error("sequence ended in a non-terminal state (stack {stack_len}, buffer {buffer_len})")]
    NonTerminalState { stack_len: usize, buffer_len: usize },

    #[error("unknown token {token:?} at position {position}")]
    UnknownToken { position: usize, token: String },

    #[error("word token {token:?} at position {position} is not in the buffer")]
    WordNotInBuffer { position: usize, token: String },

    #[error("corpus file error on line {line}: {message}")]
    Corpus { line: usize, message: String },

    #[error("corpus alignment error: {0}")]
    Alignment(String),
}

impl Error {
    /// True for errors caused by malformed input files rather than by the
    /// content of well-formed input.
    pub fn is_format(&self) -> bool {
        matches!(
            self,
            Error::InvalidSentence(_)
                | Error::InvalidTree(_)
                | Error::Syntax { .. }
                | Error::Export { .. }
                | Error::Corpus { .. }
        )
    }
}
