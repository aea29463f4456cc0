//! Error type shared by every module of the crate.

use std::fmt;

/// A syntax error in one of the textual input formats.
///
/// `offset` is a character offset into the whole input; `line` is 1-based
/// and only set for line-oriented formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, line: None, message: message.into() }
    }

    pub fn at_line(line: usize, offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, line: Some(line), message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, offset {}: {}", self.offset, self.message),
            None => write!(f, "offset {}: {}", self.offset, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("the empty query has no classification")]
    EmptyQuery,

    #[error("instance is not consistent")]
    Inconsistent,

    #[error("instance too large for enumeration: {needed} repairs exceed the cap of {cap}")]
    RepairCap { needed: u128, cap: u64 },

    #[error("search exceeded the cap of {cap} nodes")]
    SearchCap { cap: u64 },

    #[error("method {method} does not apply to a query in class {class}")]
    Inapplicable { method: String, class: String },

    #[error("{0}")]
    Precondition(String),

    #[error("no direct NL procedure for this query: {0}")]
    NlNotCovered(String),

    #[error("reserved name {0} occurs in the input")]
    ReservedName(String),

    #[error("unbound variable x{0}")]
    UnboundVariable(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
