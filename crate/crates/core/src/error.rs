use std::fmt;

use crate::words::Word;

/// Byte range `[start, end)` into an expression's source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Failure to parse an nc rational expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub offset: usize,
    /// Tokens that would have been accepted at `offset`.
    pub expected: Vec<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {}", self.message, self.offset)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, thiserror::Error)]
pub enum NcError {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    /// The input lies outside the domain of regularity. `span` locates the
    /// inverse that failed when the function came from a parsed expression.
    #[error("domain error{}: {detail}", span.map(|s| format!(" at {s}")).unwrap_or_default())]
    Domain { span: Option<Span>, detail: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no coefficient stored for word {0}")]
    MissingCoefficient(Word),

    #[error("json error: {0}")]
    Json(String),
}

impl NcError {
    pub fn argument(msg: impl Into<String>) -> Self {
        NcError::Argument(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        NcError::Precondition(msg.into())
    }

    pub fn domain(detail: impl Into<String>) -> Self {
        NcError::Domain { span: None, detail: detail.into() }
    }

    pub fn is_domain(&self) -> bool {
        matches!(self, NcError::Domain { .. })
    }
}

impl From<serde_json::Error> for NcError {
    fn from(e: serde_json::Error) -> Self {
        NcError::Json(e.to_string())
    }
}

pub type Result<T, E = NcError> = std::result::Result<T, E>;
