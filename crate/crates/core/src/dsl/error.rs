use std::fmt;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{pos}: syntax error: found {found}, expected {}", expected.join(" or "))]
    Syntax { pos: Pos, found: String, expected: Vec<String> },

    #[error("{pos}: undeclared identifier `{name}` ({context})")]
    Undeclared { pos: Pos, name: String, context: String },

    #[error("{pos}: cyclic definition: {}", cycle.join(" -> "))]
    Cycle { pos: Pos, cycle: Vec<String> },

    #[error("{pos}: probability out of range: {detail}")]
    ProbabilityRange { pos: Pos, detail: String },

    #[error("{pos}: duplicate declaration of `{name}`")]
    Duplicate { pos: Pos, name: String },

    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
}

impl DslError {
    pub(crate) fn syntax(pos: Pos, found: String, expected: &[&str]) -> Self {
        DslError::Syntax {
            pos,
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. }
            | DslError::Undeclared { pos, .. }
            | DslError::Cycle { pos, .. }
            | DslError::ProbabilityRange { pos, .. }
            | DslError::Duplicate { pos, .. }
            | DslError::Invalid { pos, .. } => *pos,
        }
    }
}
