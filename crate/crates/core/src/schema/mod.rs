//! Parsers, validators and canonicalizers for the JSON task formats.

pub mod action_seq;
pub mod gi;
pub mod sd;

use crate::json::JsonError;
use crate::violation::{Violation, ViolationKind};

/// Options shared by the completion parsers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Disable the fence/prose pre-pass and single-quote relaxation.
    pub strict: bool,
}

impl ParseOptions {
    pub const LENIENT: ParseOptions = ParseOptions { strict: false };
    pub const STRICT: ParseOptions = ParseOptions { strict: true };
}

/// Failure to read a completion into its typed form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("`{key}` should be {expected}")]
    WrongShape { key: String, expected: String },
    #[error("step {step}: arguments must be a list of 0, 2 or 4 strings")]
    BadArgShape { step: usize },
    #[error("program has no actions")]
    EmptyProgram,
    #[error("line {line} mixes `and` and `or`")]
    MixedOperators { line: usize },
    #[error("`{token}` is not a name.id reference")]
    BadRef { token: String },
}

impl SchemaError {
    pub fn kind(&self) -> ViolationKind {
        match self {
            SchemaError::Parse { .. } => ViolationKind::ParseError,
            SchemaError::WrongShape { .. } => ViolationKind::WrongShape,
            SchemaError::BadArgShape { .. } => ViolationKind::BadArgShape,
            SchemaError::EmptyProgram => ViolationKind::EmptyProgram,
            SchemaError::MixedOperators { .. } => ViolationKind::MixedOperators,
            SchemaError::BadRef { .. } => ViolationKind::BadRef,
        }
    }

    pub fn to_violation(&self) -> Violation {
        Violation::new(self.kind(), self.to_string())
    }

    pub(crate) fn shape(key: impl Into<String>, expected: impl Into<String>) -> Self {
        SchemaError::WrongShape {
            key: key.into(),
            expected: expected.into(),
        }
    }
}

impl From<JsonError> for SchemaError {
    fn from(e: JsonError) -> Self {
        SchemaError::Parse {
            line: e.line,
            column: e.column,
            message: e.message,
        }
    }
}
