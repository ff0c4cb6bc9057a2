//! Schema violations and the error taxonomy they roll up into.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Primary failure class of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorClass {
    ParseError,
    Hallucination,
    MissingSteps,
    PreconditionViolation,
    Other,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 5] = [
        ErrorClass::ParseError,
        ErrorClass::Hallucination,
        ErrorClass::MissingSteps,
        ErrorClass::PreconditionViolation,
        ErrorClass::Other,
    ];

    /// Metric name used in reports.
    pub fn metric_name(self) -> &'static str {
        match self {
            ErrorClass::ParseError => "err_parse",
            ErrorClass::Hallucination => "err_hallucination",
            ErrorClass::MissingSteps => "err_missing_steps",
            ErrorClass::PreconditionViolation => "err_precondition",
            ErrorClass::Other => "err_other",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorClass::ParseError => "PARSE_ERROR",
            ErrorClass::Hallucination => "HALLUCINATION",
            ErrorClass::MissingSteps => "MISSING_STEPS",
            ErrorClass::PreconditionViolation => "PRECONDITION_VIOLATION",
            ErrorClass::Other => "OTHER",
        };
        f.write_str(s)
    }
}

/// What went wrong. Every kind maps to exactly one [`ErrorClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    // Syntax and shape.
    ParseError,
    WrongShape,
    BadArgShape,
    EmptyProgram,
    MixedOperators,
    BadRef,
    UnbalancedParens,
    ArityMismatch,
    OperandCount,
    OperatorPlacement,
    DuplicateAction,
    // Vocabulary and grounding.
    InvalidState,
    InvalidRelation,
    UnknownAction,
    UnknownObject,
    UnknownPredicate,
    UnresolvedId,
    UndeclaredVariable,
    // Static preconditions.
    PropertyUnsat,
    InvalidTarget,
    // Everything else.
    CharacterArgument,
    TypeMismatch,
    NecessityInconsistent,
    DepthExceeded,
}

impl ViolationKind {
    pub fn error_class(self) -> ErrorClass {
        use ViolationKind::*;
        match self {
            ParseError | WrongShape | BadArgShape | EmptyProgram | MixedOperators | BadRef
            | UnbalancedParens | ArityMismatch | OperandCount | OperatorPlacement
            | DuplicateAction => ErrorClass::ParseError,
            InvalidState | InvalidRelation | UnknownAction | UnknownObject | UnknownPredicate
            | UnresolvedId | UndeclaredVariable => ErrorClass::Hallucination,
            PropertyUnsat | InvalidTarget => ErrorClass::PreconditionViolation,
            CharacterArgument | TypeMismatch | NecessityInconsistent | DepthExceeded => {
                ErrorClass::Other
            }
        }
    }
}

/// One schema problem found in a candidate output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }

    pub fn error_class(&self) -> ErrorClass {
        self.kind.error_class()
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// Most severe class among `violations` (parse before hallucination before the rest).
pub fn dominant_class(violations: &[Violation]) -> Option<ErrorClass> {
    violations.iter().map(Violation::error_class).min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_follows_declaration_order() {
        let v = vec![
            Violation::new(ViolationKind::TypeMismatch, "t"),
            Violation::new(ViolationKind::UnknownAction, "FLY"),
            Violation::new(ViolationKind::PropertyUnsat, "p"),
        ];
        assert_eq!(dominant_class(&v), Some(ErrorClass::Hallucination));
        assert_eq!(dominant_class(&[]), None);
    }

    #[test]
    fn classes_serialize_screaming() {
        assert_eq!(
            serde_json::to_string(&ErrorClass::PreconditionViolation).unwrap(),
            "\"PRECONDITION_VIOLATION\""
        );
    }
}
