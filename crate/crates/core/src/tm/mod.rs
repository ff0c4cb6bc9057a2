//! Transition modeling: PDDL action bodies over the household domain.

pub mod canon;
pub mod clause;
pub mod dnf;
pub mod domain;
pub mod oracle;
pub mod score;
pub mod sexpr;
pub mod validate;

pub use canon::{action_set_signature, canonical_effect, canonical_precondition, canonicalize_pddl, canonicalize_pddl_text};
pub use clause::{parse_pddl_actions, pretty_print, Clause, Param, PddlActionBody, PddlActionSet};
pub use dnf::{to_dnf, Dnf, Literal};
pub use domain::{virtualhome_domain, DomainSignature};
pub use oracle::{semantic_equiv, OracleError, Universe};
pub use score::{score_tm, TmScore, TmScoreOptions};
pub use validate::validate_pddl;

use crate::violation::{Violation, ViolationKind};

/// Nesting limit for clause normalization.
pub const MAX_DEPTH: usize = 32;
/// Upper bound on disjuncts produced by distribution.
pub const MAX_DISJUNCTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TmError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unbalanced parentheses at line {line}, column {column}")]
    UnbalancedParens { line: usize, column: usize },
    #[error("action `{0}` is defined twice")]
    DuplicateAction(String),
    #[error("clause nesting exceeds {MAX_DEPTH}")]
    DepthExceeded,
    #[error("normal form would exceed {MAX_DISJUNCTS} disjuncts")]
    TooManyDisjuncts,
}

impl TmError {
    pub fn kind(&self) -> ViolationKind {
        match self {
            TmError::Parse { .. } => ViolationKind::ParseError,
            TmError::UnbalancedParens { .. } => ViolationKind::UnbalancedParens,
            TmError::DuplicateAction(_) => ViolationKind::DuplicateAction,
            TmError::DepthExceeded | TmError::TooManyDisjuncts => ViolationKind::DepthExceeded,
        }
    }

    pub fn to_violation(&self) -> Violation {
        Violation::new(self.kind(), self.to_string())
    }
}
