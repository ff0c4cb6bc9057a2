//! Self-consistency selection over sampled LLM outputs for embodied
//! planning tasks, with the task parsers, canonicalizers, a symbolic
//! executor and the evaluation metrics.

pub mod canonicalizers;
pub mod engine;
pub mod eval;
pub mod exec;
pub mod instance;
pub mod json;
pub mod library;
pub mod metrics;
pub mod scalar;
pub mod scene;
pub mod sources;
pub mod synth;
pub mod tm;
pub mod schema;
pub mod task;
pub mod violation;
pub mod vocab;

pub use engine::{
    run_ssc, AllInvalidPolicy, Candidate, CanonicalSignature, Canonicalizer, Signature, SscConfig,
    SscError, SscResult, VoteTally,
};
pub use scalar::{Exact, Scalar};
pub use canonicalizers::TaskCanonicalizer;
pub use eval::{EvalConfig, EvalReport, Mode};
pub use instance::Instance;
pub use task::Task;
pub use violation::{ErrorClass, Violation, ViolationKind};

/// Metrics in double precision.
pub type Prf64 = metrics::Prf<f64>;
/// Metrics as exact rationals.
pub type PrfExact = metrics::Prf<Exact>;
pub type GiScore64 = schema::gi::GiScore<f64>;
pub type GiScoreExact = schema::gi::GiScore<Exact>;
