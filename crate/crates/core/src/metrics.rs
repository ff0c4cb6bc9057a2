//! Set-based precision / recall / F1 and the failure taxonomy.

use std::collections::BTreeSet;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::exec::{ExecTrace, GoalReport};
use crate::scalar::{ratio_or_zero, Scalar};
use crate::violation::{ErrorClass, Violation};

/// True positive / false positive / false negative counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, fp, fn_ }
    }

    /// Exact set comparison.
    pub fn of_sets<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> Self {
        let tp = pred.intersection(gold).count() as u64;
        Counts {
            tp,
            fp: pred.len() as u64 - tp,
            fn_: gold.len() as u64 - tp,
        }
    }

    pub fn prf<T: Scalar>(&self) -> Prf<T> {
        prf(self.tp, self.fp, self.fn_)
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prf<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

impl<T: Scalar> Prf<T> {
    pub fn to_f64(&self) -> Prf<f64> {
        Prf {
            precision: self.precision.to_f64_lossy(),
            recall: self.recall.to_f64_lossy(),
            f1: self.f1.to_f64_lossy(),
        }
    }
}

/// Precision, recall and their harmonic mean; each is zero when its
/// denominator is zero.
pub fn prf<T: Scalar>(tp: u64, fp: u64, fn_: u64) -> Prf<T> {
    let precision: T = ratio_or_zero(tp, tp + fp);
    let recall: T = ratio_or_zero(tp, tp + fn_);
    let sum = precision.clone() + recall.clone();
    let f1 = if sum.is_zero() {
        T::zero()
    } else {
        let two = T::one() + T::one();
        two * precision.clone() * recall.clone() / sum
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

/// How per-instance counts are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Sum counts over instances, then compute P/R/F1 once.
    #[default]
    Micro,
    /// Compute P/R/F1 per instance, then take the mean.
    Macro,
}

/// Aggregates per-instance counts under `averaging`.
pub fn aggregate<T: Scalar>(counts: &[Counts], averaging: Averaging) -> Prf<T> {
    match averaging {
        Averaging::Micro => {
            let total = counts.iter().copied().fold(Counts::default(), Add::add);
            total.prf()
        }
        Averaging::Macro => {
            if counts.is_empty() {
                return prf(0, 0, 0);
            }
            let n = T::from_count(counts.len() as u64);
            let mut acc = Prf {
                precision: T::zero(),
                recall: T::zero(),
                f1: T::zero(),
            };
            for c in counts {
                let p: Prf<T> = c.prf();
                acc.precision = acc.precision + p.precision;
                acc.recall = acc.recall + p.recall;
                acc.f1 = acc.f1 + p.f1;
            }
            Prf {
                precision: acc.precision / n.clone(),
                recall: acc.recall / n.clone(),
                f1: acc.f1 / n,
            }
        }
    }
}

/// Primary failure class of a failed instance: parse problems first, then
/// hallucinations, then execution failures, then unmet goals.
pub fn classify_error(
    violations: &[Violation],
    trace: Option<&ExecTrace>,
    goals: Option<&GoalReport>,
) -> ErrorClass {
    let has = |class: ErrorClass| violations.iter().any(|v| v.error_class() == class);
    if has(ErrorClass::ParseError) {
        ErrorClass::ParseError
    } else if has(ErrorClass::Hallucination) {
        ErrorClass::Hallucination
    } else if has(ErrorClass::PreconditionViolation) || trace.is_some_and(|t| t.failed_step().is_some()) {
        ErrorClass::PreconditionViolation
    } else if goals.is_some_and(|g| g.esr && !g.tsr) {
        ErrorClass::MissingSteps
    } else {
        ErrorClass::Other
    }
}
