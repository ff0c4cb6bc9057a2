use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use ssc_core::metrics::{classify_error, prf};
use ssc_core::{ErrorClass, Prf64, PrfExact, Violation, ViolationKind};

/// P, R and F1 from the count definitions, in arbitrary precision.
fn oracle(tp: u64, fp: u64, fn_: u64) -> [BigRational; 3] {
    let q = |n: u64, d: u64| {
        if d == 0 {
            BigRational::zero()
        } else {
            BigRational::new(BigInt::from(n), BigInt::from(d))
        }
    };
    // 2PR/(P+R) simplifies to 2tp/(2tp+fp+fn) whenever tp > 0.
    let f1 = if tp == 0 { BigRational::zero() } else { q(2 * tp, 2 * tp + fp + fn_) };
    [q(tp, tp + fp), q(tp, tp + fn_), f1]
}

const KINDS: [ViolationKind; 8] = [
    ViolationKind::ParseError,
    ViolationKind::WrongShape,
    ViolationKind::UnknownAction,
    ViolationKind::UnknownObject,
    ViolationKind::PropertyUnsat,
    ViolationKind::InvalidTarget,
    ViolationKind::TypeMismatch,
    ViolationKind::NecessityInconsistent,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn prf_matches_rational_oracle(tp in 0u64..1_000_000, fp in 0u64..1_000_000, fn_ in 0u64..1_000_000) {
        let got: Prf64 = prf(tp, fp, fn_);
        let want = oracle(tp, fp, fn_);
        for (g, w) in [got.precision, got.recall, got.f1].into_iter().zip(&want) {
            prop_assert!((g - w.to_f64().unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_scalar_is_exact(tp in 0u64..10_000, fp in 0u64..10_000, fn_ in 0u64..10_000) {
        let got: PrfExact = prf(tp, fp, fn_);
        let want = oracle(tp, fp, fn_);
        for (g, w) in [got.precision, got.recall, got.f1].into_iter().zip(&want) {
            let g = BigRational::new(BigInt::from(*g.numer()), BigInt::from(*g.denom()));
            prop_assert_eq!(&g, w);
        }
    }

    /// Exactly one class per failure, chosen by a fixed precedence.
    #[test]
    fn error_classes_follow_precedence(kinds in prop::collection::vec(0usize..KINDS.len(), 0..5)) {
        let vs: Vec<Violation> = kinds.iter().map(|&k| Violation::new(KINDS[k], "x")).collect();
        let class = classify_error(&vs, None, None);
        prop_assert!(ErrorClass::ALL.contains(&class));
        let has = |c: ErrorClass| vs.iter().any(|v| v.kind.error_class() == c);
        let want = [ErrorClass::ParseError, ErrorClass::Hallucination, ErrorClass::PreconditionViolation]
            .into_iter()
            .find(|&c| has(c))
            .unwrap_or(ErrorClass::Other);
        prop_assert_eq!(class, want);
    }
}

#[test]
fn one_of_each_is_a_half() {
    let p: Prf64 = prf(1, 1, 1);
    assert_eq!((p.precision, p.recall, p.f1), (0.5, 0.5, 0.5));
}
