//! Numeric scalar abstraction for metric arithmetic.
//!
//! Scores are computed from integer counts, so any field that can be built
//! from a `u64` and supports exact division works: `f32`, `f64`, or an exact
//! rational such as [`num_rational::Ratio<i128>`].

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Scalar type usable for precision / recall / F1 arithmetic.
pub trait Scalar: Num + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug {
    /// Lossless-where-possible conversion from a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// Nearest `f64`, for reporting.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Ratio<i64> {}
impl Scalar for Ratio<i128> {}

/// Exact rational scalar used when float rounding must be ruled out.
pub type Exact = Ratio<i128>;

/// `num / den`, or zero when `den` is zero.
pub fn ratio_or_zero<T: Scalar>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_denominator_is_zero() {
        assert_eq!(ratio_or_zero::<f64>(3, 0), 0.0);
        assert_eq!(ratio_or_zero::<Exact>(0, 0), Exact::from_integer(0));
    }

    #[test]
    fn exact_ratio() {
        assert_eq!(ratio_or_zero::<Exact>(2, 6), Exact::new(1, 3));
        assert!((ratio_or_zero::<f32>(1, 4) - 0.25).abs() < f32::EPSILON);
    }
}
