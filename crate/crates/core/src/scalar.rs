//! The scalar abstraction every numerical routine is written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point field used throughout the crate (`f32` or `f64`).
///
/// Besides the `num_traits` float surface, each implementation pins the
/// solver tolerance that is attainable in its precision.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Absolute tolerance for the bracketed Newton solves behind the
    /// closed-form proximity operators.
    const SOLVER_TOL: f64;

    /// Converts an `f64` literal. Every value used with this helper is
    /// representable (possibly rounded) in both precisions.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Scalar for f64 {
    const SOLVER_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const SOLVER_TOL: f64 = 1e-6;
}

/// `2^exp` in the target precision.
pub(crate) fn pow2<F: Scalar>(exp: i32) -> F {
    F::two().powi(exp)
}

/// Neumaier-compensated sum. Used for every reduction over atoms so that
/// regrouping the terms only perturbs the result at the level of the
/// final rounding.
pub fn compensated_sum<F: Scalar, I: IntoIterator<Item = F>>(terms: I) -> F {
    let mut sum = F::zero();
    let mut comp = F::zero();
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp = comp + ((sum - s) + t);
        } else {
            comp = comp + ((t - s) + sum);
        }
        sum = s;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum::<f64, _>(terms), 2.0);
        assert_eq!(terms.iter().copied().sum::<f64>(), 1.0);
    }

    #[test]
    fn pow2_is_exact() {
        assert_eq!(pow2::<f64>(-3), 0.125);
        assert_eq!(pow2::<f32>(4), 16.0);
    }
}
