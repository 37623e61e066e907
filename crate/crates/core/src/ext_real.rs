//! Extended reals `[-inf, +inf]` with the integration convention of the
//! toolkit: `(+inf) + (-inf)` is never formed.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A real number or one of the two infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<F> {
    Finite(F),
    PlusInf,
    MinusInf,
}

impl<F: Scalar> ExtReal<F> {
    pub const fn finite(v: F) -> Self {
        ExtReal::Finite(v)
    }

    /// Maps IEEE infinities to the matching token. NaN is a caller bug.
    pub fn from_float(v: F) -> Self {
        debug_assert!(!v.is_nan(), "NaN cannot be represented as an extended real");
        if v == F::infinity() {
            ExtReal::PlusInf
        } else if v == F::neg_infinity() {
            ExtReal::MinusInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn zero() -> Self {
        ExtReal::Finite(F::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_plus_inf(&self) -> bool {
        matches!(self, ExtReal::PlusInf)
    }

    pub fn is_minus_inf(&self) -> bool {
        matches!(self, ExtReal::MinusInf)
    }

    pub fn as_finite(&self) -> Option<F> {
        match *self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// IEEE view; infinities become IEEE infinities.
    pub fn to_float(self) -> F {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PlusInf => F::infinity(),
            ExtReal::MinusInf => F::neg_infinity(),
        }
    }

    /// Sum with the `(+inf) + (-inf)` case rejected.
    pub fn try_add(self, other: Self) -> Result<Self> {
        use ExtReal::*;
        match (self, other) {
            (PlusInf, MinusInf) | (MinusInf, PlusInf) => Err(Error::UndefinedSum),
            (PlusInf, _) | (_, PlusInf) => Ok(PlusInf),
            (MinusInf, _) | (_, MinusInf) => Ok(MinusInf),
            (Finite(a), Finite(b)) => Ok(ExtReal::from_float(a + b)),
        }
    }

    /// Adds a finite amount; never fails.
    pub fn add_finite(self, v: F) -> Self {
        match self {
            ExtReal::Finite(a) => ExtReal::from_float(a + v),
            inf => inf,
        }
    }

    /// Multiplication by a strictly positive real.
    pub fn scale(self, factor: F) -> Self {
        debug_assert!(factor > F::zero());
        match self {
            ExtReal::Finite(a) => ExtReal::from_float(a * factor),
            inf => inf,
        }
    }

    /// `max{self, 0}`.
    pub fn positive_part(self) -> Self {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a.max(F::zero())),
            ExtReal::PlusInf => ExtReal::PlusInf,
            ExtReal::MinusInf => ExtReal::zero(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Signed distance `self - other` where equal infinities count as a
    /// zero difference. Used for gap reporting.
    pub fn gap_to(self, other: Self) -> Self {
        use ExtReal::*;
        match (self, other) {
            (PlusInf, PlusInf) | (MinusInf, MinusInf) => ExtReal::zero(),
            (PlusInf, _) | (_, MinusInf) => PlusInf,
            (MinusInf, _) | (_, PlusInf) => MinusInf,
            (Finite(a), Finite(b)) => ExtReal::from_float(a - b),
        }
    }

    /// Conversion between precisions.
    pub fn cast<G: Scalar>(self) -> ExtReal<G> {
        match self {
            ExtReal::Finite(v) => ExtReal::from_float(G::lit(v.as_f64())),
            ExtReal::PlusInf => ExtReal::PlusInf,
            ExtReal::MinusInf => ExtReal::MinusInf,
        }
    }
}

impl<F: Scalar> From<F> for ExtReal<F> {
    fn from(v: F) -> Self {
        ExtReal::from_float(v)
    }
}

impl<F: Scalar> Neg for ExtReal<F> {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(-v),
            ExtReal::PlusInf => ExtReal::MinusInf,
            ExtReal::MinusInf => ExtReal::PlusInf,
        }
    }
}

impl<F: Scalar> PartialOrd for ExtReal<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (PlusInf, PlusInf) | (MinusInf, MinusInf) => Some(Ordering::Equal),
            (PlusInf, _) | (_, MinusInf) => Some(Ordering::Greater),
            (MinusInf, _) | (_, PlusInf) => Some(Ordering::Less),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<F: Scalar> fmt::Display for ExtReal<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PlusInf => f.write_str("inf"),
            ExtReal::MinusInf => f.write_str("-inf"),
        }
    }
}

// Finite values serialize as JSON numbers (negative zero as 0), infinities as "inf" / "-inf".
impl<F: Scalar> Serialize for ExtReal<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(v.as_f64() + 0.0),
            ExtReal::PlusInf => serializer.serialize_str("inf"),
            ExtReal::MinusInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de, F: Scalar> Deserialize<'de> for ExtReal<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor<F>(std::marker::PhantomData<F>);

        impl<F: Scalar> Visitor<'_> for ExtVisitor<F> {
            type Value = ExtReal<F>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"+inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                if v.is_nan() {
                    return Err(E::custom("NaN is not an extended real"));
                }
                Ok(ExtReal::from_float(F::lit(v)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::PlusInf),
                    "-inf" => Ok(ExtReal::MinusInf),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ExtVisitor(std::marker::PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type X = ExtReal<f64>;

    #[test]
    fn plus_minus_infinity_sum_is_rejected() {
        assert_eq!(X::PlusInf.try_add(X::MinusInf), Err(Error::UndefinedSum));
        assert_eq!(X::finite(3.0).try_add(X::PlusInf), Ok(X::PlusInf));
        assert_eq!(X::finite(3.0).try_add(X::MinusInf), Ok(X::MinusInf));
        assert_eq!(X::finite(1.5).try_add(X::finite(2.0)), Ok(X::finite(3.5)));
    }

    #[test]
    fn order_places_infinities_at_the_ends() {
        assert!(X::MinusInf < X::finite(-1e300));
        assert!(X::finite(1e300) < X::PlusInf);
        assert!(X::PlusInf >= X::PlusInf);
        assert_eq!(X::finite(2.0).min(X::MinusInf), X::MinusInf);
    }

    #[test]
    fn gap_treats_equal_infinities_as_zero() {
        assert_eq!(X::PlusInf.gap_to(X::PlusInf), X::zero());
        assert_eq!(X::PlusInf.gap_to(X::finite(5.0)), X::PlusInf);
        assert_eq!(X::finite(5.0).gap_to(X::PlusInf), X::MinusInf);
        assert_eq!(X::finite(5.0).gap_to(X::finite(1.0)), X::finite(4.0));
    }

    #[test]
    fn json_round_trip_uses_inf_tokens() {
        let v = vec![X::finite(0.1), X::PlusInf, X::MinusInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.1,"inf","-inf"]"#);
        let back: Vec<X> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<X>("\"nan\"").is_err());
    }
}
