//! Extended reals `(-∞, +∞]` with saturating arithmetic.
//!
//! Ball and linear penalties, λc-transforms below a critical multiplier and
//! unbounded robust risk values all produce `+∞` as an ordinary outcome, so it
//! is modelled as a value rather than an error.

use std::fmt;
use std::ops::{Add, Mul};

use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `f64::INFINITY` to [`ExtReal::PosInf`]; everything else is finite.
    ///
    /// NaN and `-∞` are not valid extended reals here.
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(!x.is_nan(), "NaN is not an extended real");
        debug_assert!(x != f64::NEG_INFINITY, "-inf is outside (-inf, +inf]");
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::from_f64(rhs)
    }
}

/// Scaling by a nonnegative factor, with the measure-theoretic `0·∞ = 0`.
impl Mul<f64> for ExtReal {
    type Output = ExtReal;

    fn mul(self, rhs: f64) -> ExtReal {
        debug_assert!(rhs >= 0.0, "extended reals are only scaled by nonnegative factors");
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a * rhs),
            ExtReal::PosInf if rhs == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => fmt::Display::fmt(x, f),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

/// Finite values serialize as numbers, `+∞` as the string `"inf"`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInf => serializer.serialize_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturating_addition() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Finite(2.0), ExtReal::Finite(3.0));
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(-4.0) + f64::INFINITY, ExtReal::PosInf);
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::Finite(-1.0) < ExtReal::Finite(0.0));
        assert_eq!(ExtReal::PosInf.min(ExtReal::Finite(3.0)), ExtReal::Finite(3.0));
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::PosInf * 0.0, ExtReal::ZERO);
        assert_eq!(ExtReal::PosInf * 2.0, ExtReal::PosInf);
    }

    #[test]
    fn round_trips_through_f64() {
        assert_eq!(ExtReal::from_f64(f64::INFINITY).to_f64(), f64::INFINITY);
        assert_eq!(ExtReal::from_f64(2.5).finite(), Some(2.5));
    }
}
