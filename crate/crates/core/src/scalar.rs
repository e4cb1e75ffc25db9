//! Scalar arithmetic contract shared by the exact and the floating backend.
//!
//! Everything downstream (states, the evolution operator, slice matrices, the
//! trajectory engine) is generic over [`Scalar`] so that one code path can be
//! exercised twice: in exact rational arithmetic, where the algebraic
//! identities of the dynamics must hold bit-for-bit, and in `f64`, where they
//! hold up to documented tolerances. The backend is chosen at the call site by
//! instantiating the generic; nothing switches at runtime.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Field operations plus the conversions the verification harness needs.
///
/// Implementors are exact fields ([`BigRational`]) or IEEE doubles (`f64`).
/// All arithmetic is by value; `BigRational` values are cloned freely, which
/// is acceptable at the problem sizes this crate targets (4-vectors, 2x2 and
/// 4x4 matrices, orbits of a few thousand steps).
pub trait Scalar: Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static {
    /// True when arithmetic never rounds. Exact backends use zero membership
    /// tolerances and equality checks where the floating backend uses
    /// epsilon comparisons.
    const EXACT: bool;

    /// Backend name used in diagnostics ("rational" / "floating").
    const BACKEND: &'static str;

    /// The exact quotient `numer / denom`.
    ///
    /// `denom` must be nonzero.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Embeds a finite double. Exact backends convert the binary value
    /// losslessly (e.g. `0.1f64` becomes `3602879701896397 / 2^55`, not
    /// `1/10`); use [`Scalar::parse`] when decimal semantics are wanted.
    fn from_f64(value: f64) -> Self;

    /// Nearest double. Lossy for the exact backend.
    fn to_f64(&self) -> f64;

    /// Parses `"p/q"` fractions and plain decimal literals (`"0.25"`, `"-3"`).
    /// The floating backend additionally accepts anything `f64::from_str`
    /// does; the exact backend rejects exponent notation.
    fn parse(text: &str) -> Result<Self, ScalarParseError>;

    /// `self` raised to a nonnegative integer power, by repeated squaring in
    /// both backends so that cross-backend comparisons see the same
    /// evaluation order.
    fn powi(&self, exp: u32) -> Self {
        let mut base = self.clone();
        let mut exp = exp;
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            exp >>= 1;
        }
        acc
    }
}

/// Failure to read a scalar literal.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("empty scalar literal")]
    Empty,
    #[error("invalid scalar literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("non-finite value `{0}` is not a valid scalar")]
    NonFinite(String),
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "floating";

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "from_ratio: zero denominator");
        numer as f64 / denom as f64
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse(text: &str) -> Result<Self, ScalarParseError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        let value = if let Some((numer, denom)) = text.split_once('/') {
            let n = f64::from_str(numer.trim())
                .map_err(|_| ScalarParseError::Invalid(text.to_owned()))?;
            let d = f64::from_str(denom.trim())
                .map_err(|_| ScalarParseError::Invalid(text.to_owned()))?;
            if d == 0.0 {
                return Err(ScalarParseError::ZeroDenominator(text.to_owned()));
            }
            n / d
        } else {
            f64::from_str(text).map_err(|_| ScalarParseError::Invalid(text.to_owned()))?
        };
        if !value.is_finite() {
            return Err(ScalarParseError::NonFinite(text.to_owned()));
        }
        Ok(value)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "rational";

    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "from_ratio: zero denominator");
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).expect("finite f64 converts to a rational exactly")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(text: &str) -> Result<Self, ScalarParseError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        if let Some((numer, denom)) = text.split_once('/') {
            let n = BigInt::from_str(numer.trim())
                .map_err(|_| ScalarParseError::Invalid(text.to_owned()))?;
            let d = BigInt::from_str(denom.trim())
                .map_err(|_| ScalarParseError::Invalid(text.to_owned()))?;
            if d.is_zero() {
                return Err(ScalarParseError::ZeroDenominator(text.to_owned()));
            }
            return Ok(BigRational::new(n, d));
        }
        parse_decimal_rational(text).ok_or_else(|| ScalarParseError::Invalid(text.to_owned()))
    }
}

/// `[+-]?digits[.digits]` to an exact rational; exponent forms are rejected.
fn parse_decimal_rational(text: &str) -> Option<BigRational> {
    let (sign, digits) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text.strip_prefix('+').unwrap_or(text)),
    };
    if digits.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let mut numer = if int_part.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(int_part).ok()?
    };
    let mut denom = BigInt::one();
    for c in frac_part.chars() {
        numer = numer * 10 + (c as u8 - b'0');
        denom *= 10;
    }
    Some(BigRational::new(BigInt::from(sign) * numer, denom))
}

/// Comparison and membership tolerances for one backend.
///
/// `eps_membership` bounds how far a value may sit outside a closed set
/// (simplex membership, slice membership, fixed-point residuals) before it is
/// rejected; the exact backend uses zero. `eps_convergence` is the default
/// successive-difference threshold for orbit convergence and stays positive in
/// both backends, since exact orbits only reach their limit asymptotically.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerance<S: Scalar> {
    pub eps_membership: S,
    pub eps_convergence: S,
}

impl<S: Scalar> Tolerance<S> {
    /// Default membership tolerance of the floating backend.
    pub const DEFAULT_MEMBERSHIP: f64 = 1e-12;
    /// Default convergence threshold, shared by both backends.
    pub const DEFAULT_CONVERGENCE: f64 = 1e-10;

    pub fn new(eps_membership: S, eps_convergence: S) -> Self {
        Self {
            eps_membership,
            eps_convergence,
        }
    }
}

impl<S: Scalar> Default for Tolerance<S> {
    fn default() -> Self {
        let eps_membership = if S::EXACT {
            S::zero()
        } else {
            S::from_f64(Self::DEFAULT_MEMBERSHIP)
        };
        Self {
            eps_membership,
            eps_convergence: S::from_f64(Self::DEFAULT_CONVERGENCE),
        }
    }
}

/// `|lhs - rhs| <= eps`. With `eps = 0` this is plain equality, which is the
/// intended use in the exact backend.
pub fn approx_eq<S: Scalar>(lhs: &S, rhs: &S, eps: &S) -> bool {
    (lhs.clone() - rhs.clone()).abs() <= *eps
}
