//! Gamete-frequency states on the tetrahedral probability simplex and the
//! recombination parameters that drive them.
//!
//! A state tracks the four two-locus gamete frequencies `(x, y, u, v)`:
//! `x` and `y` carry the first allele at the left locus, `u` and `v` the
//! second; `x` and `u` carry the first allele at the right locus, `y` and `v`
//! the second. The coordinates are nonnegative and sum to one.

use std::fmt;

use thiserror::Error;

use crate::scalar::{Scalar, ScalarParseError, Tolerance};

/// A point of the gamete-frequency simplex.
///
/// Construction goes through [`GameteState::validate`] (or
/// [`GameteState::parse`]), which enforces the simplex constraints up to the
/// membership tolerance and clamps roundoff-sized boundary violations.
#[derive(Clone, Debug, PartialEq)]
pub struct GameteState<S: Scalar> {
    x: S,
    y: S,
    u: S,
    v: S,
}

/// Linkage disequilibrium `D = y*u - x*v` of a state.
///
/// `D` vanishes exactly on the fixed points of the evolution operator and its
/// magnitude never exceeds 1/4 on the simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct DisequilibriumValue<S: Scalar>(S);

impl<S: Scalar> DisequilibriumValue<S> {
    pub(crate) fn new(value: S) -> Self {
        Self(value)
    }

    pub fn value(&self) -> &S {
        &self.0
    }

    pub fn into_inner(self) -> S {
        self.0
    }

    pub fn abs(&self) -> S {
        self.0.abs()
    }
}

impl<S: Scalar> fmt::Display for DisequilibriumValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Recombination rates `(a, b)`, each in `[0, 1]`.
///
/// `a` scales how strongly the first pair of coordinates responds to linkage
/// disequilibrium, `b` the second pair. `a = b = 0` makes the dynamics the
/// identity map.
#[derive(Clone, Debug, PartialEq)]
pub struct RecombinationParams<S: Scalar> {
    a: S,
    b: S,
}

impl<S: Scalar> RecombinationParams<S> {
    pub fn new(a: S, b: S) -> Result<Self, StateError> {
        for (name, value) in [('a', &a), ('b', &b)] {
            if *value < S::zero() || *value > S::one() {
                return Err(StateError::ParamOutOfRange {
                    name,
                    value: value.to_f64(),
                });
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn b(&self) -> &S {
        &self.b
    }

    /// True when both rates vanish and the evolution operator is the
    /// identity, so every state is fixed.
    pub fn is_identity(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// Rejected state or parameter input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("coordinates must sum to 1 (sum deviates by {deviation}, allowed {eps})")]
    NotOnSimplex { deviation: f64, eps: f64 },
    #[error("coordinate {index} lies outside [0, 1] by more than the tolerance (value {value})")]
    CoordinateOutOfRange { index: usize, value: f64 },
    #[error("recombination rate `{name}` must lie in [0, 1] (got {value})")]
    ParamOutOfRange { name: char, value: f64 },
    #[error("a state needs 4 comma-separated coordinates, got {0}")]
    WrongArity(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarParseError),
}

impl<S: Scalar> GameteState<S> {
    /// Checks the simplex constraints and builds the state.
    ///
    /// The coordinate sum must equal 1 within `tol.eps_membership` and every
    /// coordinate must lie in `[0, 1]` within the same tolerance; coordinates
    /// within tolerance of a boundary are clamped onto it. With the exact
    /// backend's zero tolerance this is a strict membership test.
    pub fn validate(x: S, y: S, u: S, v: S, tol: &Tolerance<S>) -> Result<Self, StateError> {
        let eps = &tol.eps_membership;
        let sum = x.clone() + y.clone() + u.clone() + v.clone();
        let deviation = (sum - S::one()).abs();
        if deviation > *eps {
            return Err(StateError::NotOnSimplex {
                deviation: deviation.to_f64(),
                eps: eps.to_f64(),
            });
        }
        let clamp = |value: S, index: usize| -> Result<S, StateError> {
            if value < S::zero() {
                if (S::zero() - value.clone()) > *eps {
                    return Err(StateError::CoordinateOutOfRange {
                        index,
                        value: value.to_f64(),
                    });
                }
                return Ok(S::zero());
            }
            if value > S::one() {
                if (value.clone() - S::one()) > *eps {
                    return Err(StateError::CoordinateOutOfRange {
                        index,
                        value: value.to_f64(),
                    });
                }
                return Ok(S::one());
            }
            Ok(value)
        };
        Ok(Self {
            x: clamp(x, 0)?,
            y: clamp(y, 1)?,
            u: clamp(u, 2)?,
            v: clamp(v, 3)?,
        })
    }

    /// Parses `"x,y,u,v"` where each coordinate is a decimal or a `p/q`
    /// fraction, then validates.
    pub fn parse(text: &str, tol: &Tolerance<S>) -> Result<Self, StateError> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 4 {
            return Err(StateError::WrongArity(parts.len()));
        }
        let mut coords = Vec::with_capacity(4);
        for part in parts {
            coords.push(S::parse(part)?);
        }
        let [x, y, u, v]: [S; 4] = coords.try_into().expect("length checked above");
        Self::validate(x, y, u, v, tol)
    }

    /// Constructs without validation. Callers guarantee membership; the step
    /// operators do so algebraically, up to documented floating drift.
    pub(crate) fn unchecked(x: S, y: S, u: S, v: S) -> Self {
        Self { x, y, u, v }
    }

    pub fn x(&self) -> &S {
        &self.x
    }

    pub fn y(&self) -> &S {
        &self.y
    }

    pub fn u(&self) -> &S {
        &self.u
    }

    pub fn v(&self) -> &S {
        &self.v
    }

    pub fn components(&self) -> [&S; 4] {
        [&self.x, &self.y, &self.u, &self.v]
    }

    pub fn to_array(&self) -> [S; 4] {
        [
            self.x.clone(),
            self.y.clone(),
            self.u.clone(),
            self.v.clone(),
        ]
    }

    /// Linkage disequilibrium `D = y*u - x*v`.
    pub fn linkage_disequilibrium(&self) -> DisequilibriumValue<S> {
        DisequilibriumValue::new(self.y.clone() * self.u.clone() - self.x.clone() * self.v.clone())
    }

    /// Block frequency `x + y`, conserved by the dynamics. Its complement
    /// `u + v` equals `1 - alpha` on the simplex.
    pub fn alpha(&self) -> S {
        self.x.clone() + self.y.clone()
    }

    /// Max-norm distance between two states.
    pub fn max_distance(&self, other: &Self) -> S {
        let mut worst = S::zero();
        for (lhs, rhs) in self.components().into_iter().zip(other.components()) {
            let d = (lhs.clone() - rhs.clone()).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// True exactly on the stationary set of the evolution operator: every
    /// state when `a = b = 0`, otherwise the states with `|D|` within the
    /// membership tolerance of zero.
    pub fn is_fixed_point(&self, params: &RecombinationParams<S>, tol: &Tolerance<S>) -> bool {
        params.is_identity() || self.linkage_disequilibrium().abs() <= tol.eps_membership
    }
}

impl<S: Scalar> fmt::Display for GameteState<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y, self.u, self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn rat(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    fn rstate(x: (i64, i64), y: (i64, i64), u: (i64, i64), v: (i64, i64)) -> GameteState<BigRational> {
        GameteState::validate(
            rat(x.0, x.1),
            rat(y.0, y.1),
            rat(u.0, u.1),
            rat(v.0, v.1),
            &Tolerance::default(),
        )
        .unwrap()
    }

    fn fstate(x: f64, y: f64, u: f64, v: f64) -> GameteState<f64> {
        GameteState::validate(x, y, u, v, &Tolerance::default()).unwrap()
    }

    #[test]
    fn accepts_the_reference_state() {
        let s = fstate(0.4, 0.2, 0.1, 0.3);
        assert_eq!(s.to_array(), [0.4, 0.2, 0.1, 0.3]);
    }

    #[test]
    fn clamps_roundoff_sized_negative_coordinates() {
        let s = GameteState::validate(0.5, 0.5, -1e-15, 1e-15, &Tolerance::default()).unwrap();
        assert_eq!(*s.u(), 0.0);
        assert!(*s.v() >= 0.0);
    }

    #[test]
    fn rejects_bad_sums_and_large_violations() {
        let tol = Tolerance::<f64>::default();
        assert!(matches!(
            GameteState::validate(0.5, 0.5, 0.5, 0.5, &tol),
            Err(StateError::NotOnSimplex { .. })
        ));
        assert!(matches!(
            GameteState::validate(-0.2, 0.5, 0.4, 0.3, &tol),
            Err(StateError::CoordinateOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn exact_backend_rejects_any_deviation() {
        let tol = Tolerance::<BigRational>::default();
        let err = GameteState::validate(
            rat(1, 2),
            rat(1, 2),
            rat(1, 1000000000),
            BigRational::zero(),
            &tol,
        );
        assert!(matches!(err, Err(StateError::NotOnSimplex { .. })));
    }

    #[test]
    fn disequilibrium_of_the_reference_state() {
        // D = y*u - x*v = 0.2*0.1 - 0.4*0.3 = -0.1.
        let s = rstate((2, 5), (1, 5), (1, 10), (3, 10));
        assert_eq!(s.linkage_disequilibrium().into_inner(), rat(-1, 10));
        assert_eq!(s.alpha(), rat(3, 5));
    }

    #[test]
    fn vertices_and_product_states_have_zero_disequilibrium() {
        let tol = Tolerance::<f64>::default();
        let vertex = GameteState::validate(1.0, 0.0, 0.0, 0.0, &tol).unwrap();
        assert_eq!(vertex.linkage_disequilibrium().into_inner(), 0.0);
        let uniform = fstate(0.25, 0.25, 0.25, 0.25);
        assert_eq!(uniform.linkage_disequilibrium().into_inner(), 0.0);
    }

    #[test]
    fn disequilibrium_magnitude_is_bounded_by_one_quarter() {
        // Extremes occur on states like (1/2, 0, 0, 1/2).
        let s = fstate(0.5, 0.0, 0.0, 0.5);
        assert_eq!(s.linkage_disequilibrium().into_inner(), -0.25);
        let t = fstate(0.0, 0.5, 0.5, 0.0);
        assert_eq!(t.linkage_disequilibrium().into_inner(), 0.25);
    }

    #[test]
    fn fixed_point_predicate_matches_the_stationary_set() {
        let tol = Tolerance::<f64>::default();
        let p = RecombinationParams::new(0.5, 0.5).unwrap();
        let moving = fstate(0.4, 0.2, 0.1, 0.3);
        assert!(!moving.is_fixed_point(&p, &tol));
        let stationary = fstate(0.25, 0.25, 0.25, 0.25);
        assert!(stationary.is_fixed_point(&p, &tol));
        // Whole simplex is stationary under the identity parameters.
        let identity = RecombinationParams::new(0.0, 0.0).unwrap();
        assert!(moving.is_fixed_point(&identity, &tol));
        // Boundary face x + y = 0 is stationary for every parameter choice.
        let face = fstate(0.0, 0.0, 0.7, 0.3);
        assert!(face.is_fixed_point(&p, &tol));
    }

    #[test]
    fn params_reject_rates_outside_unit_interval() {
        assert!(RecombinationParams::new(0.5, 0.5).is_ok());
        assert!(matches!(
            RecombinationParams::new(-0.1, 0.5),
            Err(StateError::ParamOutOfRange { name: 'a', .. })
        ));
        assert!(matches!(
            RecombinationParams::new(0.1, 1.5),
            Err(StateError::ParamOutOfRange { name: 'b', .. })
        ));
        assert!(RecombinationParams::new(0.0, 0.0).unwrap().is_identity());
    }

    #[test]
    fn parses_decimals_and_fractions() {
        let tol = Tolerance::<BigRational>::default();
        let s = GameteState::<BigRational>::parse("2/5, 0.2, 1/10, 0.3", &tol).unwrap();
        assert_eq!(s.alpha(), rat(3, 5));
        assert!(matches!(
            GameteState::<BigRational>::parse("0.5, 0.5", &tol),
            Err(StateError::WrongArity(2))
        ));
        let f = GameteState::<f64>::parse("1/4,1/4,1/4,1/4", &Tolerance::default()).unwrap();
        assert_eq!(f.to_array(), [0.25; 4]);
    }

    #[test]
    fn max_distance_is_the_max_norm() {
        let s = fstate(0.4, 0.2, 0.1, 0.3);
        let t = fstate(0.35, 0.25, 0.15, 0.25);
        assert!((s.max_distance(&t) - 0.05).abs() < 1e-15);
        assert_eq!(s.max_distance(&s), 0.0);
    }
}
