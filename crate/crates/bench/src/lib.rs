//! Shared fixtures for the benchmark targets: the reference state and
//! parameter pair in both arithmetic backends.

use num_rational::BigRational;
use twolocus::{GameteState, RecombinationParams, Scalar, Tolerance};

/// Reference initial state (0.4, 0.2, 0.1, 0.3) in the floating backend.
pub fn float_state() -> GameteState<f64> {
    GameteState::parse("0.4,0.2,0.1,0.3", &Tolerance::default()).expect("on the simplex")
}

/// Reference rate pair (1/2, 1/2) in the floating backend.
pub fn float_params() -> RecombinationParams<f64> {
    RecombinationParams::new(0.5, 0.5).expect("in range")
}

/// Reference initial state as exact rationals.
pub fn rational_state() -> GameteState<BigRational> {
    GameteState::parse("2/5,1/5,1/10,3/10", &Tolerance::default()).expect("on the simplex")
}

/// Reference rate pair as exact rationals.
pub fn rational_params() -> RecombinationParams<BigRational> {
    let half = <BigRational as Scalar>::from_ratio(1, 2);
    RecombinationParams::new(half.clone(), half).expect("in range")
}
