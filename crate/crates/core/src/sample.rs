//! Seeded sampling helpers for randomized consistency checks: uniform
//! simplex points, parameter draws, and exact fixed-point states, in both
//! floating and rational arithmetic.

use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

use crate::scalar::{Scalar, Tolerance};
use crate::state::{GameteState, RecombinationParams};

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::from_ratio(n, d)
}

/// Uniform draw from the interior of the 3-simplex (Dirichlet(1,1,1,1)),
/// via normalized exponential variates.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> GameteState<f64> {
    loop {
        let mut parts = [0.0_f64; 4];
        let mut sum = 0.0;
        for p in &mut parts {
            // random::<f64>() lies in [0, 1), so the argument of ln stays
            // in (0, 1] and the variate is finite.
            *p = -(1.0 - rng.random::<f64>()).ln();
            sum += *p;
        }
        if sum <= 0.0 {
            continue;
        }
        let [x, y, u, v] = parts.map(|p| p / sum);
        if let Ok(state) = GameteState::validate(x, y, u, v, &Tolerance::default()) {
            return state;
        }
    }
}

/// Uniform simplex draw constrained to `alpha_lo <= x + y <= alpha_hi`,
/// by rejection.
pub fn random_state_in_band<R: Rng + ?Sized>(
    rng: &mut R,
    alpha_lo: f64,
    alpha_hi: f64,
) -> GameteState<f64> {
    loop {
        let s = random_state(rng);
        let alpha = s.alpha();
        if alpha >= alpha_lo && alpha <= alpha_hi {
            return s;
        }
    }
}

/// Exact rational simplex point with positive coordinates: four integer
/// weights in 1..=max_part, each divided by their sum.
pub fn random_rational_state<R: Rng + ?Sized>(
    rng: &mut R,
    max_part: i64,
) -> GameteState<BigRational> {
    let max_part = max_part.max(1);
    let parts: [i64; 4] = core::array::from_fn(|_| rng.random_range(1..=max_part));
    let total: i64 = parts.iter().sum();
    let [x, y, u, v] = parts.map(|p| rational(p, total));
    GameteState::validate(x, y, u, v, &Tolerance::default())
        .expect("integer-weight construction sums to one exactly")
}

/// Uniform parameter pair in the unit square.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R) -> RecombinationParams<f64> {
    RecombinationParams::new(rng.random::<f64>(), rng.random::<f64>())
        .expect("draws lie in [0, 1)")
}

/// Parameter pair on the rational lattice {0, 1/denom, ..., 1}².
pub fn random_rational_params<R: Rng + ?Sized>(
    rng: &mut R,
    denom: i64,
) -> RecombinationParams<BigRational> {
    let denom = denom.max(1);
    let a = rational(rng.random_range(0..=denom), denom);
    let b = rational(rng.random_range(0..=denom), denom);
    RecombinationParams::new(a, b).expect("lattice draws lie in [0, 1]")
}

/// Random point of the fixed-point surface, in product form
/// (alpha*s, alpha*(1-s), (1-alpha)*s, (1-alpha)*(1-s)); its
/// disequilibrium vanishes up to one rounding error per product.
pub fn random_fixed_point<R: Rng + ?Sized>(rng: &mut R) -> GameteState<f64> {
    let alpha = rng.random::<f64>();
    let s = rng.random::<f64>();
    product_state(alpha, s)
}

fn product_state(alpha: f64, s: f64) -> GameteState<f64> {
    GameteState::validate(
        alpha * s,
        alpha * (1.0 - s),
        (1.0 - alpha) * s,
        (1.0 - alpha) * (1.0 - s),
        &Tolerance::default(),
    )
    .expect("product form sums to one up to rounding")
}

/// Exact rational fixed point in product form, with alpha and s drawn from
/// the interior lattice {1/denom, ..., (denom-1)/denom}; its disequilibrium
/// is exactly zero.
pub fn random_rational_fixed_point<R: Rng + ?Sized>(
    rng: &mut R,
    denom: i64,
) -> GameteState<BigRational> {
    let denom = denom.max(2);
    let alpha = rational(rng.random_range(1..denom), denom);
    let s = rational(rng.random_range(1..denom), denom);
    let beta = BigRational::one() - alpha.clone();
    let t = BigRational::one() - s.clone();
    GameteState::validate(
        alpha.clone() * s.clone(),
        alpha * t.clone(),
        beta.clone() * s,
        beta * t,
        &Tolerance::default(),
    )
    .expect("product form sums to one exactly")
}
