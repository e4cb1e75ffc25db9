//! Reduction of the dynamics to the invariant slices `x + y = alpha`,
//! `u + v = 1 - alpha`, where one generation acts linearly.
//!
//! On a slice the state is determined by `(x, u)` and one generation is the
//! 2x2 transfer matrix
//!
//! ```text
//! M = [ 1 - a + a*alpha      a*alpha   ]
//!     [ (1 - alpha)*b        1 - b*alpha ]
//! ```
//!
//! with eigenvalues `1` and `lambda2 = 1 - (1 - alpha)*a - alpha*b`. Matrix
//! powers follow in closed form from the two-eigenvalue structure, the power
//! limit is an explicit rank-one projection, and pushing it back to the
//! simplex yields the closed-form orbit limit of any starting state.

use thiserror::Error;

use crate::scalar::{Scalar, Tolerance};
use crate::state::{GameteState, RecombinationParams};

/// Coordinates `(x, u)` of a state inside the slice `x + y = alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceCoords<S: Scalar> {
    pub alpha: S,
    pub x: S,
    pub u: S,
}

/// Errors from slice operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SliceError {
    #[error("coordinate {coord} = {value} lies outside the slice bound {bound}")]
    OutOfSlice {
        coord: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("power limit is degenerate: (1 - alpha)*a + alpha*b = 0")]
    DegenerateLimit,
}

/// Drops a state to its slice coordinates. Infallible: every valid state
/// determines `alpha = x + y` and satisfies the slice bounds.
pub fn project<S: Scalar>(s: &GameteState<S>) -> SliceCoords<S> {
    SliceCoords {
        alpha: s.alpha(),
        x: s.x().clone(),
        u: s.u().clone(),
    }
}

/// Rebuilds the full state `(x, alpha - x, u, 1 - alpha - u)`.
///
/// Fails with [`SliceError::OutOfSlice`] when `x` or `u` leaves
/// `[0, alpha]` x `[0, 1 - alpha]` by more than the membership tolerance;
/// roundoff-sized violations are clamped. The round trip `lift(project(s))`
/// is the identity, exactly so in the rational backend.
pub fn lift<S: Scalar>(
    c: &SliceCoords<S>,
    tol: &Tolerance<S>,
) -> Result<GameteState<S>, SliceError> {
    let eps = &tol.eps_membership;
    let beta = S::one() - c.alpha.clone();
    let clamp = |value: &S, upper: &S, coord: &'static str| -> Result<S, SliceError> {
        if *value < S::zero() {
            if (S::zero() - value.clone()) > *eps {
                return Err(SliceError::OutOfSlice {
                    coord,
                    value: value.to_f64(),
                    bound: 0.0,
                });
            }
            return Ok(S::zero());
        }
        if value > upper {
            if (value.clone() - upper.clone()) > *eps {
                return Err(SliceError::OutOfSlice {
                    coord,
                    value: value.to_f64(),
                    bound: upper.to_f64(),
                });
            }
            return Ok(upper.clone());
        }
        Ok(value.clone())
    };
    let x = clamp(&c.x, &c.alpha, "x")?;
    let u = clamp(&c.u, &beta, "u")?;
    let y = c.alpha.clone() - x.clone();
    let v = beta - u.clone();
    Ok(GameteState::unchecked(x, y, u, v))
}

/// One generation in slice coordinates:
/// `x' = (1 - a + a*alpha)*x + a*alpha*u`,
/// `u' = (1 - alpha)*b*x + (1 - b*alpha)*u`. `alpha` is conserved.
pub fn reduced_step<S: Scalar>(
    c: &SliceCoords<S>,
    params: &RecombinationParams<S>,
) -> SliceCoords<S> {
    let m = transfer_matrix(&c.alpha, params);
    let (x, u) = m.apply(&c.x, &c.u);
    SliceCoords {
        alpha: c.alpha.clone(),
        x,
        u,
    }
}

/// The 2x2 linear action of one generation on a slice.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix<S: Scalar> {
    m: [[S; 2]; 2],
}

impl<S: Scalar> TransferMatrix<S> {
    pub fn from_rows(m: [[S; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        Self {
            m: [
                [S::one(), S::zero()],
                [S::zero(), S::one()],
            ],
        }
    }

    pub fn rows(&self) -> &[[S; 2]; 2] {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.m[i][j]
    }

    pub fn trace(&self) -> S {
        self.m[0][0].clone() + self.m[1][1].clone()
    }

    pub fn det(&self) -> S {
        self.m[0][0].clone() * self.m[1][1].clone()
            - self.m[0][1].clone() * self.m[1][0].clone()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m: [[S; 2]; 2] = [
            [S::zero(), S::zero()],
            [S::zero(), S::zero()],
        ];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[i][0].clone() * other.m[0][j].clone()
                    + self.m[i][1].clone() * other.m[1][j].clone();
            }
        }
        Self { m }
    }

    pub fn apply(&self, x: &S, u: &S) -> (S, S) {
        (
            self.m[0][0].clone() * x.clone() + self.m[0][1].clone() * u.clone(),
            self.m[1][0].clone() * x.clone() + self.m[1][1].clone() * u.clone(),
        )
    }

    /// Max-norm of the entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        let mut worst = S::zero();
        for i in 0..2 {
            for j in 0..2 {
                let d = (self.m[i][j].clone() - other.m[i][j].clone()).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Transfer matrix of the slice at height `alpha`.
pub fn transfer_matrix<S: Scalar>(
    alpha: &S,
    params: &RecombinationParams<S>,
) -> TransferMatrix<S> {
    let a = params.a().clone();
    let b = params.b().clone();
    TransferMatrix {
        m: [
            [
                S::one() - a.clone() + a.clone() * alpha.clone(),
                a * alpha.clone(),
            ],
            [
                (S::one() - alpha.clone()) * b.clone(),
                S::one() - b * alpha.clone(),
            ],
        ],
    }
}

/// The two eigenvalues of a transfer matrix. `lambda1` is always 1;
/// `lambda2 = 1 - (1 - alpha)*a - alpha*b` lies in `(0, 1)` whenever
/// `a + b != 0` and `alpha` is interior, and is the contraction rate of the
/// disequilibrium coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair<S: Scalar> {
    pub lambda1: S,
    pub lambda2: S,
}

pub fn eigenvalues<S: Scalar>(alpha: &S, params: &RecombinationParams<S>) -> EigenPair<S> {
    EigenPair {
        lambda1: S::one(),
        lambda2: lambda2(alpha, params),
    }
}

/// Contracting eigenvalue `1 - (1 - alpha)*a - alpha*b`.
pub fn lambda2<S: Scalar>(alpha: &S, params: &RecombinationParams<S>) -> S {
    S::one()
        - (S::one() - alpha.clone()) * params.a().clone()
        - alpha.clone() * params.b().clone()
}

/// `n`-th power of the transfer matrix in closed form.
///
/// With distinct eigenvalues the power is the two-projector combination
/// `M^n = c_I * I + c_M * M` where `c_I = (lambda2 - lambda2^n) / (lambda2 - 1)`
/// and `c_M = (lambda2^n - 1) / (lambda2 - 1)`. When the eigenvalues coincide
/// (`lambda2 = 1`, which covers `a = b = 0` and the boundary shear cells) the
/// confluent limit `M^n = I + n*(M - I)` applies; for `a = b = 0` that is the
/// identity. Equals `n`-fold repeated multiplication, exactly in the rational
/// backend.
pub fn matrix_power<S: Scalar>(
    alpha: &S,
    params: &RecombinationParams<S>,
    n: u32,
) -> TransferMatrix<S> {
    let m = transfer_matrix(alpha, params);
    let lam2 = lambda2(alpha, params);
    let one = S::one();
    if lam2 == one {
        // Confluent pair: M = I + N with N nilpotent, so M^n = I + n*N.
        let scale = S::from_ratio(i64::from(n), 1);
        let mut rows = TransferMatrix::<S>::identity().m;
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let id = if i == j { S::one() } else { S::zero() };
                *entry = id.clone() + scale.clone() * (m.m[i][j].clone() - id);
            }
        }
        return TransferMatrix { m: rows };
    }
    let lam2_n = lam2.powi(n);
    let denom = lam2.clone() - one.clone();
    let c_i = (lam2 - lam2_n.clone()) / denom.clone();
    let c_m = (lam2_n - one) / denom;
    let mut rows = TransferMatrix::<S>::identity().m;
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let id = if i == j { S::one() } else { S::zero() };
            *entry = c_i.clone() * id + c_m.clone() * m.m[i][j].clone();
        }
    }
    TransferMatrix { m: rows }
}

/// Limit of `M^n` as `n` grows: the rank-one projection
///
/// ```text
/// 1 / ((1 - alpha)*a + alpha*b) * [ alpha*b          alpha*a       ]
///                                 [ (1 - alpha)*b    (1 - alpha)*a ]
/// ```
///
/// whose columns are proportional to the fixed direction `(alpha, 1 - alpha)`.
/// Fails with [`SliceError::DegenerateLimit`] when the normalizer
/// `(1 - alpha)*a + alpha*b` vanishes (identity parameters, or a slice
/// boundary aligned with a zero rate), where the powers do not converge to a
/// rank-one matrix.
pub fn limit_matrix<S: Scalar>(
    alpha: &S,
    params: &RecombinationParams<S>,
) -> Result<TransferMatrix<S>, SliceError> {
    let a = params.a().clone();
    let b = params.b().clone();
    let beta = S::one() - alpha.clone();
    let denom = beta.clone() * a.clone() + alpha.clone() * b.clone();
    if denom.is_zero() {
        return Err(SliceError::DegenerateLimit);
    }
    let m = [
        [
            alpha.clone() * b.clone() / denom.clone(),
            alpha.clone() * a.clone() / denom.clone(),
        ],
        [
            beta.clone() * b / denom.clone(),
            beta * a / denom,
        ],
    ];
    Ok(TransferMatrix { m })
}

/// Closed-form orbit limit of a state.
///
/// Boundary slices (`(x + y)(u + v) = 0` within the membership tolerance) and
/// identity parameters leave the state fixed, so it is its own limit.
/// Otherwise, with `alpha = x + y` and weight
/// `A(x, u) = (b*x + a*u) / ((u + v)*a + (x + y)*b)`, the limit is
///
/// ```text
/// ( A(x, u)*alpha, A(y, v)*alpha, A(x, u)*(1 - alpha), A(y, v)*(1 - alpha) )
/// ```
///
/// Total on the simplex, and idempotent: the limit of the limit is itself.
pub fn predicted_limit<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    tol: &Tolerance<S>,
) -> GameteState<S> {
    let alpha = s.alpha();
    let beta = s.u().clone() + s.v().clone();
    if alpha.clone() * beta.clone() <= tol.eps_membership || params.is_identity() {
        return s.clone();
    }
    let a = params.a().clone();
    let b = params.b().clone();
    let denom = beta.clone() * a.clone() + alpha.clone() * b.clone();
    let weight_xu = (b.clone() * s.x().clone() + a.clone() * s.u().clone()) / denom.clone();
    let weight_yv = (b * s.y().clone() + a * s.v().clone()) / denom;
    GameteState::unchecked(
        weight_xu.clone() * alpha.clone(),
        weight_yv.clone() * alpha,
        weight_xu * beta.clone(),
        weight_yv * beta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    type R = BigRational;

    fn rat(n: i64, d: i64) -> R {
        <R as Scalar>::from_ratio(n, d)
    }

    fn rstate(coords: [(i64, i64); 4]) -> GameteState<R> {
        let [x, y, u, v] = coords;
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

    fn rparams(a: (i64, i64), b: (i64, i64)) -> RecombinationParams<R> {
        RecombinationParams::new(rat(a.0, a.1), rat(b.0, b.1)).unwrap()
    }

    fn fparams(a: f64, b: f64) -> RecombinationParams<f64> {
        RecombinationParams::new(a, b).unwrap()
    }

    #[test]
    fn project_reads_off_slice_coordinates() {
        let c = project(&fstate(0.4, 0.2, 0.1, 0.3));
        assert_eq!(c.alpha, 0.6000000000000001);
        assert_eq!(c.x, 0.4);
        assert_eq!(c.u, 0.1);
    }

    #[test]
    fn lift_inverts_project_exactly_in_rationals() {
        let s = rstate([(2, 5), (1, 5), (1, 10), (3, 10)]);
        let lifted = lift(&project(&s), &Tolerance::default()).unwrap();
        assert_eq!(lifted, s);
    }

    #[test]
    fn lift_rejects_points_outside_the_slice() {
        let tol = Tolerance::<f64>::default();
        let bad = SliceCoords {
            alpha: 0.5,
            x: 0.6,
            u: 0.1,
        };
        assert!(matches!(
            lift(&bad, &tol),
            Err(SliceError::OutOfSlice { coord: "x", .. })
        ));
        let bad_u = SliceCoords {
            alpha: 0.5,
            x: 0.2,
            u: 0.7,
        };
        assert!(matches!(
            lift(&bad_u, &tol),
            Err(SliceError::OutOfSlice { coord: "u", .. })
        ));
    }

    #[test]
    fn reduced_step_matches_the_reference_values() {
        // alpha = 3/5, a = b = 1/2: M = [[4/5, 3/10], [1/5, 7/10]], and
        // (x, u) = (2/5, 1/10) maps to (7/20, 3/20).
        let s = rstate([(2, 5), (1, 5), (1, 10), (3, 10)]);
        let p = rparams((1, 2), (1, 2));
        let c = reduced_step(&project(&s), &p);
        assert_eq!(c.x, rat(7, 20));
        assert_eq!(c.u, rat(3, 20));
        assert_eq!(c.alpha, rat(3, 5));
    }

    #[test]
    fn transfer_matrix_reference_entries() {
        let m = transfer_matrix(&rat(3, 5), &rparams((1, 2), (1, 2)));
        assert_eq!(
            *m.rows(),
            [
                [rat(4, 5), rat(3, 10)],
                [rat(1, 5), rat(7, 10)],
            ]
        );
        // Boundary slice alpha = 0 with full rates: column shear.
        let edge = transfer_matrix(&R::zero(), &rparams((1, 1), (1, 1)));
        assert_eq!(
            *edge.rows(),
            [
                [rat(0, 1), rat(0, 1)],
                [rat(1, 1), rat(1, 1)],
            ]
        );
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant() {
        let alpha = rat(3, 5);
        let p = rparams((1, 2), (1, 2));
        let pair = eigenvalues(&alpha, &p);
        assert_eq!(pair.lambda1, R::one());
        assert_eq!(pair.lambda2, rat(1, 2));
        let m = transfer_matrix(&alpha, &p);
        assert_eq!(m.trace(), pair.lambda1.clone() + pair.lambda2.clone());
        assert_eq!(m.det(), pair.lambda1 * pair.lambda2);
    }

    #[test]
    fn contracting_eigenvalue_stays_inside_unit_interval() {
        // For interior alpha with a + b > 0 the second eigenvalue sits in
        // [0, 1), and it is strictly positive except at the extreme corner
        // a = b = 1, where 1 − (1−α)a − αb collapses to zero exactly.
        for (alpha, a, b, expected) in [
            (rat(1, 10), rat(1, 3), rat(0, 1), rat(7, 10)),
            (rat(9, 10), rat(0, 1), rat(1, 7), rat(61, 70)),
            (rat(1, 2), rat(3, 4), rat(1, 4), rat(1, 2)),
        ] {
            let p = RecombinationParams::new(a, b).unwrap();
            let lam = lambda2(&alpha, &p);
            assert!(lam > R::zero(), "{lam}");
            assert!(lam < R::one(), "{lam}");
            assert_eq!(lam, expected);
        }
        // Full-strength recombination on both loci: the contracting mode
        // vanishes in a single step.
        let p = rparams((1, 1), (1, 1));
        assert_eq!(lambda2(&rat(1, 2), &p), R::zero());
        let pair = eigenvalues(&rat(1, 2), &p);
        assert_eq!(pair.lambda1, R::one());
        assert_eq!(pair.lambda2, R::zero());
    }

    #[test]
    fn matrix_power_squares_correctly() {
        let alpha = rat(3, 5);
        let p = rparams((1, 2), (1, 2));
        let squared = matrix_power(&alpha, &p, 2);
        assert_eq!(
            *squared.rows(),
            [
                [rat(7, 10), rat(9, 20)],
                [rat(3, 10), rat(11, 20)],
            ]
        );
        let direct = transfer_matrix(&alpha, &p);
        assert_eq!(squared, direct.mul(&direct));
    }

    #[test]
    fn matrix_power_handles_identity_and_zero_exponent() {
        let alpha = rat(2, 7);
        let id = rparams((0, 1), (0, 1));
        assert_eq!(matrix_power(&alpha, &id, 17), TransferMatrix::identity());
        let p = rparams((1, 3), (1, 4));
        assert_eq!(matrix_power(&alpha, &p, 0), TransferMatrix::identity());
    }

    #[test]
    fn matrix_power_is_exact_on_the_confluent_shear_cells() {
        // alpha = 0 with a = 0 keeps both eigenvalues at 1 while the matrix
        // is a genuine shear: powers must accumulate the off-diagonal.
        let alpha = R::zero();
        let p = rparams((0, 1), (2, 3));
        let mut repeated = TransferMatrix::identity();
        let m = transfer_matrix(&alpha, &p);
        for n in 0..=6u32 {
            assert_eq!(matrix_power(&alpha, &p, n), repeated, "n = {n}");
            repeated = repeated.mul(&m);
        }
    }

    #[test]
    fn matrix_power_matches_repeated_multiplication() {
        let alpha = rat(2, 7);
        let p = rparams((3, 8), (5, 9));
        let m = transfer_matrix(&alpha, &p);
        let mut repeated = TransferMatrix::identity();
        for n in 0..=25u32 {
            assert_eq!(matrix_power(&alpha, &p, n), repeated, "n = {n}");
            repeated = repeated.mul(&m);
        }
    }

    #[test]
    fn limit_matrix_reference_entries_and_idempotence() {
        let alpha = rat(3, 5);
        let p = rparams((1, 2), (1, 2));
        let limit = limit_matrix(&alpha, &p).unwrap();
        assert_eq!(
            *limit.rows(),
            [
                [rat(3, 5), rat(3, 5)],
                [rat(2, 5), rat(2, 5)],
            ]
        );
        assert_eq!(limit.mul(&limit), limit);
        // Columns proportional to (alpha, 1 - alpha).
        assert_eq!(
            limit.entry(0, 0).clone() * rat(2, 5),
            limit.entry(1, 0).clone() * rat(3, 5)
        );
    }

    #[test]
    fn limit_matrix_rejects_degenerate_normalizers() {
        assert!(matches!(
            limit_matrix(&rat(1, 2), &rparams((0, 1), (0, 1))),
            Err(SliceError::DegenerateLimit)
        ));
        // alpha = 0 with a = 0: normalizer vanishes despite b > 0.
        assert!(matches!(
            limit_matrix(&R::zero(), &rparams((0, 1), (1, 2))),
            Err(SliceError::DegenerateLimit)
        ));
    }

    #[test]
    fn limit_matrix_absorbs_the_transfer_matrix() {
        let alpha = rat(2, 7);
        let p = rparams((3, 8), (5, 9));
        let m = transfer_matrix(&alpha, &p);
        let limit = limit_matrix(&alpha, &p).unwrap();
        assert_eq!(m.mul(&limit), limit);
        assert_eq!(limit.mul(&m), limit);
    }

    #[test]
    fn predicted_limit_reference_state() {
        let s = rstate([(2, 5), (1, 5), (1, 10), (3, 10)]);
        let p = rparams((1, 2), (1, 2));
        let limit = predicted_limit(&s, &p, &Tolerance::default());
        assert_eq!(
            limit.to_array(),
            [rat(3, 10), rat(3, 10), rat(1, 5), rat(1, 5)]
        );
        // Idempotent and disequilibrium-free.
        assert!(limit.linkage_disequilibrium().value().is_zero());
        assert_eq!(predicted_limit(&limit, &p, &Tolerance::default()), limit);
    }

    #[test]
    fn predicted_limit_with_one_sided_rates() {
        // (1/2, 0, 0, 1/2) with (a, b) = (1, 0) drains x into y.
        let s = rstate([(1, 2), (0, 1), (0, 1), (1, 2)]);
        let p = rparams((1, 1), (0, 1));
        let limit = predicted_limit(&s, &p, &Tolerance::default());
        assert_eq!(
            limit.to_array(),
            [rat(0, 1), rat(1, 2), rat(0, 1), rat(1, 2)]
        );
    }

    #[test]
    fn predicted_limit_fixes_boundary_slices_and_identity_params() {
        let tol = Tolerance::default();
        let face = rstate([(0, 1), (0, 1), (7, 10), (3, 10)]);
        let p = rparams((1, 2), (1, 3));
        assert_eq!(predicted_limit(&face, &p, &tol), face);
        let s = rstate([(2, 5), (1, 5), (1, 10), (3, 10)]);
        let id = rparams((0, 1), (0, 1));
        assert_eq!(predicted_limit(&s, &id, &tol), s);
    }

    #[test]
    fn predicted_limit_lands_on_the_fixed_line_of_its_slice() {
        let s = fstate(0.4, 0.2, 0.1, 0.3);
        let p = fparams(0.5, 0.5);
        let limit = predicted_limit(&s, &p, &Tolerance::default());
        // Same slice, zero disequilibrium: (1 - alpha)*x = alpha*u.
        assert!((limit.alpha() - s.alpha()).abs() < 1e-15);
        let c = project(&limit);
        let residual = (1.0 - c.alpha) * c.x - c.alpha * c.u;
        assert!(residual.abs() < 1e-15);
    }

    #[test]
    fn theorem_denominator_identity() {
        // (u + v)*a + (x + y)*b equals (1 - alpha)*a + alpha*b on the simplex.
        let s = rstate([(2, 5), (1, 5), (1, 10), (3, 10)]);
        let p = rparams((3, 7), (2, 9));
        let alpha = s.alpha();
        let lhs = (s.u().clone() + s.v().clone()) * p.a().clone() + alpha.clone() * p.b().clone();
        let rhs = (R::one() - alpha.clone()) * p.a().clone() + alpha * p.b().clone();
        assert_eq!(lhs, rhs);
    }
}
