//! The evolution operator on gamete frequencies, in both of its algebraic
//! forms, together with its Jacobian and fixed-point spectrum.
//!
//! One generation maps `(x, y, u, v)` to
//!
//! ```text
//! x' = x + a*D      y' = y - a*D      u' = u - b*D      v' = v + b*D
//! ```
//!
//! with `D = y*u - x*v`. The same map expands into a quadratic stochastic
//! form whose coefficient tensor is materialized by [`qso_tensor`]; the two
//! evaluations agree exactly and serve as mutual cross-checks. The additive
//! form is the production path.

use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::{Scalar, Tolerance};
use crate::state::{GameteState, RecombinationParams};

/// One generation of the dynamics in the additive form `s + D * (a, -a, -b, b)`.
///
/// Exact in the rational backend. In the floating backend each coordinate
/// takes one multiplication and one addition beyond the shared `D`, so the
/// coordinate sum drifts from 1 by at most a few ulp per step.
pub fn step_additive<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
) -> GameteState<S> {
    let d = s.linkage_disequilibrium().into_inner();
    let ad = params.a().clone() * d.clone();
    let bd = params.b().clone() * d;
    GameteState::unchecked(
        s.x().clone() + ad.clone(),
        s.y().clone() - ad,
        s.u().clone() - bd.clone(),
        s.v().clone() + bd,
    )
}

/// One generation evaluated through the quadratic stochastic form,
/// `s'_k = sum_{i,j} P[i][j][k] * s_i * s_j`. Test and verification path.
pub fn step_qso<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
) -> GameteState<S> {
    qso_tensor(params).apply(s)
}

/// Heredity coefficients of the quadratic stochastic form.
///
/// `coefficient(i, j, k)` is the probability that parental gamete types `i`
/// and `j` produce type `k`. The tensor is stored symmetrized
/// (`P[i][j][k] = P[j][i][k]`), every entry is nonnegative, and
/// `sum_k P[i][j][k] = 1` for each pair `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QsoTensor<S: Scalar> {
    p: [[[S; 4]; 4]; 4],
}

/// Builds the coefficient tensor for the given recombination rates.
pub fn qso_tensor<S: Scalar>(params: &RecombinationParams<S>) -> QsoTensor<S> {
    let a = params.a().clone();
    let b = params.b().clone();
    let one = S::one();
    let half = S::from_ratio(1, 2);
    let halve = |c: S| c * half.clone();

    let mut p: [[[S; 4]; 4]; 4] = std::array::from_fn(|_| {
        std::array::from_fn(|_| std::array::from_fn(|_| S::zero()))
    });
    // `set` records one monomial of the quadratic form: coefficient `c` on
    // s_i * s_j (i != j) splits evenly across the (i, j) and (j, i) slots.
    let mut set = |i: usize, j: usize, k: usize, c: S| {
        if i == j {
            p[i][j][k] = c;
        } else {
            let shared = halve(c);
            p[i][j][k] = shared.clone();
            p[j][i][k] = shared;
        }
    };

    let (x, y, u, v) = (0, 1, 2, 3);
    // x' = x^2 + xy + xu + (1-a)xv + a*yu
    set(x, x, x, one.clone());
    set(x, y, x, one.clone());
    set(x, u, x, one.clone());
    set(x, v, x, one.clone() - a.clone());
    set(y, u, x, a.clone());
    // y' = xy + y^2 + (1-a)yu + a*xv + yv
    set(x, y, y, one.clone());
    set(y, y, y, one.clone());
    set(y, u, y, one.clone() - a.clone());
    set(x, v, y, a.clone());
    set(y, v, y, one.clone());
    // u' = xu + (1-b)yu + u^2 + b*xv + uv
    set(x, u, u, one.clone());
    set(y, u, u, one.clone() - b.clone());
    set(u, u, u, one.clone());
    set(x, v, u, b.clone());
    set(u, v, u, one.clone());
    // v' = (1-b)xv + yv + b*yu + uv + v^2
    set(x, v, v, one.clone() - b.clone());
    set(y, v, v, one.clone());
    set(y, u, v, b);
    set(u, v, v, one.clone());
    set(v, v, v, one);

    QsoTensor { p }
}

impl<S: Scalar> QsoTensor<S> {
    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> &S {
        &self.p[i][j][k]
    }

    /// `sum_k P[i][j][k]` for one parental pair; 1 for a stochastic tensor.
    pub fn pair_sum(&self, i: usize, j: usize) -> S {
        let mut sum = S::zero();
        for k in 0..4 {
            sum = sum + self.p[i][j][k].clone();
        }
        sum
    }

    /// Nonnegativity plus unit pair sums, within `eps`.
    pub fn is_stochastic(&self, eps: &S) -> bool {
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    if self.p[i][j][k] < S::zero() {
                        return false;
                    }
                }
                if (self.pair_sum(i, j) - S::one()).abs() > *eps {
                    return false;
                }
            }
        }
        true
    }

    /// Full contraction `s'_k = sum_{i,j} P[i][j][k] * s_i * s_j`.
    pub fn apply(&self, s: &GameteState<S>) -> GameteState<S> {
        let c = s.components();
        let mut out: [S; 4] = std::array::from_fn(|_| S::zero());
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = S::zero();
            for i in 0..4 {
                for j in 0..4 {
                    let coeff = &self.p[i][j][k];
                    if coeff.is_zero() {
                        continue;
                    }
                    acc = acc + coeff.clone() * c[i].clone() * c[j].clone();
                }
            }
            *slot = acc;
        }
        let [x, y, u, v] = out;
        GameteState::unchecked(x, y, u, v)
    }
}

/// Jacobian of the one-generation map at a state, as a dense 4x4 matrix.
///
/// The map is `identity + D * g` with `g = (a, -a, -b, b)`, so the Jacobian
/// is the rank-one update `I + g * (grad D)^T` where
/// `grad D = (-v, u, y, -x)`. Row `i` is `e_i + g_i * grad D`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian4<S: Scalar> {
    rows: [[S; 4]; 4],
}

/// Evaluates the Jacobian at `s`.
pub fn jacobian<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
) -> Jacobian4<S> {
    let a = params.a().clone();
    let b = params.b().clone();
    let grad = [
        S::zero() - s.v().clone(),
        s.u().clone(),
        s.y().clone(),
        S::zero() - s.x().clone(),
    ];
    let g = [a.clone(), S::zero() - a, S::zero() - b.clone(), b];
    let mut rows: [[S; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let mut value = g[i].clone() * grad[j].clone();
            if i == j {
                value = value + S::one();
            }
            *entry = value;
        }
    }
    Jacobian4 { rows }
}

impl<S: Scalar> Jacobian4<S> {
    pub fn from_rows(rows: [[S; 4]; 4]) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[[S; 4]; 4] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.rows[i][j]
    }

    pub fn identity() -> Self {
        let mut rows: [[S; 4]; 4] =
            std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = S::one();
        }
        Self { rows }
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..4 {
            t = t + self.rows[i][i].clone();
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut rows: [[S; 4]; 4] =
            std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = S::zero();
                for (k, other_row) in other.rows.iter().enumerate() {
                    acc = acc + self.rows[i][k].clone() * other_row[j].clone();
                }
                *entry = acc;
            }
        }
        Self { rows }
    }

    /// Column sums; all equal 1 because the all-ones row vector is a left
    /// eigenvector of the Jacobian with eigenvalue 1.
    pub fn column_sums(&self) -> [S; 4] {
        std::array::from_fn(|j| {
            let mut sum = S::zero();
            for row in &self.rows {
                sum = sum + row[j].clone();
            }
            sum
        })
    }

    /// Monic characteristic polynomial, ascending coefficients
    /// `[c0, c1, c2, c3, 1]`, via the Faddeev-LeVerrier recursion (trace
    /// based, so it stays exact in the rational backend).
    pub fn char_poly(&self) -> [S; 5] {
        let mut coeffs = [S::zero(), S::zero(), S::zero(), S::zero(), S::one()];
        let mut m = Self::identity();
        let mut c_prev = S::one();
        for step in 1..=4u32 {
            // M_k = A * (M_{k-1} + c_{k-1} I) with c_0 = 1 folded into M_0 = I.
            let mut shifted = m.clone();
            if step > 1 {
                for i in 0..4 {
                    shifted.rows[i][i] = shifted.rows[i][i].clone() + c_prev.clone();
                }
            }
            m = self.mul(&shifted);
            let c = (S::zero() - m.trace()) / S::from_ratio(i64::from(step), 1);
            coeffs[4 - step as usize] = c.clone();
            c_prev = c;
        }
        coeffs
    }
}

/// Errors from the spectral operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("state is not a fixed point: |D| = {d_abs} exceeds the membership tolerance {eps}")]
    NotAFixedPoint { d_abs: f64, eps: f64 },
    #[error(
        "characteristic polynomial fails to vanish at 1 with multiplicity 3 \
         (worst deflation residual {residual})"
    )]
    DeflationResidual { residual: f64 },
    #[error(
        "closed-form contracting eigenvalue {closed_form} disagrees with the \
         deflated value {deflated}"
    )]
    SpectrumMismatch { closed_form: f64, deflated: f64 },
}

/// Divides a monic polynomial (ascending coefficients) by `(z - root)`.
/// Returns the monic quotient and the remainder, which is the polynomial
/// evaluated at `root`.
fn synthetic_div<S: Scalar>(coeffs: &[S], root: &S) -> (Vec<S>, S) {
    debug_assert!(coeffs.len() >= 2);
    let n = coeffs.len();
    let mut quotient = vec![S::zero(); n - 1];
    let mut carry = coeffs[n - 1].clone();
    for k in (0..n - 1).rev() {
        quotient[k] = carry.clone();
        carry = coeffs[k].clone() + root.clone() * carry;
    }
    (quotient, carry)
}

/// Eigenvalues of a Jacobian through its characteristic polynomial, using the
/// rank-one structure the matrix has at fixed points: 1 must be a root of
/// multiplicity three, so the quartic is deflated at 1 three times and the
/// remaining linear factor yields the fourth eigenvalue.
///
/// Each deflation remainder must vanish within `residual_tol` (zero in the
/// exact backend), otherwise the multiplicity claim fails and
/// [`OperatorError::DeflationResidual`] is returned. No multiplicity
/// guarantee exists away from fixed points; see
/// [`Jacobian4::spectrum_iterative`] for that case.
pub fn spectrum_from_char_poly<S: Scalar>(
    jac: &Jacobian4<S>,
    residual_tol: &S,
) -> Result<[S; 4], OperatorError> {
    let one = S::one();
    let mut coeffs: Vec<S> = jac.char_poly().to_vec();
    let mut worst = S::zero();
    for _ in 0..3 {
        let (quotient, remainder) = synthetic_div(&coeffs, &one);
        let r = remainder.abs();
        if r > worst {
            worst = r;
        }
        coeffs = quotient;
    }
    if worst > *residual_tol {
        return Err(OperatorError::DeflationResidual {
            residual: worst.to_f64(),
        });
    }
    // Remaining factor is monic linear: z + coeffs[0].
    let fourth = S::zero() - coeffs[0].clone();
    Ok([S::one(), S::one(), S::one(), fourth])
}

/// Spectrum of the Jacobian at a fixed point: `{1, 1, 1, lambda}` with
/// `lambda = 1 - a*(u + v) - b*(x + y)`.
///
/// The closed form is computed from the state and parameters alone, then
/// checked against [`spectrum_from_char_poly`] on the assembled matrix; the
/// two routes must agree within the membership tolerance (exactly in the
/// rational backend, within `1e-9` in the floating backend).
pub fn fixed_point_spectrum<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    tol: &Tolerance<S>,
) -> Result<[S; 4], OperatorError> {
    if !s.is_fixed_point(params, tol) {
        return Err(OperatorError::NotAFixedPoint {
            d_abs: s.linkage_disequilibrium().abs().to_f64(),
            eps: tol.eps_membership.to_f64(),
        });
    }
    let contracting = S::one()
        - params.a().clone() * (s.u().clone() + s.v().clone())
        - params.b().clone() * s.alpha();

    let check_tol = if S::EXACT {
        S::zero()
    } else {
        S::from_f64(SPECTRUM_CHECK_TOL)
    };
    let numeric = spectrum_from_char_poly(&jacobian(s, params), &check_tol)?;
    if (numeric[3].clone() - contracting.clone()).abs() > check_tol {
        return Err(OperatorError::SpectrumMismatch {
            closed_form: contracting.to_f64(),
            deflated: numeric[3].to_f64(),
        });
    }
    Ok([S::one(), S::one(), S::one(), contracting])
}

/// Agreement demanded between the closed-form spectrum and the deflation of
/// the characteristic polynomial in the floating backend.
pub const SPECTRUM_CHECK_TOL: f64 = 1e-9;

/// All four roots of a monic quartic with real coefficients (ascending,
/// `c[4] = 1`), by Durand-Kerner iteration driven to a residual target of
/// `1e-12` (or 500 sweeps). Returns the roots in no particular order.
///
/// This is the generic eigensolve fallback for matrices away from fixed
/// points. Root-finding at a multiple root is ill-conditioned, so clustered
/// roots come back only to about the cube root of machine epsilon; use
/// [`spectrum_from_char_poly`] where the multiplicity structure is known.
pub fn quartic_roots(coeffs: &[f64; 5]) -> [Complex64; 4] {
    debug_assert!((coeffs[4] - 1.0).abs() < 1e-14, "polynomial must be monic");
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(coeffs[4], 0.0);
        for k in (0..4).rev() {
            acc = acc * z + coeffs[k];
        }
        acc
    };
    let radius = 1.0 + coeffs.iter().take(4).map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: [Complex64; 4] =
        std::array::from_fn(|k| seed.powu(k as u32 + 1) * radius);
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                // Coincident iterates: nudge apart and retry next sweep.
                roots[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        let residual = roots.iter().map(|z| eval(*z).norm()).fold(0.0, f64::max);
        if residual <= 1e-12 || moved <= 1e-15 * radius {
            break;
        }
    }
    roots
}

impl Jacobian4<f64> {
    /// Eigenvalues via [`quartic_roots`] on the characteristic polynomial.
    /// Works at any state; makes no multiplicity guarantees.
    pub fn spectrum_iterative(&self) -> [Complex64; 4] {
        quartic_roots(&self.char_poly())
    }
}
