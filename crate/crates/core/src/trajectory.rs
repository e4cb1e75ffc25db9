//! Orbit computation, convergence detection, contraction-rate estimation, and
//! cross-validation of iteration against the closed-form limit predictions.

use thiserror::Error;

use crate::operator::step_additive;
use crate::scalar::{Scalar, Tolerance};
use crate::slice::{lambda2, predicted_limit};
use crate::state::{DisequilibriumValue, GameteState, RecombinationParams};

/// Differences this close to machine precision carry no usable rate signal.
const RATE_NOISE_FLOOR: f64 = 100.0 * f64::EPSILON;
/// Leading steps excluded from rate estimation while transients settle.
const RATE_TRANSIENT_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("invalid stop criterion: {0}")]
    InvalidCriterion(String),
    #[error("contraction rate undefined: orbit is constant or has too few usable steps")]
    RateUndefined,
}

/// Stopping rule for convergence runs: halt when the max-norm of the
/// successive difference drops to `eps`, or after `max_steps` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct StopCriterion<S: Scalar> {
    eps: S,
    max_steps: usize,
}

impl<S: Scalar> StopCriterion<S> {
    pub fn new(eps: S, max_steps: usize) -> Result<Self, TrajectoryError> {
        if !(eps > S::zero()) {
            return Err(TrajectoryError::InvalidCriterion(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if max_steps == 0 {
            return Err(TrajectoryError::InvalidCriterion(
                "max_steps must be at least 1".to_string(),
            ));
        }
        Ok(Self { eps, max_steps })
    }

    pub fn eps(&self) -> &S {
        &self.eps
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }
}

impl<S: Scalar> Default for StopCriterion<S> {
    fn default() -> Self {
        Self {
            eps: Tolerance::<S>::default().eps_convergence,
            max_steps: 10_000,
        }
    }
}

/// A recorded orbit segment. `states[k]` is the orbit point after
/// `k * stride` applications of the step map, starting from the initial
/// point; `d_values[k]` is its linkage disequilibrium.
#[derive(Debug, Clone)]
pub struct Trajectory<S: Scalar> {
    params: RecombinationParams<S>,
    stride: usize,
    states: Vec<GameteState<S>>,
    d_values: Vec<DisequilibriumValue<S>>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn params(&self) -> &RecombinationParams<S> {
        &self.params
    }

    /// Number of map applications between consecutive recorded states.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn states(&self) -> &[GameteState<S>] {
        &self.states
    }

    pub fn d_values(&self) -> &[DisequilibriumValue<S>] {
        &self.d_values
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Max-norm distances between consecutive recorded states.
    pub fn successive_diffs(&self) -> Vec<S> {
        self.states
            .windows(2)
            .map(|w| w[0].max_distance(&w[1]))
            .collect()
    }
}

/// Computes the length-`(n + 1)` orbit of `s`, recording every state
/// including the initial one.
pub fn iterate<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    n: usize,
) -> Trajectory<S> {
    iterate_strided(s, params, n, 1)
}

/// Computes the orbit of `s` for `n` steps but records only every
/// `stride`-th state (step indices 0, stride, 2*stride, ...). Keeps memory
/// bounded on long runs; a `stride` of 0 is treated as 1.
pub fn iterate_strided<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    n: usize,
    stride: usize,
) -> Trajectory<S> {
    let stride = stride.max(1);
    let mut states = Vec::with_capacity(n / stride + 1);
    let mut current = s.clone();
    states.push(current.clone());
    for step in 1..=n {
        current = step_additive(&current, params);
        if step % stride == 0 {
            states.push(current.clone());
        }
    }
    let d_values = states
        .iter()
        .map(GameteState::linkage_disequilibrium)
        .collect();
    Trajectory {
        params: params.clone(),
        stride,
        states,
        d_values,
    }
}

/// Outcome of a convergence run.
#[derive(Debug, Clone)]
pub struct ConvergenceReport<S: Scalar> {
    pub final_state: GameteState<S>,
    pub steps_taken: usize,
    /// False when the run stopped at `max_steps` without meeting `eps`.
    pub converged: bool,
    /// Closed-form limit predicted from the initial point.
    pub oracle_state: GameteState<S>,
    /// Max-norm distance between `final_state` and `oracle_state`.
    pub oracle_gap: S,
    /// Observed contraction factor, absent when the orbit gives no signal.
    pub estimated_rate: Option<S>,
    /// Contracting eigenvalue of the slice through the initial point.
    pub theoretical_rate: S,
}

struct RunOutcome<S: Scalar> {
    final_state: GameteState<S>,
    steps_taken: usize,
    converged: bool,
    diffs: Vec<f64>,
}

/// Shared run loop: steps until the successive difference drops to
/// `crit.eps` or `crit.max_steps` is reached, invoking `observe` on every
/// state (the initial one included) with its step index.
fn drive<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    crit: &StopCriterion<S>,
    mut observe: impl FnMut(usize, &GameteState<S>),
) -> RunOutcome<S> {
    let mut current = s.clone();
    observe(0, &current);
    let mut diffs = Vec::new();
    let mut converged = false;
    let mut steps_taken = 0;
    for step in 1..=crit.max_steps {
        let next = step_additive(&current, params);
        observe(step, &next);
        let diff = current.max_distance(&next);
        diffs.push(diff.to_f64());
        current = next;
        steps_taken = step;
        if diff <= crit.eps {
            converged = true;
            break;
        }
    }
    RunOutcome {
        final_state: current,
        steps_taken,
        converged,
        diffs,
    }
}

/// Iterates `s` until successive iterates agree within `crit.eps` in
/// max-norm (or `max_steps` is hit, flagged by `converged = false`), then
/// compares the endpoint against the closed-form limit prediction.
pub fn run_to_convergence<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    crit: &StopCriterion<S>,
) -> ConvergenceReport<S> {
    let outcome = drive(s, params, crit, |_, _| {});
    let oracle_state = predicted_limit(s, params, &Tolerance::default());
    let oracle_gap = outcome.final_state.max_distance(&oracle_state);
    let estimated_rate = rate_from_diffs(&outcome.diffs, 1).ok().map(S::from_f64);
    let theoretical_rate = lambda2(&s.alpha(), params);
    ConvergenceReport {
        final_state: outcome.final_state,
        steps_taken: outcome.steps_taken,
        converged: outcome.converged,
        oracle_state,
        oracle_gap,
        estimated_rate,
        theoretical_rate,
    }
}

/// Geometric-mean contraction factor of the successive max-norm differences
/// of a recorded orbit, discarding the leading transient and any tail below
/// the noise floor. An orbit that lands exactly on a fixed point after at
/// least one real step reports 0; a constant or too-short orbit is
/// `RateUndefined`.
pub fn estimate_rate<S: Scalar>(t: &Trajectory<S>) -> Result<S, TrajectoryError> {
    let diffs: Vec<f64> = t.successive_diffs().iter().map(Scalar::to_f64).collect();
    rate_from_diffs(&diffs, t.stride()).map(S::from_f64)
}

/// Core of the rate estimator, on per-recording max-norm differences. When
/// the recording stride exceeds 1 each ratio measures `rate^stride`, so the
/// geometric mean is deflated by the matching root.
fn rate_from_diffs(diffs: &[f64], stride: usize) -> Result<f64, TrajectoryError> {
    let usable: Vec<f64> = diffs
        .iter()
        .copied()
        .skip(RATE_TRANSIENT_STEPS)
        .take_while(|d| *d > RATE_NOISE_FLOOR)
        .collect();
    if usable.len() >= 2 {
        let ratio_count = (usable.len() - 1) as f64;
        let per_recording = (usable[usable.len() - 1] / usable[0]).powf(1.0 / ratio_count);
        let rate = per_recording.powf(1.0 / stride.max(1) as f64);
        return Ok(rate.clamp(0.0, 1.0));
    }
    let ever_moved = diffs.iter().any(|d| *d > RATE_NOISE_FLOOR);
    let ends_flat = diffs.last().is_some_and(|d| *d <= RATE_NOISE_FLOOR);
    if ever_moved && ends_flat {
        // The orbit made real progress and then stopped moving entirely:
        // it landed on a fixed point, so the observed rate is zero.
        return Ok(0.0);
    }
    Err(TrajectoryError::RateUndefined)
}

/// Pass/fail record comparing an iterated run against the closed-form
/// oracles, with the measured residuals and the tolerances applied.
#[derive(Debug, Clone)]
pub struct VerificationReport<S: Scalar> {
    pub converged: bool,
    pub steps_taken: usize,
    /// Endpoint vs predicted limit, within `limit_tolerance`.
    pub limit_check: bool,
    pub limit_gap: S,
    /// `crit.eps` scaled by the stopping rule's residual factor
    /// max(1, lambda2 / (1 - lambda2)).
    pub limit_tolerance: S,
    /// Disequilibrium follows the geometric decay law at every recorded step.
    pub decay_check: bool,
    pub decay_worst: S,
    pub decay_tolerance: S,
    /// The slice coordinate x + y is conserved along the orbit.
    pub alpha_check: bool,
    pub alpha_drift: S,
    pub alpha_tolerance: S,
    /// Endpoint passes the fixed-point predicate.
    pub fixed_point_check: bool,
    pub final_d_abs: S,
    pub d_tolerance: S,
}

impl<S: Scalar> VerificationReport<S> {
    pub fn all_pass(&self) -> bool {
        self.converged
            && self.limit_check
            && self.decay_check
            && self.alpha_check
            && self.fixed_point_check
    }
}

/// Runs `s` to convergence and checks the orbit against all closed-form
/// predictions: (i) the endpoint matches the predicted limit; (ii) the
/// disequilibrium decays geometrically with the contracting eigenvalue at
/// every step; (iii) x + y is conserved; (iv) the endpoint is a fixed point.
///
/// Check (i)'s tolerance is `crit.eps * max(1, lambda2 / (1 - lambda2))`:
/// stopping when the successive difference reaches eps leaves a residual of
/// about eps * lambda2 / (1 - lambda2) to the true limit, so a flat eps
/// would measure the stopping rule, not the oracle. Check (iv) bounds
/// |D| by eps / max(a, b), the exact image of the stopping threshold.
pub fn verify_against_oracle<S: Scalar>(
    s: &GameteState<S>,
    params: &RecombinationParams<S>,
    crit: &StopCriterion<S>,
) -> VerificationReport<S> {
    let tol = Tolerance::<S>::default();
    let lam2 = lambda2(&s.alpha(), params);

    let decay_tolerance = if S::EXACT {
        S::zero()
    } else {
        S::from_f64(1e-11)
    };
    let alpha_tolerance = tol.eps_membership.clone();

    let alpha0 = s.alpha();
    let d0 = s.linkage_disequilibrium().into_inner();
    let mut expected_d = d0.clone();
    let mut decay_worst = S::zero();
    let mut alpha_drift = S::zero();
    let mut first = true;
    let outcome = drive(s, params, crit, |_, state| {
        if first {
            // d_values[0] matches itself by construction; start the
            // geometric reference at the next step.
            first = false;
        } else {
            expected_d = expected_d.clone() * lam2.clone();
            let dev = (state.linkage_disequilibrium().into_inner() - expected_d.clone()).abs();
            if dev > decay_worst {
                decay_worst = dev;
            }
        }
        let drift = (state.alpha() - alpha0.clone()).abs();
        if drift > alpha_drift {
            alpha_drift = drift;
        }
    });

    let oracle_state = predicted_limit(s, params, &tol);
    let limit_gap = outcome.final_state.max_distance(&oracle_state);
    let residual_factor = if lam2 < S::one() {
        let ratio = lam2.clone() / (S::one() - lam2.clone());
        if ratio > S::one() {
            ratio
        } else {
            S::one()
        }
    } else {
        // lambda2 = 1 only where the disequilibrium already vanishes, so
        // the orbit is constant and any positive tolerance suffices.
        S::one()
    };
    let limit_tolerance = crit.eps.clone() * residual_factor;

    let max_rate = if params.a() > params.b() {
        params.a().clone()
    } else {
        params.b().clone()
    };
    let d_tolerance = if max_rate.is_zero() {
        // Identity parameters: every point is fixed and |D| is unconstrained
        // by the stopping rule; the predicate passes via the identity branch.
        crit.eps.clone()
    } else {
        crit.eps.clone() / max_rate
    };
    let final_d_abs = outcome.final_state.linkage_disequilibrium().abs();
    let fixed_tol = Tolerance {
        eps_membership: d_tolerance.clone(),
        eps_convergence: crit.eps.clone(),
    };
    let fixed_point_check = outcome.final_state.is_fixed_point(params, &fixed_tol);

    VerificationReport {
        converged: outcome.converged,
        steps_taken: outcome.steps_taken,
        limit_check: limit_gap <= limit_tolerance,
        limit_gap,
        limit_tolerance,
        decay_check: decay_worst <= decay_tolerance,
        decay_worst,
        decay_tolerance,
        alpha_check: alpha_drift <= alpha_tolerance,
        alpha_drift,
        alpha_tolerance,
        fixed_point_check,
        final_d_abs,
        d_tolerance,
    }
}
