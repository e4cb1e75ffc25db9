//! Two-locus gamete-frequency dynamics on the 3-simplex.
//!
//! The step map moves a probability vector (x, y, u, v) by a multiple of its
//! linkage disequilibrium D = y*u - x*v:
//!
//! ```text
//! x' = x + a*D,   y' = y - a*D,   u' = u - b*D,   v' = v + b*D
//! ```
//!
//! with recombination parameters a, b in [0, 1]. Everything about the
//! long-run behavior of this map has closed form: the fixed points are
//! exactly the states with D = 0, each plane x + y = alpha is invariant and
//! carries a 2x2 linear transfer matrix with eigenvalues 1 and
//! lambda2 = 1 - (1-alpha)*a - alpha*b, D decays geometrically with ratio
//! lambda2, and every orbit converges to an explicit limit point.
//!
//! The crate provides the step map in both its additive and its full
//! quadratic form, the slice reduction with eigenstructure, matrix powers,
//! and limit projections, and a trajectory engine that iterates orbits and
//! cross-validates them against the closed forms — generically over exact
//! rational or floating-point arithmetic via the [`Scalar`] kernel.

pub mod operator;
pub mod sample;
pub mod scalar;
pub mod slice;
pub mod state;
pub mod trajectory;

pub use operator::{
    fixed_point_spectrum, jacobian, qso_tensor, quartic_roots, spectrum_from_char_poly,
    step_additive, step_qso, Jacobian4, OperatorError, QsoTensor, SPECTRUM_CHECK_TOL,
};
pub use scalar::{approx_eq, Scalar, ScalarParseError, Tolerance};
pub use slice::{
    eigenvalues, lambda2, lift, limit_matrix, matrix_power, predicted_limit, project,
    reduced_step, transfer_matrix, EigenPair, SliceCoords, SliceError, TransferMatrix,
};
pub use state::{DisequilibriumValue, GameteState, RecombinationParams, StateError};
pub use trajectory::{
    estimate_rate, iterate, iterate_strided, run_to_convergence, verify_against_oracle,
    ConvergenceReport, StopCriterion, Trajectory, TrajectoryError, VerificationReport,
};
