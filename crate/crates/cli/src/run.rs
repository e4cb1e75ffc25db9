//! Mode execution: parse typed inputs out of the resolved configuration,
//! run the requested computation (grid cells in parallel), and emit records
//! in deterministic grid order.

use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use twolocus::{
    lambda2, predicted_limit, run_to_convergence, step_additive, verify_against_oracle,
    GameteState, RecombinationParams, Scalar, StopCriterion, Tolerance, VerificationReport,
};

use crate::config::{Arithmetic, Format, Mode, ResolvedConfig};
use crate::emit::{
    csv_table, json_rows, json_single, scalar_cell, scalar_value, write_output, LimitRow,
    StepRow, SweepRow, TrajectoryRow, VerifyRow, LIMIT_HEADER, STEP_HEADER, SWEEP_HEADER,
    TRAJECTORY_HEADER, VERIFY_HEADER,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Aggregated run outcome, mapped onto the process exit code.
#[derive(Debug, Clone, Copy)]
pub struct RunStatus {
    /// False when any convergence run exhausted its step budget.
    pub all_converged: bool,
    /// False when any verification check failed.
    pub all_checks_passed: bool,
}

impl RunStatus {
    fn ok() -> Self {
        Self {
            all_converged: true,
            all_checks_passed: true,
        }
    }
}

/// Exit-code contract: 0 success, 2 usage, 3 failed verification check,
/// 4 I/O failure, 5 step budget exhausted. Budget exhaustion outranks
/// check failures because unfinished runs make their checks meaningless.
pub fn exit_code(status: &RunStatus) -> u8 {
    if !status.all_converged {
        5
    } else if !status.all_checks_passed {
        3
    } else {
        0
    }
}

pub fn execute(cfg: &ResolvedConfig) -> Result<RunStatus, CliError> {
    match cfg.arithmetic {
        Arithmetic::Floating => run_mode::<f64>(cfg),
        Arithmetic::Rational => run_mode::<BigRational>(cfg),
    }
}

fn run_mode<S: Scalar>(cfg: &ResolvedConfig) -> Result<RunStatus, CliError> {
    let tol = Tolerance::<S>::default();
    match cfg.mode {
        Mode::Step => run_step::<S>(cfg, &tol),
        Mode::Trajectory => run_trajectory::<S>(cfg, &tol),
        Mode::Limit => run_limit::<S>(cfg, &tol),
        Mode::Sweep => run_sweep::<S>(cfg, &tol),
        Mode::Verify => run_verify::<S>(cfg, &tol),
    }
}

fn parse_scalar<S: Scalar>(text: &str, what: &str) -> Result<S, CliError> {
    S::parse(text).map_err(|e| usage(format!("invalid {what} {text:?}: {e}")))
}

fn stop_criterion<S: Scalar>(cfg: &ResolvedConfig) -> Result<StopCriterion<S>, CliError> {
    let eps = match &cfg.eps {
        Some(text) => parse_scalar::<S>(text, "--eps")?,
        None => Tolerance::<S>::default().eps_convergence,
    };
    // Exact arithmetic grows denominators with every step, so its default
    // budget stays small; an explicit --max-steps always wins.
    let max_steps = cfg.max_steps.unwrap_or(match cfg.arithmetic {
        Arithmetic::Rational => 200,
        Arithmetic::Floating => 10_000,
    });
    StopCriterion::new(eps, max_steps).map_err(|e| usage(e.to_string()))
}

// Default for grid modes when no --point is given: a state with nonzero
// coupling (D = -0.1), so default verification exercises the decay and
// limit checks rather than starting on the fixed surface.
const DEFAULT_POINT: &str = "0.4,0.2,0.1,0.3";

fn parse_points<S: Scalar>(
    cfg: &ResolvedConfig,
    tol: &Tolerance<S>,
) -> Result<Vec<GameteState<S>>, CliError> {
    let specs: Vec<&str> = if cfg.points.is_empty() {
        match cfg.mode {
            Mode::Sweep | Mode::Verify => vec![DEFAULT_POINT],
            _ => return Err(usage("this mode requires --point x,y,u,v")),
        }
    } else {
        cfg.points.iter().map(String::as_str).collect()
    };
    specs
        .iter()
        .map(|spec| {
            GameteState::parse(spec, tol)
                .map_err(|e| usage(format!("invalid --point {spec:?}: {e}")))
        })
        .collect()
}

fn single_point<S: Scalar>(points: Vec<GameteState<S>>) -> Result<GameteState<S>, CliError> {
    if points.len() != 1 {
        return Err(usage("this mode expects exactly one --point"));
    }
    Ok(points.into_iter().next().expect("length checked"))
}

fn scalar_params<S: Scalar>(cfg: &ResolvedConfig) -> Result<RecombinationParams<S>, CliError> {
    if cfg.a_grid.is_some() || cfg.b_grid.is_some() {
        return Err(usage(
            "--a-grid/--b-grid apply only to sweep and verify; use --a and --b",
        ));
    }
    let (Some(a_text), Some(b_text)) = (&cfg.a, &cfg.b) else {
        return Err(usage("this mode requires --a and --b in [0,1]"));
    };
    let a = parse_scalar::<S>(a_text, "--a")?;
    let b = parse_scalar::<S>(b_text, "--b")?;
    RecombinationParams::new(a, b).map_err(|e| usage(e.to_string()))
}

/// Parses "min:max:count" into inclusive, evenly spaced values; the two
/// endpoints are returned exactly as parsed.
fn parse_grid<S: Scalar>(spec: &str, what: &str) -> Result<Vec<S>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [min_text, max_text, count_text] = parts.as_slice() else {
        return Err(usage(format!(
            "invalid {what} {spec:?}: expected min:max:count"
        )));
    };
    let min = parse_scalar::<S>(min_text, what)?;
    let max = parse_scalar::<S>(max_text, what)?;
    let count: usize = count_text.parse().map_err(|_| {
        usage(format!(
            "invalid {what} {spec:?}: count must be a positive integer"
        ))
    })?;
    if count == 0 {
        return Err(usage(format!(
            "invalid {what} {spec:?}: count must be at least 1"
        )));
    }
    if min > max {
        return Err(usage(format!("invalid {what} {spec:?}: min exceeds max")));
    }
    if min < S::zero() || max > S::one() {
        return Err(usage(format!(
            "invalid {what} {spec:?}: range must lie within [0,1]"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let span = max.clone() - min.clone();
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                min.clone()
            } else if i == count - 1 {
                max.clone()
            } else {
                min.clone() + span.clone() * S::from_ratio(i as i64, (count - 1) as i64)
            }
        })
        .collect())
}

fn grid_values<S: Scalar>(
    grid: &Option<String>,
    single: &Option<String>,
    name: &str,
) -> Result<Vec<S>, CliError> {
    match (grid, single) {
        (Some(spec), _) => parse_grid::<S>(spec, &format!("--{name}-grid")),
        (None, Some(text)) => Ok(vec![parse_scalar::<S>(text, &format!("--{name}"))?]),
        (None, None) => Err(usage(format!(
            "sweep/verify require --{name}-grid min:max:count (or a single --{name})"
        ))),
    }
}

fn state_cells<S: Scalar>(s: &GameteState<S>) -> Vec<String> {
    s.components().iter().map(|c| scalar_cell(*c)).collect()
}

/// Rendering for terminal summary lines only: floating values are shown to
/// twelve decimal places with trailing zeros trimmed, so noise in the last
/// couple of bits stays out of the summary. Exact values keep their p/q
/// form, and data outputs (CSV/JSON) keep full round-trip precision.
fn human_scalar<S: Scalar>(v: &S) -> String {
    if S::EXACT {
        return v.to_string();
    }
    let text = format!("{:.12}", v.to_f64());
    let trimmed = text.trim_end_matches('0').trim_end_matches('.');
    if trimmed == "-0" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

fn human_state<S: Scalar>(s: &GameteState<S>) -> String {
    format!(
        "({}, {}, {}, {})",
        human_scalar(s.x()),
        human_scalar(s.y()),
        human_scalar(s.u()),
        human_scalar(s.v())
    )
}

fn run_step<S: Scalar>(cfg: &ResolvedConfig, tol: &Tolerance<S>) -> Result<RunStatus, CliError> {
    let point = single_point(parse_points::<S>(cfg, tol)?)?;
    let params = scalar_params::<S>(cfg)?;
    let next = step_additive(&point, &params);
    if cfg.out.is_none() && cfg.format.is_none() {
        println!("{}", human_state(&next));
    } else {
        let text = match cfg.format.unwrap_or(Format::Csv) {
            Format::Csv => csv_table(STEP_HEADER, &[state_cells(&next)]),
            Format::Json => json_single(&StepRow {
                x: scalar_value(next.x()),
                y: scalar_value(next.y()),
                u: scalar_value(next.u()),
                v: scalar_value(next.v()),
            })?,
        };
        write_output(&cfg.out, &text)?;
    }
    Ok(RunStatus::ok())
}

fn run_trajectory<S: Scalar>(
    cfg: &ResolvedConfig,
    tol: &Tolerance<S>,
) -> Result<RunStatus, CliError> {
    let point = single_point(parse_points::<S>(cfg, tol)?)?;
    let params = scalar_params::<S>(cfg)?;
    let crit = stop_criterion::<S>(cfg)?;
    let mut states = vec![point.clone()];
    let mut current = point;
    let mut converged = false;
    for _ in 1..=crit.max_steps() {
        let next = step_additive(&current, &params);
        let diff = current.max_distance(&next);
        states.push(next.clone());
        current = next;
        if diff <= *crit.eps() {
            converged = true;
            break;
        }
    }
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = states
                .iter()
                .enumerate()
                .map(|(n, s)| {
                    let mut row = vec![n.to_string()];
                    row.extend(state_cells(s));
                    row.push(scalar_cell(&s.linkage_disequilibrium().into_inner()));
                    row
                })
                .collect();
            csv_table(TRAJECTORY_HEADER, &rows)
        }
        Format::Json => {
            let rows: Vec<TrajectoryRow> = states
                .iter()
                .enumerate()
                .map(|(n, s)| TrajectoryRow {
                    n,
                    x: scalar_value(s.x()),
                    y: scalar_value(s.y()),
                    u: scalar_value(s.u()),
                    v: scalar_value(s.v()),
                    d: scalar_value(&s.linkage_disequilibrium().into_inner()),
                })
                .collect();
            json_rows(&rows)?
        }
    };
    write_output(&cfg.out, &text)?;
    Ok(RunStatus {
        all_converged: converged,
        all_checks_passed: true,
    })
}

fn run_limit<S: Scalar>(cfg: &ResolvedConfig, tol: &Tolerance<S>) -> Result<RunStatus, CliError> {
    let point = single_point(parse_points::<S>(cfg, tol)?)?;
    let params = scalar_params::<S>(cfg)?;
    let limit = predicted_limit(&point, &params, tol);
    let alpha = point.alpha();
    let lam2 = lambda2(&alpha, &params);
    if cfg.out.is_none() && cfg.format.is_none() {
        println!("limit {}", human_state(&limit));
        println!("alpha {}", human_scalar(&alpha));
        println!("lambda2 {}", human_scalar(&lam2));
    } else {
        let text = match cfg.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut row = state_cells(&limit);
                row.push(scalar_cell(&alpha));
                row.push(scalar_cell(&lam2));
                csv_table(LIMIT_HEADER, &[row])
            }
            Format::Json => json_single(&LimitRow {
                x_lim: scalar_value(limit.x()),
                y_lim: scalar_value(limit.y()),
                u_lim: scalar_value(limit.u()),
                v_lim: scalar_value(limit.v()),
                alpha: scalar_value(&alpha),
                lambda2: scalar_value(&lam2),
            })?,
        };
        write_output(&cfg.out, &text)?;
    }
    Ok(RunStatus::ok())
}

/// One grid cell: a parameter pair and an initial point.
struct Cell<S: Scalar> {
    params: RecombinationParams<S>,
    point: GameteState<S>,
}

/// Cells in emission order: a-index outermost, then b-index, then
/// point-index.
fn build_cells<S: Scalar>(
    cfg: &ResolvedConfig,
    tol: &Tolerance<S>,
) -> Result<Vec<Cell<S>>, CliError> {
    let a_values = grid_values::<S>(&cfg.a_grid, &cfg.a, "a")?;
    let b_values = grid_values::<S>(&cfg.b_grid, &cfg.b, "b")?;
    let points = parse_points::<S>(cfg, tol)?;
    let mut cells = Vec::with_capacity(a_values.len() * b_values.len() * points.len());
    for a in &a_values {
        for b in &b_values {
            for point in &points {
                let params = RecombinationParams::new(a.clone(), b.clone())
                    .map_err(|e| usage(e.to_string()))?;
                cells.push(Cell {
                    params,
                    point: point.clone(),
                });
            }
        }
    }
    Ok(cells)
}

struct SweepOutcome<S: Scalar> {
    cell: Cell<S>,
    alpha: S,
    lambda2: S,
    steps: usize,
    limit: GameteState<S>,
    oracle_gap: S,
    d0: S,
    converged: bool,
}

fn evaluate_sweep_cell<S: Scalar>(cell: Cell<S>, crit: &StopCriterion<S>) -> SweepOutcome<S> {
    let alpha = cell.point.alpha();
    let lam2 = lambda2(&alpha, &cell.params);
    let d0 = cell.point.linkage_disequilibrium().into_inner();
    if cell.params.is_identity() {
        // The identity cell reports zero steps and its own input as the
        // limit rather than being skipped.
        let limit = cell.point.clone();
        return SweepOutcome {
            cell,
            alpha,
            lambda2: lam2,
            steps: 0,
            limit,
            oracle_gap: S::zero(),
            d0,
            converged: true,
        };
    }
    let report = run_to_convergence(&cell.point, &cell.params, crit);
    SweepOutcome {
        cell,
        alpha,
        lambda2: lam2,
        steps: report.steps_taken,
        limit: report.final_state,
        oracle_gap: report.oracle_gap,
        d0,
        converged: report.converged,
    }
}

fn sweep_csv_row<S: Scalar>(o: &SweepOutcome<S>) -> Vec<String> {
    let mut row = vec![
        scalar_cell(o.cell.params.a()),
        scalar_cell(o.cell.params.b()),
    ];
    row.extend(state_cells(&o.cell.point));
    row.push(scalar_cell(&o.alpha));
    row.push(scalar_cell(&o.lambda2));
    row.push(o.steps.to_string());
    row.extend(state_cells(&o.limit));
    row.push(scalar_cell(&o.oracle_gap));
    row.push(scalar_cell(&o.d0));
    row
}

fn sweep_json_row<S: Scalar>(o: &SweepOutcome<S>) -> SweepRow {
    SweepRow {
        a: scalar_value(o.cell.params.a()),
        b: scalar_value(o.cell.params.b()),
        x0: scalar_value(o.cell.point.x()),
        y0: scalar_value(o.cell.point.y()),
        u0: scalar_value(o.cell.point.u()),
        v0: scalar_value(o.cell.point.v()),
        alpha: scalar_value(&o.alpha),
        lambda2: scalar_value(&o.lambda2),
        steps_taken: o.steps,
        x_lim: scalar_value(o.limit.x()),
        y_lim: scalar_value(o.limit.y()),
        u_lim: scalar_value(o.limit.u()),
        v_lim: scalar_value(o.limit.v()),
        oracle_gap: scalar_value(&o.oracle_gap),
        d0: scalar_value(&o.d0),
    }
}

fn run_sweep<S: Scalar>(cfg: &ResolvedConfig, tol: &Tolerance<S>) -> Result<RunStatus, CliError> {
    let cells = build_cells::<S>(cfg, tol)?;
    let crit = stop_criterion::<S>(cfg)?;
    // Cells are independent pure computations; evaluate in parallel and
    // collect in index order so the emitted artifact is deterministic.
    let outcomes: Vec<SweepOutcome<S>> = cells
        .into_par_iter()
        .map(|cell| evaluate_sweep_cell(cell, &crit))
        .collect();
    let all_converged = outcomes.iter().all(|o| o.converged);
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = outcomes.iter().map(sweep_csv_row).collect();
            csv_table(SWEEP_HEADER, &rows)
        }
        Format::Json => {
            let rows: Vec<SweepRow> = outcomes.iter().map(sweep_json_row).collect();
            json_rows(&rows)?
        }
    };
    write_output(&cfg.out, &text)?;
    Ok(RunStatus {
        all_converged,
        all_checks_passed: true,
    })
}

struct VerifyOutcome<S: Scalar> {
    cell: Cell<S>,
    alpha: S,
    lambda2: S,
    report: VerificationReport<S>,
}

fn verify_csv_row<S: Scalar>(o: &VerifyOutcome<S>) -> Vec<String> {
    let mut row = vec![
        scalar_cell(o.cell.params.a()),
        scalar_cell(o.cell.params.b()),
    ];
    row.extend(state_cells(&o.cell.point));
    row.push(scalar_cell(&o.alpha));
    row.push(scalar_cell(&o.lambda2));
    row.push(o.report.steps_taken.to_string());
    row.push(o.report.converged.to_string());
    row.push(o.report.limit_check.to_string());
    row.push(o.report.decay_check.to_string());
    row.push(o.report.alpha_check.to_string());
    row.push(o.report.fixed_point_check.to_string());
    row.push(scalar_cell(&o.report.limit_gap));
    row.push(scalar_cell(&o.report.decay_worst));
    row.push(scalar_cell(&o.report.alpha_drift));
    row.push(scalar_cell(&o.report.final_d_abs));
    row.push(o.report.all_pass().to_string());
    row
}

fn verify_json_row<S: Scalar>(o: &VerifyOutcome<S>) -> VerifyRow {
    VerifyRow {
        a: scalar_value(o.cell.params.a()),
        b: scalar_value(o.cell.params.b()),
        x0: scalar_value(o.cell.point.x()),
        y0: scalar_value(o.cell.point.y()),
        u0: scalar_value(o.cell.point.u()),
        v0: scalar_value(o.cell.point.v()),
        alpha: scalar_value(&o.alpha),
        lambda2: scalar_value(&o.lambda2),
        steps_taken: o.report.steps_taken,
        converged: o.report.converged,
        limit_check: o.report.limit_check,
        decay_check: o.report.decay_check,
        alpha_check: o.report.alpha_check,
        fixed_point_check: o.report.fixed_point_check,
        limit_gap: scalar_value(&o.report.limit_gap),
        decay_worst: scalar_value(&o.report.decay_worst),
        alpha_drift: scalar_value(&o.report.alpha_drift),
        final_d_abs: scalar_value(&o.report.final_d_abs),
        all_pass: o.report.all_pass(),
    }
}

fn run_verify<S: Scalar>(cfg: &ResolvedConfig, tol: &Tolerance<S>) -> Result<RunStatus, CliError> {
    let cells = build_cells::<S>(cfg, tol)?;
    let crit = stop_criterion::<S>(cfg)?;
    let outcomes: Vec<VerifyOutcome<S>> = cells
        .into_par_iter()
        .map(|cell| {
            let alpha = cell.point.alpha();
            let lam2 = lambda2(&alpha, &cell.params);
            let report = verify_against_oracle(&cell.point, &cell.params, &crit);
            VerifyOutcome {
                cell,
                alpha,
                lambda2: lam2,
                report,
            }
        })
        .collect();
    let all_converged = outcomes.iter().all(|o| o.report.converged);
    let all_checks_passed = outcomes.iter().all(|o| o.report.all_pass());
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = outcomes.iter().map(verify_csv_row).collect();
            csv_table(VERIFY_HEADER, &rows)
        }
        Format::Json => {
            let rows: Vec<VerifyRow> = outcomes.iter().map(verify_json_row).collect();
            json_rows(&rows)?
        }
    };
    write_output(&cfg.out, &text)?;
    Ok(RunStatus {
        all_converged,
        all_checks_passed,
    })
}
