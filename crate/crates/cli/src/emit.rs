//! Output rendering: CSV tables with pinned headers, JSON mirrors of the
//! record field names, and the scalar serialization contract (rational
//! values as "p/q" strings, floating values as shortest round-trip
//! decimals).

use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use twolocus::Scalar;

use crate::run::CliError;

pub const TRAJECTORY_HEADER: &str = "n,x,y,u,v,D";
pub const STEP_HEADER: &str = "x,y,u,v";
pub const LIMIT_HEADER: &str = "x_lim,y_lim,u_lim,v_lim,alpha,lambda2";
pub const SWEEP_HEADER: &str =
    "a,b,x0,y0,u0,v0,alpha,lambda2,steps,x_lim,y_lim,u_lim,v_lim,oracle_gap,d0";
pub const VERIFY_HEADER: &str = "a,b,x0,y0,u0,v0,alpha,lambda2,steps,converged,limit_check,\
     decay_check,alpha_check,fixed_point_check,limit_gap,decay_worst,alpha_drift,final_d_abs,\
     all_pass";

/// CSV cell for a scalar: `Display` is "p/q" for rationals and the shortest
/// round-trip decimal for floats.
pub fn scalar_cell<S: Scalar>(v: &S) -> String {
    v.to_string()
}

/// JSON value for a scalar: rationals become "p/q" strings, floats become
/// JSON numbers (serialized shortest round-trip).
pub fn scalar_value<S: Scalar>(v: &S) -> Value {
    if S::EXACT {
        Value::String(v.to_string())
    } else {
        serde_json::Number::from_f64(v.to_f64())
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(v.to_string()))
    }
}

#[derive(Serialize)]
pub struct StepRow {
    pub x: Value,
    pub y: Value,
    pub u: Value,
    pub v: Value,
}

#[derive(Serialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub x: Value,
    pub y: Value,
    pub u: Value,
    pub v: Value,
    #[serde(rename = "D")]
    pub d: Value,
}

#[derive(Serialize)]
pub struct LimitRow {
    pub x_lim: Value,
    pub y_lim: Value,
    pub u_lim: Value,
    pub v_lim: Value,
    pub alpha: Value,
    pub lambda2: Value,
}

#[derive(Serialize)]
pub struct SweepRow {
    pub a: Value,
    pub b: Value,
    pub x0: Value,
    pub y0: Value,
    pub u0: Value,
    pub v0: Value,
    pub alpha: Value,
    pub lambda2: Value,
    pub steps_taken: usize,
    pub x_lim: Value,
    pub y_lim: Value,
    pub u_lim: Value,
    pub v_lim: Value,
    pub oracle_gap: Value,
    pub d0: Value,
}

#[derive(Serialize)]
pub struct VerifyRow {
    pub a: Value,
    pub b: Value,
    pub x0: Value,
    pub y0: Value,
    pub u0: Value,
    pub v0: Value,
    pub alpha: Value,
    pub lambda2: Value,
    pub steps_taken: usize,
    pub converged: bool,
    pub limit_check: bool,
    pub decay_check: bool,
    pub alpha_check: bool,
    pub fixed_point_check: bool,
    pub limit_gap: Value,
    pub decay_worst: Value,
    pub alpha_drift: Value,
    pub final_d_abs: Value,
    pub all_pass: bool,
}

pub fn csv_table(header: &str, rows: &[Vec<String>]) -> String {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

pub fn json_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(rows)
        .map_err(|e| CliError::Io(format!("JSON encoding failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn json_single<T: Serialize>(row: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(row)
        .map_err(|e| CliError::Io(format!("JSON encoding failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes to the output path, or to stdout when no path is configured.
pub fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
