//! Command-line front end: single-step evaluation, trajectory runs, limit
//! prediction, parameter-grid sweeps, and full verification reports, with
//! CSV/JSON persistence.

mod config;
mod emit;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use config::{Arithmetic, Format, Mode, ResolvedConfig};
use run::CliError;

#[derive(Parser)]
#[command(
    name = "twolocus",
    version,
    about = "Two-locus gamete-frequency dynamics: steps, orbits, limits, sweeps, verification"
)]
struct Cli {
    #[command(subcommand)]
    mode: Option<ModeCmd>,

    /// Initial point "x,y,u,v" (decimals or p/q fractions; must sum to 1).
    /// Repeatable in sweep/verify to form a point grid
    #[arg(long = "point", global = true, action = ArgAction::Append)]
    point: Vec<String>,

    /// Recombination parameter a in [0,1]
    #[arg(long, global = true)]
    a: Option<String>,

    /// Recombination parameter b in [0,1]
    #[arg(long, global = true)]
    b: Option<String>,

    /// Grid of a values "min:max:count" (inclusive endpoints; count=1 means
    /// the single value min); sweep/verify only
    #[arg(long = "a-grid", global = true)]
    a_grid: Option<String>,

    /// Grid of b values "min:max:count"; sweep/verify only
    #[arg(long = "b-grid", global = true)]
    b_grid: Option<String>,

    /// Convergence threshold on the successive-iterate max-norm
    /// (default 1e-10)
    #[arg(long, global = true)]
    eps: Option<String>,

    /// Step budget for convergence runs (default 10000 floating,
    /// 200 rational)
    #[arg(long = "max-steps", global = true)]
    max_steps: Option<usize>,

    /// Arithmetic backend (default floating)
    #[arg(long, global = true, value_enum)]
    arithmetic: Option<ArithmeticArg>,

    /// Output format (default csv; step/limit print human-readable text
    /// when neither --format nor --out is given)
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Output file path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Config file of "key = value" lines mirroring the flag names;
    /// flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Subcommand)]
enum ModeCmd {
    /// Apply the step map once and print the successor state
    Step,
    /// Iterate to convergence, recording the full orbit table
    Trajectory,
    /// Print the closed-form limit of the orbit without iterating
    Limit,
    /// Run every (a, b, point) grid cell to convergence
    Sweep,
    /// Check iteration against the closed-form oracles on every grid cell
    Verify,
}

impl From<ModeCmd> for Mode {
    fn from(cmd: ModeCmd) -> Self {
        match cmd {
            ModeCmd::Step => Mode::Step,
            ModeCmd::Trajectory => Mode::Trajectory,
            ModeCmd::Limit => Mode::Limit,
            ModeCmd::Sweep => Mode::Sweep,
            ModeCmd::Verify => Mode::Verify,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ArithmeticArg {
    Rational,
    Floating,
}

impl From<ArithmeticArg> for Arithmetic {
    fn from(arg: ArithmeticArg) -> Self {
        match arg {
            ArithmeticArg::Rational => Arithmetic::Rational,
            ArithmeticArg::Floating => Arithmetic::Floating,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn resolve(cli: Cli) -> Result<ResolvedConfig, CliError> {
    let file = match &cli.config {
        Some(path) => config::load_file(path)?,
        None => config::FileConfig::default(),
    };
    let mode = cli
        .mode
        .map(Mode::from)
        .or(file.mode)
        .ok_or_else(|| CliError::Usage(
            "no mode given: pass a subcommand (step|trajectory|limit|sweep|verify) \
             or set mode in the config file"
                .to_string(),
        ))?;
    let points = if cli.point.is_empty() {
        file.points
    } else {
        cli.point
    };
    Ok(ResolvedConfig {
        mode,
        points,
        a: cli.a.or(file.a),
        b: cli.b.or(file.b),
        a_grid: cli.a_grid.or(file.a_grid),
        b_grid: cli.b_grid.or(file.b_grid),
        eps: cli.eps.or(file.eps),
        max_steps: cli.max_steps.or(file.max_steps),
        arithmetic: cli
            .arithmetic
            .map(Arithmetic::from)
            .or(file.arithmetic)
            .unwrap_or_default(),
        format: cli.format.map(Format::from).or(file.format),
        out: cli.out.or(file.out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(cli).and_then(|cfg| run::execute(&cfg));
    match outcome {
        Ok(status) => ExitCode::from(run::exit_code(&status)),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
