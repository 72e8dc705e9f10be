mod eval;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use nees_core::figures::{figure_set, figure_sets};
use nees_core::selftest::{run_selftest, Level};
use nees_core::{integrate, EesParams, IntegratorConfig};

use crate::eval::{EvalArgs, Function};

#[derive(Parser)]
#[command(name = "nees", version, about = "Extended Euler systems and generalized elliptic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a function on a grid or at one argument; prints CSV rows.
    Eval {
        function: Function,
        #[command(flatten)]
        args: EvalArgs,
    },
    /// Integrate an N-EES given as JSON `{"alphas": [...], "ic": [...]}`.
    Solve(SolveArgs),
    /// Run the invariant and cross-path checks; prints a JSON report.
    Selftest {
        #[arg(default_value = "quick")]
        level: Level,
        /// Multiplies every check tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// List the named parameter sets accepted by `solve --figure`.
    Figures,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON file with the system, `-` for stdin.
    #[arg(conflicts_with = "figure", required_unless_present = "figure")]
    input: Option<PathBuf>,
    /// Use a named parameter set instead of a file.
    #[arg(long)]
    figure: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    #[arg(long, default_value_t = 20.0)]
    to: f64,
    /// Number of grid rows.
    #[arg(long, default_value_t = 201)]
    count: usize,
    /// Print every accepted step instead of a uniform grid.
    #[arg(long, conflicts_with = "count")]
    nodes: bool,
    #[arg(long, env = "NEES_TOL", default_value_t = 1e-12)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-14)]
    abs_tol: f64,
    /// Exit with status 2 when the first-integral drift exceeds this.
    #[arg(long, default_value_t = 1e-9)]
    max_drift: f64,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Numerical(String),
    SelfTest,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Numerical(msg) => f.write_str(msg),
            Failure::SelfTest => f.write_str("self-test failed"),
        }
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<nees_core::Error>() {
            return if e.is_domain() { 1 } else { 2 };
        }
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Numerical(_) => 2,
                Failure::SelfTest => 3,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut out = io::BufWriter::new(io::stdout().lock());
    let result = run(cli.command, &mut out).and_then(|()| out.flush().context("writing output"));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> anyhow::Result<()> {
    match command {
        Command::Eval { function, args } => eval::run(function, &args, out),
        Command::Solve(args) => solve(&args, out),
        Command::Selftest { level, tolerance_scale } => {
            if !(tolerance_scale > 0.0) {
                return Err(anyhow!(nees_core::Error::Domain("tolerance scale must be positive".into())));
            }
            let report = run_selftest(level, tolerance_scale);
            writeln!(out, "{}", report.to_json())?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::SelfTest.into())
            }
        }
        Command::Figures => {
            for set in figure_sets() {
                writeln!(out, "{}\t{}", set.name, set.params.to_json())?;
            }
            Ok(())
        }
    }
}

fn read_params(args: &SolveArgs) -> anyhow::Result<EesParams> {
    if let Some(name) = &args.figure {
        return Ok(figure_set(name)?.params);
    }
    let path = args.input.as_ref().expect("clap requires input or figure");
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    EesParams::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn solve(args: &SolveArgs, out: &mut impl Write) -> anyhow::Result<()> {
    if args.count < 2 {
        bail!(nees_core::Error::Domain("grid count must be at least 2".into()));
    }
    let params = read_params(args)?;
    let cfg = IntegratorConfig::new(args.from, args.to).with_tolerances(args.rel_tol, args.abs_tol);
    let traj = integrate(&params, &cfg)?;
    let csv = if args.nodes { traj.to_csv() } else { traj.to_csv_grid(args.count)? };
    out.write_all(csv.as_bytes())?;
    let report = traj.report();
    eprintln!(
        "drift {:.3e} (threshold {:.1e}), {} steps, {} rejected, {} evaluations",
        traj.drift(),
        args.max_drift,
        report.steps,
        report.rejected,
        report.evaluations
    );
    if traj.drift() > args.max_drift {
        return Err(Failure::Numerical(format!(
            "first-integral drift {:.3e} exceeds {:.1e}",
            traj.drift(),
            args.max_drift
        ))
        .into());
    }
    Ok(())
}
