//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sparsectl_core::criteria::Analysis;
use sparsectl_core::oracle::{brute_force_check_with_budget, DEFAULT_STATE_BUDGET};
use sparsectl_core::{
    default_horizon, design_sparse_inputs, simulate, verify_design, DesignProblem, Error,
    LinearSystem, SparseInputSequence, TolerancePolicy,
};

use crate::format::{self, FormatError, SolutionJson, TrajectoryJson};
use crate::render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_UNREACHABLE: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "sparsectl",
    version,
    about = "Output controllability under sparse inputs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// System file: {"A": [[..]], "B": [[..]], "C": [[..]], "name": ".."}
    pub system: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, env = "SPARSECTL_RANK_TOL")]
    pub rank_tol: Option<f64>,
    /// Residual, clustering and design tolerance.
    #[arg(long, env = "SPARSECTL_RESIDUAL_TOL")]
    pub residual_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report: ranks, metric, bounds and per-s verdicts.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Sparsity levels to evaluate (default: 1..=m).
        #[arg(long, value_delimiter = ',')]
        sparsity: Vec<usize>,
    },
    /// Every test at one sparsity level.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sparsity: usize,
    },
    /// Exhaustive support search.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sparsity: usize,
        /// Largest horizon explored (default: the constructive bound).
        #[arg(long)]
        horizon: Option<usize>,
        /// Cap on distinct output subspaces visited.
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
    },
    /// Greedy piecewise-sparse input design.
    Design {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sparsity: usize,
        /// Initial state: file, JSON array or comma list (default: zero).
        #[arg(long)]
        x0: Option<String>,
        /// Target output: file, JSON array or comma list.
        #[arg(long)]
        yf: String,
        /// Horizon (default: n).
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Forward simulation of given inputs.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Inputs u_1..u_K as a JSON array of arrays, inline or in a file.
        #[arg(long)]
        inputs: String,
        #[arg(long)]
        x0: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Core(Error::TargetUnreachable { .. }) => EXIT_UNREACHABLE,
            _ => EXIT_INPUT,
        }
    }
}

fn policy(c: &Common) -> Result<TolerancePolicy, Error> {
    let d = TolerancePolicy::default();
    TolerancePolicy::new(
        c.rank_tol.unwrap_or(d.relative_rank_tol),
        c.residual_tol.unwrap_or(d.residual_tol),
    )
}

fn load(c: &Common) -> Result<(LinearSystem, TolerancePolicy), CliError> {
    let sys = format::load_system(&c.system)?;
    Ok((sys, policy(c)?))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

fn initial_state(
    arg: &Option<String>,
    sys: &LinearSystem,
) -> Result<sparsectl_core::Vector, FormatError> {
    match arg {
        Some(a) => format::parse_vector("x0", a),
        None => Ok(sparsectl_core::Vector::zeros(sys.state_dim())),
    }
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let mut emit = |s: String| {
        let _ = out.write_all(s.as_bytes());
        if !s.ends_with('\n') {
            let _ = out.write_all(b"\n");
        }
    };
    match cmd {
        Command::Analyze { common, sparsity } => {
            let (sys, pol) = load(common)?;
            let s_list: Vec<usize> = if sparsity.is_empty() {
                (1..=sys.input_dim()).collect()
            } else {
                sparsity.clone()
            };
            let report = Analysis::new(&sys, &pol)?.report(&s_list)?;
            emit(match common.format {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Text => render::report_text(&report),
            });
            Ok(if report.output_controllable {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            })
        }
        Command::Check { common, sparsity } => {
            let (sys, pol) = load(common)?;
            let an = Analysis::new(&sys, &pol)?;
            let s = *sparsity;
            let v = an.verdict(s)?;
            emit(match common.format {
                OutputFormat::Json => {
                    let nec = an.necessary(s)?;
                    let suf = an.sufficient(s)?;
                    to_json(&json!({
                        "verdict": v,
                        "rank_CW": an.rank_cw(),
                        "n": sys.output_dim(),
                        "necessary_bound": nec.bound,
                        "necessary_argmax": nec.argmax,
                        "sufficient_bound": suf.bound,
                        "sufficient_argmax": suf.argmax,
                    }))
                }
                OutputFormat::Text => render::check_lines(&an, s)?,
            });
            Ok(match (v.necessary_holds, v.sufficient_holds) {
                (_, true) => EXIT_OK,
                (true, false) => EXIT_INDETERMINATE,
                (false, false) => EXIT_NEGATIVE,
            })
        }
        Command::Oracle {
            common,
            sparsity,
            horizon,
            budget,
        } => {
            let (sys, pol) = load(common)?;
            let k_max = match horizon {
                Some(k) => *k,
                None => default_horizon(&sys, *sparsity, &pol)?,
            };
            let v = brute_force_check_with_budget(&sys, *sparsity, k_max, *budget, &pol)?;
            emit(match common.format {
                OutputFormat::Json => to_json(&v),
                OutputFormat::Text => render::oracle_text(&v),
            });
            Ok(if v.is_controllable() {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            })
        }
        Command::Design {
            common,
            sparsity,
            x0,
            yf,
            horizon,
        } => {
            let (sys, pol) = load(common)?;
            let x0 = initial_state(x0, &sys)?;
            let yf = format::parse_vector("yf", yf)?;
            let mut p =
                DesignProblem::new(&sys, x0.clone(), yf.clone(), *sparsity, pol.residual_tol);
            if let Some(k) = horizon {
                p = p.with_horizon(*k);
            }
            let sol = match design_sparse_inputs(&p, &pol) {
                Ok(sol) => sol,
                Err(Error::TargetUnreachable { residual, supports }) => {
                    let _ = writeln!(
                        err,
                        "greedy design failed: residual {residual:e} above tolerance {:e} \
                         (this is a heuristic failure, not a proof of unreachability); supports tried {supports:?}",
                        pol.residual_tol
                    );
                    return Ok(EXIT_UNREACHABLE);
                }
                Err(e) => return Err(e.into()),
            };
            if !sol.output_controllable {
                let _ = writeln!(
                    err,
                    "warning: rank(CW) < n, the target may be unreachable in general"
                );
            }
            let simulated = verify_design(&sys, &x0, &sol, &yf)?;
            emit(match common.format {
                OutputFormat::Json => to_json(&SolutionJson::from(&sol)),
                OutputFormat::Text => render::design_text(&sol, simulated),
            });
            Ok(EXIT_OK)
        }
        Command::Simulate { common, inputs, x0 } => {
            let (sys, _) = load(common)?;
            let x0 = initial_state(x0, &sys)?;
            let u = format::parse_input_sequence(inputs)?;
            let m = sys.input_dim();
            let seq = SparseInputSequence::new(u, m, m)?;
            let t = simulate(&sys, &x0, &seq)?;
            emit(match common.format {
                OutputFormat::Json => to_json(&TrajectoryJson::from(&t)),
                OutputFormat::Text => render::trajectory_text(&t),
            });
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
