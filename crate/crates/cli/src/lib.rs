//! Command-line front end for the `pipg` solver.
//!
//! Exit codes: 0 optimal or driver success, 1 usage or input error,
//! 2 primal infeasible, 3 dual infeasible, 4 inconclusive or iteration cap.

pub mod output;
pub mod problem_file;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pipg_core::drs::drs_solve;
use pipg_core::meta::{
    classify_feasibility, eliminate_binaries_with, min_time_bisection, CandidateOrder, FixCarry,
    VerdictKind,
};
use pipg_core::ocp::{build_corridor_problem, build_landing_problem, CorridorParams, QuadrotorParams};
use pipg_core::pipg::{ConicProblem, SolveStatus, SolverConfig};

use output::{history_csv, BisectionJson, EliminationJson, NormJson, SolveJson};
use problem_file::ProblemFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PRIMAL_INFEASIBLE: i32 = 2;
pub const EXIT_DUAL_INFEASIBLE: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pipg", version, about = "Matrix-free conic solver with infeasibility detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Solve the landing problem with the touchdown fixed at step I.
    Landing {
        #[arg(long)]
        tau: usize,
        #[arg(long)]
        i: usize,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        x0: [f64; 6],
        /// Also write the assembled problem to this file.
        #[arg(long)]
        dump_problem: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Find the earliest feasible touchdown step by bisection.
    LandingBisect {
        #[arg(long)]
        tau: usize,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        x0: [f64; 6],
        /// Lower end of the bracket (default 1).
        #[arg(long)]
        lo: Option<usize>,
        /// Upper end of the bracket, which must be feasible (default tau - 1).
        #[arg(long)]
        hi: Option<usize>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Solve the corridor problem with some binaries fixed.
    Corridor {
        #[arg(long)]
        tau: usize,
        /// Fixes as t=v pairs, comma separated.
        #[arg(long, value_parser = parse_fixes, default_value = "")]
        fix: Fixes,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        x0: [f64; 6],
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        xtau: [f64; 6],
        #[arg(long)]
        dump_problem: Option<PathBuf>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Eliminate corridor binaries by infeasibility tests.
    CorridorEliminate {
        #[arg(long)]
        tau: usize,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        x0: [f64; 6],
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        xtau: [f64; 6],
        #[arg(long, value_enum, default_value_t = Order::OneFirst)]
        order: Order,
        /// Test each index without the fixes found at earlier indices.
        #[arg(long)]
        independent: bool,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Print the spectral-norm bounds and step size for a problem file.
    NormEstimate {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Pipg,
    Drs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Order {
    OneFirst,
    ZeroFirst,
}

#[derive(Debug, Clone, Args)]
struct SolverFlags {
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iters: usize,
    /// Step size; defaults to the largest admissible one.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relaxation parameter of the splitting baseline.
    #[arg(long, default_value_t = 1.0)]
    drs_alpha: f64,
}

#[derive(Debug, Clone, Args)]
struct RunFlags {
    #[arg(long, value_enum, default_value_t = Method::Pipg)]
    method: Method,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the iterate history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    history_stride: usize,
    /// Write the result JSON here instead of standard output.
    #[arg(long)]
    result: Option<PathBuf>,
}

type Fixes = BTreeMap<usize, u8>;

fn parse_state(s: &str) -> std::result::Result<[f64; 6], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected 6 comma-separated numbers, found {}", v.len()))
}

fn parse_fixes(s: &str) -> std::result::Result<Fixes, String> {
    let mut out = Fixes::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (t, v) = item
            .split_once('=')
            .ok_or_else(|| format!("{item:?}: expected t=v"))?;
        let t: usize = t.trim().parse().map_err(|e| format!("{item:?}: {e}"))?;
        let v: u8 = match v.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(format!("{item:?}: value must be 0 or 1, found {other:?}")),
        };
        if out.insert(t, v).is_some() {
            return Err(format!("index {t} fixed twice"));
        }
    }
    Ok(out)
}

impl SolverFlags {
    fn config(&self, history_stride: usize) -> SolverConfig<f64> {
        SolverConfig {
            gamma: self.gamma,
            epsilon: self.eps,
            max_iters: self.max_iters,
            alpha: self.alpha,
            seed: self.seed,
            drs_alpha: self.drs_alpha,
            history_stride,
            ..SolverConfig::default()
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Messages go to standard error, results to standard output or the
/// requested files.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<pipg_core::Error>() {
                Some(pipg_core::Error::Precondition(_)) => EXIT_INCONCLUSIVE,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve { problem, run } => {
            let prob = ProblemFile::read(&problem)?.to_problem()?;
            solve_and_report(&prob, &run)
        }
        Command::Landing {
            tau,
            i,
            x0,
            dump_problem,
            run,
        } => {
            let prob = build_landing_problem(tau, i, &x0, &QuadrotorParams::default())?;
            dump(&prob, dump_problem.as_deref())?;
            solve_and_report(&prob, &run)
        }
        Command::LandingBisect {
            tau,
            x0,
            lo,
            hi,
            solver,
            result,
        } => {
            let start = Instant::now();
            let lo = lo.unwrap_or(1);
            let hi = hi.unwrap_or(tau.saturating_sub(1));
            let rep = min_time_bisection(&x0, tau, &QuadrotorParams::default(), &solver.config(0), lo, hi)?;
            println!("{}", rep.minimum);
            if let Some(path) = result {
                write_json(&BisectionJson::new(&rep, start.elapsed().as_secs_f64()), Some(&path))?;
            }
            Ok(EXIT_OK)
        }
        Command::Corridor {
            tau,
            fix,
            x0,
            xtau,
            dump_problem,
            run,
        } => {
            let prob = build_corridor_problem(
                tau,
                &fix,
                &x0,
                &xtau,
                &QuadrotorParams::default(),
                &CorridorParams::default(),
            )?;
            dump(&prob, dump_problem.as_deref())?;
            solve_and_report(&prob, &run)
        }
        Command::CorridorEliminate {
            tau,
            x0,
            xtau,
            order,
            independent,
            solver,
            result,
        } => {
            let start = Instant::now();
            let order = match order {
                Order::OneFirst => CandidateOrder::OneFirst,
                Order::ZeroFirst => CandidateOrder::ZeroFirst,
            };
            let carry = if independent {
                FixCarry::Independent
            } else {
                FixCarry::Accumulate
            };
            let ledger = eliminate_binaries_with(
                &x0,
                &xtau,
                tau,
                &QuadrotorParams::default(),
                &CorridorParams::default(),
                &solver.config(0),
                order,
                carry,
            )?;
            write_json(
                &EliminationJson::new(&ledger, start.elapsed().as_secs_f64()),
                result.as_deref(),
            )?;
            Ok(EXIT_OK)
        }
        Command::NormEstimate { problem, gamma, seed } => {
            let prob = ProblemFile::read(&problem)?.to_problem()?;
            let cfg = SolverConfig {
                gamma,
                seed,
                ..SolverConfig::default()
            };
            cfg.validate()?;
            let step = cfg.resolve_step(&prob)?;
            write_json(
                &NormJson {
                    lambda: step.lambda,
                    nu: step.nu,
                    gamma,
                    alpha: step.alpha,
                    seed,
                },
                None,
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn dump(prob: &ConicProblem<f64>, path: Option<&Path>) -> Result<()> {
    if let Some(path) = path {
        let text = ProblemFile::from_problem(prob)?.to_json();
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve_and_report(prob: &ConicProblem<f64>, run: &RunFlags) -> Result<i32> {
    let stride = if run.history.is_some() { run.history_stride } else { 0 };
    if run.history.is_some() && stride == 0 {
        bail!("--history-stride must be positive when --history is given");
    }
    let cfg = run.solver.config(stride);
    cfg.validate().map_err(|e| anyhow!("solver flags: {e}"))?;
    let start = Instant::now();
    let (report, history, code) = match run.method {
        Method::Pipg => {
            let v = classify_feasibility(prob, &cfg)?;
            let secs = start.elapsed().as_secs_f64();
            let objective = (v.kind == VerdictKind::Feasible).then(|| prob.objective(&v.outcome.z));
            let code = match v.kind {
                VerdictKind::Feasible => EXIT_OK,
                VerdictKind::PrimalInfeasible => EXIT_PRIMAL_INFEASIBLE,
                VerdictKind::DualInfeasible => EXIT_DUAL_INFEASIBLE,
                VerdictKind::Inconclusive => EXIT_INCONCLUSIVE,
            };
            (SolveJson::from_verdict(&v, objective, secs), v.outcome.history, code)
        }
        Method::Drs => {
            let out = drs_solve(prob, &cfg)?;
            let secs = start.elapsed().as_secs_f64();
            let objective = (out.status == SolveStatus::Optimal).then(|| prob.objective(&out.z));
            let code = match out.status {
                SolveStatus::Optimal => EXIT_OK,
                SolveStatus::PrimalInfeasible => EXIT_PRIMAL_INFEASIBLE,
                SolveStatus::DualInfeasible => EXIT_DUAL_INFEASIBLE,
                SolveStatus::MaxIterations => EXIT_INCONCLUSIVE,
            };
            let report = SolveJson::from_outcome("drs", &out, objective, secs);
            (report, out.history, code)
        }
    };
    if let Some(path) = &run.history {
        std::fs::write(path, history_csv(&history)).with_context(|| format!("writing {}", path.display()))?;
    }
    write_json(&report, run.result.as_deref())?;
    Ok(code)
}
