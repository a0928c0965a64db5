//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 usage or unreadable/malformed input, 2 validation
//! or invariant failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cmpc_core::gen::{gen_instance, GenConfig};
use cmpc_core::metrics::{util_variance, validate};
use cmpc_core::pd::{check_run, pd_solve, PdOutcome};
use cmpc_core::reference::{ncs_solve, opt_solve, OptStatus, DEFAULT_NODE_BUDGET};
use cmpc_core::{Error as CoreError, Instance, Solution};
use serde_json::json;

use crate::bench::{run_experiment, write_csv, BenchError, ExperimentConfig, SEED_ENV};
use crate::format::{read_instance, trace_entries, write_instance, OracleStatus, SolutionFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Dual tolerance used by `verify`.
const VERIFY_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "cmpc", version, about = "Capacitated minimum power cover solvers and experiment harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Pd,
    Ncs,
    Opt,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded random instances, one JSON file per seed.
    Gen {
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 50.0)]
        kbar: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve one instance and print the solution and its metrics as JSON.
    Solve {
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        oracle_budget: u64,
        /// Include the selection events (pd only).
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and write the CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed base (and the environment variable).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        oracle_budget: Option<u64>,
        /// Record wall-clock times in `runtime_ms`.
        #[arg(long)]
        timing: bool,
    },
    /// Run pd on an instance file or on every `.json` file of a directory and
    /// check the solution, the duals and the charging argument.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also compare against the exact optimum with this node budget.
        #[arg(long)]
        oracle_budget: Option<u64>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] crate::format::FormatError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            _ => EXIT_USAGE,
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(_) | BenchError::Io(_) | BenchError::Csv(_) => CliError::Usage(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::Domain(_) => CliError::Usage(e.to_string()),
        _ => CliError::Invalid(e.to_string()),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Gen { m, n, kbar, lambda, alpha, c, side, seed, trials, out } => {
            let base = GenConfig { m, n, c, alpha, side, lambda, kbar, seed };
            gen(base, trials, &out)
        }
        Command::Solve { algo, input, oracle_budget, trace, out } => {
            let inst = read_instance(&input)?;
            let doc = solve(&inst, algo, oracle_budget, trace)?;
            emit(&serde_json::to_string_pretty(&doc).expect("json"), out.as_deref())
        }
        Command::Bench { config, seed, trials, out, oracle_budget, timing } => {
            let text = fs::read_to_string(&config).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_json(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
            cfg.apply_seed_env(std::env::var(SEED_ENV).ok().as_deref())?;
            if let Some(s) = seed {
                cfg.seed_base = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(b) = oracle_budget {
                cfg.oracle_budget = Some(b);
            }
            cfg.timing |= timing;
            let dest = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            let rows = run_experiment(&cfg)?;
            match dest {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    write_csv(&rows, io::BufWriter::new(file))?;
                }
                None => write_csv(&rows, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Verify { input, oracle_budget } => verify(&input, oracle_budget),
    }
}

fn gen(base: GenConfig, trials: usize, out: &Path) -> Result<(), CliError> {
    base.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if base.servers_coincide() {
        eprintln!("warning: lambda * side = 0, all {} servers sit at the center", base.m);
    }
    fs::create_dir_all(out)?;
    for t in 0..trials {
        let cfg = GenConfig { seed: base.seed.wrapping_add(t as u64), ..base };
        let inst = gen_instance(&cfg).map_err(core_err)?;
        let path = out.join(format!("cmpc_m{}_n{}_seed{}.json", cfg.m, cfg.n, cfg.seed));
        write_instance(&inst, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn metrics_json(inst: &Instance, sol: &Solution, runtime_ms: f64) -> serde_json::Value {
    json!({
        "total_power": sol.total_power,
        "runtime_ms": runtime_ms,
        "util_variance": util_variance(inst, sol),
        "per_server_load": sol.loads(),
    })
}

fn checked(inst: &Instance, sol: &Solution) -> Result<(), CliError> {
    let report = validate(inst, sol);
    if report.is_ok() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("solution fails validation: {:?}", report.violations)))
    }
}

fn solve(inst: &Instance, algo: AlgoArg, budget: u64, trace: bool) -> Result<serde_json::Value, CliError> {
    let start = Instant::now();
    let ms = |s: Instant| s.elapsed().as_secs_f64() * 1e3;
    match algo {
        AlgoArg::Pd => {
            let out = pd_solve(inst).map_err(core_err)?;
            let elapsed = ms(start);
            checked(inst, &out.solution)?;
            let mut doc = json!({
                "algo": "pd",
                "solution": SolutionFile::from(&out.solution),
                "metrics": metrics_json(inst, &out.solution, elapsed),
            });
            if trace {
                doc["trace"] = serde_json::to_value(trace_entries(&out.trace)).expect("json");
            }
            Ok(doc)
        }
        AlgoArg::Ncs => {
            let sol = ncs_solve(inst).map_err(core_err)?;
            let elapsed = ms(start);
            checked(inst, &sol)?;
            Ok(json!({
                "algo": "ncs",
                "solution": SolutionFile::from(&sol),
                "metrics": metrics_json(inst, &sol, elapsed),
            }))
        }
        AlgoArg::Opt => {
            let report = opt_solve(inst, budget);
            let elapsed = ms(start);
            let oracle = OracleStatus::from(&report);
            match (&report.status, &report.solution) {
                (OptStatus::Optimal, Some(sol)) => {
                    checked(inst, sol)?;
                    Ok(json!({
                        "algo": "opt",
                        "oracle": oracle,
                        "solution": SolutionFile::from(sol),
                        "metrics": metrics_json(inst, sol, elapsed),
                    }))
                }
                (OptStatus::Infeasible, _) => Err(CliError::Invalid(format!(
                    "no feasible cover: total capacity {} for {} users",
                    inst.total_capacity(),
                    inst.num_users()
                ))),
                _ => Ok(json!({ "algo": "opt", "oracle": oracle, "solution": null })),
            }
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn instance_files(input: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !input.is_dir() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no .json instance files", input.display())));
    }
    Ok(files)
}

/// Problems found on one instance; empty means it passed.
fn verify_one(inst: &Instance, budget: Option<u64>) -> Result<Vec<String>, CliError> {
    let out: PdOutcome = match pd_solve(inst) {
        Ok(out) => out,
        Err(e @ CoreError::CapacityInvariant { .. }) => return Ok(vec![e.to_string()]),
        Err(e) => return Err(core_err(e)),
    };
    let m = inst.num_servers();
    let mut problems = Vec::new();
    let validation = validate(inst, &out.solution);
    if !validation.is_ok() {
        problems.push(format!("validation: {:?}", validation.violations));
    }
    let report = check_run(inst, &out, VERIFY_TOL);
    for v in &report.dual_violations {
        problems.push(format!("dual: {v:?}"));
    }
    for v in &report.charge_violations {
        problems.push(format!("charging: {v:?}"));
    }
    if report.max_charges_per_user > m {
        problems.push(format!("a user is charged by {} disks, more than m = {m}", report.max_charges_per_user));
    }
    if !report.within_m_theta(m, 1e-9) {
        problems.push(format!("power {} exceeds m * sum theta = {}", report.total_power, m as f64 * report.theta_sum));
    }
    if let Some(budget) = budget {
        let opt = opt_solve(inst, budget);
        if let Some(value) = opt.value() {
            if report.dual_objective > value + 1e-6 {
                problems.push(format!("dual objective {} exceeds optimum {value}", report.dual_objective));
            }
            if report.total_power > m as f64 * value * (1.0 + 1e-9) {
                problems.push(format!("power {} exceeds m * opt = {}", report.total_power, m as f64 * value));
            }
        }
    }
    Ok(problems)
}

fn verify(input: &Path, budget: Option<u64>) -> Result<(), CliError> {
    let files = instance_files(input)?;
    let mut failed = 0;
    for path in &files {
        let inst = read_instance(path)?;
        let problems = verify_one(&inst, budget)?;
        if problems.is_empty() {
            println!("ok   {}", path.display());
        } else {
            failed += 1;
            println!("FAIL {}", path.display());
            for p in problems {
                println!("     {p}");
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Invalid(format!("{failed} of {} instances failed verification", files.len())));
    }
    Ok(())
}
