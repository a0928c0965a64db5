//! Experiment harness: parameter sweeps over seeded instances, one CSV row
//! per (instance, algorithm) plus per-point means.

use std::io::Write;
use std::time::Instant;

use cmpc_core::gen::{gen_instance, GenConfig};
use cmpc_core::metrics::{approximation_ratio, util_variance, validate};
use cmpc_core::pd::pd_solve;
use cmpc_core::reference::{ncs_solve, opt_solve, OptStatus};
use cmpc_core::{Instance, Solution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::instance_json;

pub const CSV_HEADER: [&str; 13] = [
    "experiment_id",
    "seed",
    "m",
    "n",
    "K",
    "lambda",
    "alpha",
    "c",
    "algo",
    "total_power",
    "runtime_ms",
    "ratio_vs_opt",
    "util_variance",
];

pub const SEED_ENV: &str = "CMPC_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Pd,
    Ncs,
    Opt,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Pd => "pd",
            Algo::Ncs => "ncs",
            Algo::Opt => "opt",
        }
    }
}

/// The swept variable and its points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sweep {
    /// Number of users.
    N { n: Vec<usize> },
    /// Grid over server count and total capacity `K = m * kbar`.
    MK { m: Vec<usize>, k: Vec<f64> },
    /// Grid over server count and server-area ratio.
    MLambda { m: Vec<usize>, lambda: Vec<f64> },
    Alpha { alpha: Vec<f64> },
}

/// Parameters held fixed across a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedParams {
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    pub l: f64,
    pub lambda: f64,
    pub kbar: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        let g = GenConfig::default();
        FixedParams { m: g.m, n: g.n, c: g.c, alpha: g.alpha, l: g.side, lambda: g.lambda, kbar: g.kbar }
    }
}

fn default_trials() -> usize {
    50
}

fn default_algos() -> Vec<Algo> {
    vec![Algo::Pd, Algo::Ncs, Algo::Opt]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub sweep: Sweep,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Node budget for the exact oracle; `None` skips it.
    #[serde(default)]
    pub oracle_budget: Option<u64>,
    #[serde(default = "default_algos")]
    pub algos: Vec<Algo>,
    /// CSV destination; stdout when absent.
    #[serde(default)]
    pub output: Option<String>,
    /// Record wall-clock times. Off by default so the CSV is reproducible
    /// byte for byte; `runtime_ms` is then left empty.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("point {point}, seed {seed}: {source}")]
    Generate { point: usize, seed: u64, source: cmpc_core::Error },
    #[error("{algo} failed on seed {seed}: {message}\ninstance:\n{instance}")]
    Solver { algo: &'static str, seed: u64, message: String, instance: String },
    #[error("{algo} returned an invalid solution on seed {seed}: {violations}\ninstance:\n{instance}")]
    Validation { algo: &'static str, seed: u64, violations: String, instance: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| BenchError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.algos.is_empty() {
            return Err(BenchError::Config("algos must not be empty".into()));
        }
        let empty = match &self.sweep {
            Sweep::N { n } => n.is_empty(),
            Sweep::MK { m, k } => m.is_empty() || k.is_empty(),
            Sweep::MLambda { m, lambda } => m.is_empty() || lambda.is_empty(),
            Sweep::Alpha { alpha } => alpha.is_empty(),
        };
        if empty {
            return Err(BenchError::Config("sweep has no points".into()));
        }
        for (i, p) in self.points().iter().enumerate() {
            p.validate().map_err(|e| BenchError::Config(format!("sweep point {i}: {e}")))?;
        }
        Ok(())
    }

    /// Applies `CMPC_SEED` from `value` (normally `std::env::var`).
    pub fn apply_seed_env(&mut self, value: Option<&str>) -> Result<(), BenchError> {
        if let Some(v) = value {
            self.seed_base = v
                .trim()
                .parse()
                .map_err(|_| BenchError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Generator settings for each sweep point, in sweep order (row-major
    /// for grids). The seed is filled in per trial.
    pub fn points(&self) -> Vec<GenConfig> {
        let f = &self.fixed;
        let base = GenConfig { m: f.m, n: f.n, c: f.c, alpha: f.alpha, side: f.l, lambda: f.lambda, kbar: f.kbar, seed: 0 };
        match &self.sweep {
            Sweep::N { n } => n.iter().map(|&n| GenConfig { n, ..base }).collect(),
            Sweep::MK { m, k } => m
                .iter()
                .flat_map(|&m| k.iter().map(move |&k| GenConfig { m, kbar: if m == 0 { 0.0 } else { k / m as f64 }, ..base }))
                .collect(),
            Sweep::MLambda { m, lambda } => {
                m.iter().flat_map(|&m| lambda.iter().map(move |&lambda| GenConfig { m, lambda, ..base })).collect()
            }
            Sweep::Alpha { alpha } => alpha.iter().map(|&alpha| GenConfig { alpha, ..base }).collect(),
        }
    }

    pub fn seed(&self, trial: usize) -> u64 {
        self.seed_base.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment_id: String,
    /// `None` marks a per-point mean row.
    pub seed: Option<u64>,
    pub m: usize,
    pub n: usize,
    /// Nominal total capacity `m * kbar`.
    pub k_total: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub c: f64,
    pub algo: Algo,
    pub total_power: f64,
    pub runtime_ms: Option<f64>,
    pub ratio_vs_opt: Option<f64>,
    pub util_variance: f64,
}

impl ResultRow {
    pub fn record(&self) -> [String; 13] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.experiment_id.clone(),
            self.seed.map_or_else(|| "mean".to_string(), |s| s.to_string()),
            self.m.to_string(),
            self.n.to_string(),
            self.k_total.to_string(),
            self.lambda.to_string(),
            self.alpha.to_string(),
            self.c.to_string(),
            self.algo.name().to_string(),
            self.total_power.to_string(),
            opt(self.runtime_ms),
            opt(self.ratio_vs_opt),
            self.util_variance.to_string(),
        ]
    }
}

struct Measured {
    algo: Algo,
    solution: Solution,
    runtime_ms: Option<f64>,
}

fn timed<T>(timing: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    (out, timing.then(|| start.elapsed().as_secs_f64() * 1e3))
}

fn run_trial(cfg: &ExperimentConfig, point: usize, gen: GenConfig) -> Result<Vec<ResultRow>, BenchError> {
    let seed = gen.seed;
    let inst = gen_instance(&gen).map_err(|source| BenchError::Generate { point, seed, source })?;
    let solver_err = |algo: Algo, message: String| BenchError::Solver {
        algo: algo.name(),
        seed,
        message,
        instance: instance_json(&inst),
    };

    let mut measured = Vec::new();
    let mut opt_power = None;
    for &algo in &cfg.algos {
        match algo {
            Algo::Pd => {
                let (out, ms) = timed(cfg.timing, || pd_solve(&inst));
                let out = out.map_err(|e| solver_err(algo, e.to_string()))?;
                measured.push(Measured { algo, solution: out.solution, runtime_ms: ms });
            }
            Algo::Ncs => {
                let (sol, ms) = timed(cfg.timing, || ncs_solve(&inst));
                let sol = sol.map_err(|e| solver_err(algo, e.to_string()))?;
                measured.push(Measured { algo, solution: sol, runtime_ms: ms });
            }
            Algo::Opt => {
                let Some(budget) = cfg.oracle_budget else { continue };
                let (report, ms) = timed(cfg.timing, || opt_solve(&inst, budget));
                match report.status {
                    OptStatus::Optimal => {
                        let sol = report.solution.expect("optimal report carries a solution");
                        opt_power = Some(sol.total_power);
                        measured.push(Measured { algo, solution: sol, runtime_ms: ms });
                    }
                    OptStatus::BudgetExceeded => {}
                    OptStatus::Infeasible => return Err(solver_err(algo, "oracle found no feasible cover".into())),
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(measured.len());
    for m in measured {
        check(&inst, &m.solution, m.algo, seed)?;
        let ratio = match opt_power {
            Some(opt) => Some(approximation_ratio(m.solution.total_power, opt).map_err(|e| solver_err(m.algo, e.to_string()))?),
            None => None,
        };
        rows.push(ResultRow {
            experiment_id: cfg.id.clone(),
            seed: Some(seed),
            m: gen.m,
            n: gen.n,
            k_total: gen.m as f64 * gen.kbar,
            lambda: gen.lambda,
            alpha: gen.alpha,
            c: gen.c,
            algo: m.algo,
            total_power: m.solution.total_power,
            runtime_ms: m.runtime_ms,
            ratio_vs_opt: ratio,
            util_variance: util_variance(&inst, &m.solution),
        });
    }
    Ok(rows)
}

fn check(inst: &Instance, sol: &Solution, algo: Algo, seed: u64) -> Result<(), BenchError> {
    let report = validate(inst, sol);
    if report.is_ok() {
        return Ok(());
    }
    Err(BenchError::Validation {
        algo: algo.name(),
        seed,
        violations: format!("{:?}", report.violations),
        instance: instance_json(inst),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn summarize(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut out = Vec::new();
    for algo in [Algo::Pd, Algo::Ncs, Algo::Opt] {
        let of: Vec<&ResultRow> = rows.iter().filter(|r| r.algo == algo).collect();
        let Some(first) = of.first() else { continue };
        out.push(ResultRow {
            seed: None,
            algo,
            total_power: mean(of.iter().map(|r| r.total_power)).unwrap_or(0.0),
            runtime_ms: mean(of.iter().filter_map(|r| r.runtime_ms)),
            ratio_vs_opt: mean(of.iter().filter_map(|r| r.ratio_vs_opt)),
            util_variance: mean(of.iter().map(|r| r.util_variance)).unwrap_or(0.0),
            ..(*first).clone()
        });
    }
    out
}

/// Runs every (point, trial) in parallel and returns the rows in (point,
/// trial, algo) order, followed by the mean rows of each point.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, BenchError> {
    cfg.validate()?;
    let points = cfg.points();
    let jobs: Vec<(usize, GenConfig)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| (0..cfg.trials).map(move |t| (i, GenConfig { seed: cfg.seed(t), ..*p })))
        .collect();
    let per_job: Vec<Vec<ResultRow>> =
        jobs.par_iter().map(|&(i, gen)| run_trial(cfg, i, gen)).collect::<Result<_, _>>()?;

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut summary = Vec::new();
    for chunk in per_job.chunks(cfg.trials) {
        let flat: Vec<ResultRow> = chunk.iter().flatten().cloned().collect();
        summary.extend(summarize(&flat));
        rows.extend(flat);
    }
    rows.extend(summary);
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String, BenchError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sweep: Sweep) -> ExperimentConfig {
        ExperimentConfig {
            id: "t".into(),
            sweep,
            fixed: FixedParams { m: 2, n: 6, kbar: 4.0, ..FixedParams::default() },
            trials: 3,
            seed_base: 100,
            oracle_budget: Some(100_000),
            algos: default_algos(),
            output: None,
            timing: false,
        }
    }

    #[test]
    fn config_defaults_from_json() {
        let cfg = ExperimentConfig::from_json(r#"{"id": "x", "sweep": {"kind": "n", "n": [20, 30]}}"#).unwrap();
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.fixed, FixedParams::default());
        assert_eq!(cfg.oracle_budget, None);
        assert!(!cfg.timing);
        assert_eq!(cfg.points().len(), 2);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"id": "x", "sweep": {"kind": "n", "n": []}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"id": "x", "trials": 0, "sweep": {"kind": "n", "n": [5]}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"id": "x", "sweep": {"kind": "alpha", "alpha": [0.5]}}"#).is_err());
        let err = ExperimentConfig::from_json("{\n\"id\": 3}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn grid_points_are_row_major() {
        let cfg = small(Sweep::MK { m: vec![2, 4], k: vec![8.0, 12.0] });
        let pts: Vec<(usize, f64)> = cfg.points().iter().map(|p| (p.m, p.kbar)).collect();
        assert_eq!(pts, vec![(2, 4.0), (2, 6.0), (4, 2.0), (4, 3.0)]);
        let cfg = small(Sweep::MLambda { m: vec![1, 3], lambda: vec![0.5, 1.0] });
        let pts: Vec<(usize, f64)> = cfg.points().iter().map(|p| (p.m, p.lambda)).collect();
        assert_eq!(pts, vec![(1, 0.5), (1, 1.0), (3, 0.5), (3, 1.0)]);
    }

    #[test]
    fn seed_env_override() {
        let mut cfg = small(Sweep::N { n: vec![5] });
        cfg.apply_seed_env(None).unwrap();
        assert_eq!(cfg.seed_base, 100);
        cfg.apply_seed_env(Some("7")).unwrap();
        assert_eq!(cfg.seed(2), 9);
        assert!(cfg.apply_seed_env(Some("-1")).is_err());
    }

    #[test]
    fn rows_in_point_trial_algo_order_then_means() {
        let cfg = small(Sweep::N { n: vec![5, 7] });
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 3 + 2 * 3);
        let keys: Vec<(usize, Option<u64>, &str)> = rows.iter().map(|r| (r.n, r.seed, r.algo.name())).collect();
        assert_eq!(keys[..4], [(5, Some(100), "pd"), (5, Some(100), "ncs"), (5, Some(100), "opt"), (5, Some(101), "pd")]);
        assert_eq!(keys[18..], [
            (5, None, "pd"),
            (5, None, "ncs"),
            (5, None, "opt"),
            (7, None, "pd"),
            (7, None, "ncs"),
            (7, None, "opt")
        ]);
        for r in &rows {
            assert!(r.runtime_ms.is_none());
            assert!(r.ratio_vs_opt.unwrap() >= 1.0 - 1e-12);
        }
        let pd_mean = rows[18].total_power;
        let direct = rows[..9].iter().filter(|r| r.algo == Algo::Pd).map(|r| r.total_power).sum::<f64>() / 3.0;
        assert!((pd_mean - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn exceeded_budget_drops_opt_rows_and_ratios() {
        let mut cfg = small(Sweep::N { n: vec![8] });
        cfg.oracle_budget = Some(1);
        let rows = run_experiment(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.algo != Algo::Opt && r.ratio_vs_opt.is_none()));
        let csv = to_csv_string(&rows).unwrap();
        let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!((first[10], first[11]), ("", ""));
    }

    #[test]
    fn csv_header_and_determinism() {
        let cfg = small(Sweep::Alpha { alpha: vec![1.0, 2.0] });
        let a = to_csv_string(&run_experiment(&cfg).unwrap()).unwrap();
        let b = to_csv_string(&run_experiment(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn timing_fills_runtime_only() {
        let mut cfg = small(Sweep::N { n: vec![6] });
        let plain = run_experiment(&cfg).unwrap();
        cfg.timing = true;
        let timed = run_experiment(&cfg).unwrap();
        for (a, b) in plain.iter().zip(&timed) {
            assert!(b.runtime_ms.is_some());
            assert_eq!(ResultRow { runtime_ms: None, ..b.clone() }, *a);
        }
    }
}
