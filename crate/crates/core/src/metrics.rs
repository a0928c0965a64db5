//! Solution validation and the reported metrics.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{order_key, Instance};
use crate::solution::Solution;

/// Which integer-program constraint a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// A user is unassigned, or assigned to a server whose disk misses it.
    Coverage,
    /// A server serves more users than its capacity.
    Capacity,
    /// A server's disk is malformed (wrong center, or the solution does not
    /// hold exactly one slot per server).
    SingleDisk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub coverage_ok: bool,
    pub capacity_ok: bool,
    pub single_disk_ok: bool,
    /// `(constraint, offending user or server id)`.
    pub violations: Vec<(Constraint, usize)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(instance: &Instance, solution: &Solution) -> ValidationReport {
    let m = instance.num_servers();
    let mut violations = Vec::new();
    if solution.chosen_disk.len() != m {
        violations.push((Constraint::SingleDisk, solution.chosen_disk.len()));
    }
    for (s, disk) in solution.chosen_disk.iter().enumerate() {
        if disk.is_some_and(|d| d.server != s) {
            violations.push((Constraint::SingleDisk, s));
        }
    }
    let mut loads = alloc::vec![0u64; m];
    for user in instance.users() {
        let Some(&s) = solution.assignment.get(user.id) else {
            violations.push((Constraint::Coverage, user.id));
            continue;
        };
        let inside = s < m
            && solution.chosen_disk.get(s).copied().flatten().is_some_and(|d| {
                let server = &instance.servers()[s];
                order_key(server, user) <= d.key
            });
        if !inside {
            violations.push((Constraint::Coverage, user.id));
        }
        if s < m {
            loads[s] += 1;
        }
    }
    if solution.assignment.len() != instance.num_users() {
        violations.push((Constraint::Coverage, solution.assignment.len()));
    }
    for (server, &load) in instance.servers().iter().zip(&loads) {
        if load > u64::from(server.capacity) {
            violations.push((Constraint::Capacity, server.id));
        }
    }
    let has = |c: Constraint| violations.iter().any(|&(v, _)| v == c);
    ValidationReport {
        coverage_ok: !has(Constraint::Coverage),
        capacity_ok: !has(Constraint::Capacity),
        single_disk_ok: !has(Constraint::SingleDisk),
        violations,
    }
}

/// Load variance `sum_i (|L_i| - n/m)^2 / m`, centered at the mean load
/// `n/m` rather than at each server's capacity.
pub fn util_variance(instance: &Instance, solution: &Solution) -> f64 {
    load_variance(&solution.loads(), instance.num_users())
}

pub fn load_variance(loads: &[usize], num_users: usize) -> f64 {
    let m = loads.len() as f64;
    let mean = num_users as f64 / m;
    loads.iter().map(|&l| (l as f64 - mean) * (l as f64 - mean)).sum::<f64>() / m
}

/// Served users over capacity, per server (`0` for zero-capacity servers).
pub fn utilization(instance: &Instance, solution: &Solution) -> Vec<f64> {
    solution
        .loads()
        .iter()
        .zip(instance.servers())
        .map(|(&l, s)| if s.capacity == 0 { 0.0 } else { l as f64 / f64::from(s.capacity) })
        .collect()
}

pub fn approximation_ratio(alg_power: f64, opt_power: f64) -> Result<f64> {
    if opt_power > 0.0 {
        Ok(alg_power / opt_power)
    } else if alg_power == 0.0 {
        Ok(1.0)
    } else {
        Err(Error::DegenerateRatio { alg_power })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub total_power: f64,
    pub runtime_ms: f64,
    pub ratio_vs_opt: Option<f64>,
    pub util_variance: f64,
    pub per_server_load: Vec<usize>,
}

impl MetricsRecord {
    pub fn new(instance: &Instance, solution: &Solution, runtime_ms: f64, opt_power: Option<f64>) -> Result<Self> {
        let ratio_vs_opt = opt_power.map(|opt| approximation_ratio(solution.total_power, opt)).transpose()?;
        Ok(Self {
            total_power: solution.total_power,
            runtime_ms,
            ratio_vs_opt,
            util_variance: util_variance(instance, solution),
            per_server_load: solution.loads(),
        })
    }
}
