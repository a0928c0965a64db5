//! Independent checks on a finished (or partial) ascent.

use alloc::vec::Vec;

use super::solver::{PdOutcome, SelectionEvent};
use super::state::{dual_objective, DualState};
use crate::model::{DiskSet, Instance};

fn scaled(tol: f64, magnitude: f64) -> f64 {
    tol * magnitude.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DualViolation {
    /// `theta[user] > beta[disk] + gamma[user, disk]` for a disk containing the user.
    UserConstraint { user: usize, disk: usize, excess: f64 },
    /// `k_i * beta[disk] + sum_h gamma[h, disk] > p[disk] + mu[i]`.
    DiskConstraint { disk: usize, excess: f64 },
    NegativeTheta { user: usize, value: f64 },
    NegativeBeta { disk: usize, value: f64 },
    NegativeGamma { user: usize, disk: usize, value: f64 },
    NegativeMu { server: usize, value: f64 },
}

/// Checks the duals against every constraint of the dual LP.
/// Tolerances are relative to `max(1, |rhs|)`. Empty result = feasible.
pub fn verify_dual_feasibility(instance: &Instance, disks: &DiskSet, duals: &DualState, tol: f64) -> Vec<DualViolation> {
    let mut out = Vec::new();
    for (user, &t) in duals.theta.iter().enumerate() {
        if t < -tol {
            out.push(DualViolation::NegativeTheta { user, value: t });
        }
    }
    for (server, &mu) in duals.mu.iter().enumerate() {
        if mu < -tol {
            out.push(DualViolation::NegativeMu { server, value: mu });
        }
    }
    for disk in 0..disks.len() {
        let beta = duals.beta[disk];
        if beta < -tol {
            out.push(DualViolation::NegativeBeta { disk, value: beta });
        }
        let d = disks.get(disk);
        let mut gamma_sum = 0.0;
        for user in disks.users_in(disk) {
            let g = duals.gamma(user, disk);
            if g < -tol {
                out.push(DualViolation::NegativeGamma { user, disk, value: g });
            }
            gamma_sum += g;
            let rhs = beta + g;
            let excess = duals.theta[user] - rhs;
            if excess > scaled(tol, rhs) {
                out.push(DualViolation::UserConstraint { user, disk, excess });
            }
        }
        let k = f64::from(instance.servers()[d.server].capacity);
        let rhs = d.power + duals.mu[d.server];
        let excess = k * beta + gamma_sum - rhs;
        if excess > scaled(tol, rhs) {
            out.push(DualViolation::DiskConstraint { disk, excess });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChargeViolation {
    /// The opened disk held more new users than its server could still take.
    Capacity { event: usize, newly_covered: usize, remaining_capacity: u32 },
    /// `power != weighted_beta + sum gamma` at the tight moment.
    Tightness { event: usize, power: f64, accounted: f64 },
    /// The users' charges do not add up to the power.
    ChargeSum { event: usize, power: f64, charged: f64 },
    /// A user is charged more than its price.
    Overcharge { event: usize, user: usize, charge: f64, theta: f64 },
    /// A low-degree disk whose users' prices do not add up to its power.
    LowDegreeSum { event: usize, power: f64, theta_sum: f64 },
}

/// Checks the capacity and charging accounting of every selection event.
pub fn check_charging(trace: &[SelectionEvent], tol: f64) -> Vec<ChargeViolation> {
    let mut out = Vec::new();
    for (event, ev) in trace.iter().enumerate() {
        let c = &ev.charge;
        if ev.newly_covered.len() > c.remaining_capacity as usize {
            out.push(ChargeViolation::Capacity {
                event,
                newly_covered: ev.newly_covered.len(),
                remaining_capacity: c.remaining_capacity,
            });
        }
        let bound = scaled(tol, c.power);
        let accounted = c.weighted_beta + c.gamma_sum;
        if (c.power - accounted).abs() > bound {
            out.push(ChargeViolation::Tightness { event, power: c.power, accounted });
        }
        let charged: f64 = c.charges.iter().map(|&(_, ch, _)| ch).sum();
        if (c.power - charged).abs() > bound {
            out.push(ChargeViolation::ChargeSum { event, power: c.power, charged });
        }
        for &(user, charge, theta) in &c.charges {
            if charge > theta + scaled(tol, theta) {
                out.push(ChargeViolation::Overcharge { event, user, charge, theta });
            }
        }
        if c.is_low_degree() {
            let theta_sum: f64 = c.charges.iter().map(|&(_, _, t)| t).sum();
            if (c.power - theta_sum).abs() > bound {
                out.push(ChargeViolation::LowDegreeSum { event, power: c.power, theta_sum });
            }
        }
    }
    out
}

/// Summary of all checks on one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub dual_violations: Vec<DualViolation>,
    pub charge_violations: Vec<ChargeViolation>,
    pub total_power: f64,
    pub theta_sum: f64,
    pub dual_objective: f64,
    /// Largest number of final disks charging a single user.
    pub max_charges_per_user: usize,
    /// Servers that needed a positive `mu` to restore dual feasibility.
    pub servers_with_mu: usize,
}

impl RunReport {
    /// `total_power <= m * sum theta` (up to `tol`, relative).
    pub fn within_m_theta(&self, num_servers: usize, tol: f64) -> bool {
        let bound = num_servers as f64 * self.theta_sum;
        self.total_power <= bound + scaled(tol, bound)
    }

    pub fn is_clean(&self, num_servers: usize) -> bool {
        self.dual_violations.is_empty()
            && self.charge_violations.is_empty()
            && self.max_charges_per_user <= num_servers
            && self.within_m_theta(num_servers, 1e-9)
    }
}

pub fn check_run(instance: &Instance, outcome: &PdOutcome, tol: f64) -> RunReport {
    let mut charged_by = alloc::vec![0usize; instance.num_users()];
    for disk in outcome.solution.chosen_disk.iter().flatten() {
        let idx = outcome.disks.index(disk.server, disk.rank);
        let last = outcome.trace.iter().rev().find(|ev| ev.disk == idx);
        if let Some(ev) = last {
            for &(user, charge, _) in &ev.charge.charges {
                if charge > 0.0 {
                    charged_by[user] += 1;
                }
            }
        }
    }
    RunReport {
        dual_violations: verify_dual_feasibility(instance, &outcome.disks, &outcome.duals, tol),
        charge_violations: check_charging(&outcome.trace, tol),
        total_power: outcome.solution.total_power,
        theta_sum: outcome.duals.theta.iter().sum(),
        dual_objective: dual_objective(&outcome.duals),
        max_charges_per_user: charged_by.into_iter().max().unwrap_or(0),
        servers_with_mu: outcome.duals.mu.iter().filter(|&&mu| mu > 0.0).count(),
    }
}
