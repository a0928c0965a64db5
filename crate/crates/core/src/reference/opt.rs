use alloc::vec::Vec;

use super::matching::{feasible_assignment, RadiusChoice};
use crate::model::{build_disks, DiskSet, Instance};
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptStatus {
    Optimal,
    /// Node budget ran out before the search finished.
    BudgetExceeded,
    /// No radius choice admits a capacity-respecting cover.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptReport {
    pub status: OptStatus,
    pub solution: Option<Solution>,
    pub nodes_explored: u64,
}

impl OptReport {
    pub fn value(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.total_power)
    }
}

/// Default node budget; generous enough for `m <= 5, n <= 14`.
pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

/// Exact optimum by depth-first enumeration of one radius choice per server
/// (or off), pruned by the incumbent power.
///
/// Only the largest disk among equal-radius disks of a server is tried: it
/// costs the same and contains more users.
pub fn opt_solve(instance: &Instance, node_budget: u64) -> OptReport {
    if instance.ensure_sufficient_capacity().is_err() {
        return OptReport { status: OptStatus::Infeasible, solution: None, nodes_explored: 0 };
    }
    let disks = build_disks(instance);
    let n = instance.num_users();
    let candidates: Vec<Vec<usize>> = (0..instance.num_servers())
        .map(|s| {
            let own = disks.of_server(s);
            (0..n).filter(|&r| r + 1 == n || own[r + 1].key.dist > own[r].key.dist).collect()
        })
        .collect();
    let mut search = Search {
        instance,
        disks: &disks,
        candidates: &candidates,
        budget: node_budget,
        nodes: 0,
        exhausted: false,
        choice: RadiusChoice::all_off(instance.num_servers()),
        best: None,
    };
    search.descend(0, 0.0);
    let status = if search.exhausted {
        OptStatus::BudgetExceeded
    } else if search.best.is_some() {
        OptStatus::Optimal
    } else {
        OptStatus::Infeasible
    };
    let solution = match status {
        OptStatus::Optimal => search.best.map(|(choice, assignment)| {
            let chosen = choice.0.iter().enumerate().map(|(s, r)| r.map(|r| *disks.get(disks.index(s, r)))).collect();
            Solution::new(chosen, assignment)
        }),
        _ => None,
    };
    OptReport { status, solution, nodes_explored: search.nodes }
}

struct Search<'a> {
    instance: &'a Instance,
    disks: &'a DiskSet,
    candidates: &'a [Vec<usize>],
    budget: u64,
    nodes: u64,
    exhausted: bool,
    choice: RadiusChoice,
    best: Option<(RadiusChoice, Vec<usize>)>,
}

impl Search<'_> {
    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(c, _)| c.total_power(self.disks))
    }

    fn descend(&mut self, server: usize, partial: f64) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if server == self.instance.num_servers() {
            self.leaf();
            return;
        }
        self.choice.0[server] = None;
        self.descend(server + 1, partial);
        for &r in &self.candidates[server] {
            let p = partial + self.disks.get(self.disks.index(server, r)).power;
            // candidates ascend in power
            if p >= self.incumbent() || self.exhausted {
                break;
            }
            self.choice.0[server] = Some(r);
            self.descend(server + 1, p);
        }
        self.choice.0[server] = None;
    }

    fn leaf(&mut self) {
        let n = self.instance.num_users();
        let slots: usize = self
            .choice
            .0
            .iter()
            .zip(self.instance.servers())
            .map(|(r, s)| r.map_or(0, |r| (r + 1).min(s.capacity as usize)))
            .sum();
        if slots < n {
            return;
        }
        if self.choice.total_power(self.disks) >= self.incumbent() {
            return;
        }
        if let Some(assignment) = feasible_assignment(&self.choice, self.instance, self.disks) {
            self.best = Some((self.choice.clone(), assignment));
        }
    }
}
