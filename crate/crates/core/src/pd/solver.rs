use alloc::vec::Vec;

use super::state::{DualState, SolverState};
use crate::error::{Error, Result};
use crate::model::{build_disks, DiskSet, Instance};
use crate::solution::Solution;

/// `p - lhs` at or below this counts as tight.
pub fn tightness_tolerance(power: f64) -> f64 {
    1e-9 * power.max(1.0)
}

/// Accounting of one selected disk at the moment it went tight.
///
/// `power == weighted_beta + gamma_sum`, where `weighted_beta` integrates
/// the remaining capacity over the phases in which `beta` rose. `charges`
/// splits the power over every user inside the disk: a user pays its
/// `gamma` plus its share of the capacity term accrued while it was
/// uncovered, and never more than its `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeRecord {
    pub power: f64,
    pub lhs: f64,
    pub beta: f64,
    pub weighted_beta: f64,
    /// `sum gamma[h, disk]` recomputed from the per-user values.
    pub gamma_sum: f64,
    /// Remaining capacity of the server just before the selection.
    pub remaining_capacity: u32,
    /// `(user, charge, theta)` for each user inside the disk.
    pub charges: Vec<(usize, f64, f64)>,
}

impl ChargeRecord {
    /// A low-degree disk never had more uncovered users than remaining slots.
    pub fn is_low_degree(&self) -> bool {
        self.beta == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEvent {
    pub clock: f64,
    pub server: usize,
    pub boundary_user: usize,
    pub disk: usize,
    pub newly_covered: Vec<usize>,
    pub charge: ChargeRecord,
}

pub type EventTrace = Vec<SelectionEvent>;

/// Result of [`PdSolver::next_event`].
#[derive(Debug, Clone, PartialEq)]
pub struct NextEvent {
    pub delta: f64,
    /// Disks that are tight after advancing by `delta`, by (server, key).
    pub tight_disks: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PdOutcome {
    pub solution: Solution,
    pub duals: DualState,
    pub trace: EventTrace,
    pub disks: DiskSet,
}

/// Event-driven simultaneous dual ascent.
///
/// Between events every rate is constant, so the next tight disk is found
/// in closed form. A disk of server `i` with `c` uncovered users rises at
/// `min(k'_i, c)`: with `c > k'_i` its `beta` grows (capacity-scarce mode),
/// otherwise the `gamma` of each of its uncovered users grows.
#[derive(Debug, Clone)]
pub struct PdSolver<'a> {
    instance: &'a Instance,
    disks: DiskSet,
    state: SolverState,
    duals: DualState,
    trace: EventTrace,
}

impl<'a> PdSolver<'a> {
    pub fn new(instance: &'a Instance) -> Result<Self> {
        instance.ensure_sufficient_capacity()?;
        let disks = build_disks(instance);
        let capacities = instance.servers().iter().map(|s| s.capacity).collect();
        Ok(Self {
            instance,
            state: SolverState::new(capacities, instance.num_users()),
            duals: DualState::zero(instance.num_servers(), instance.num_users()),
            disks,
            trace: Vec::new(),
        })
    }

    pub fn disks(&self) -> &DiskSet {
        &self.disks
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn duals(&self) -> &DualState {
        &self.duals
    }

    pub fn trace(&self) -> &[SelectionEvent] {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.state.num_uncovered == 0
    }

    /// Rate at which the disk's constraint left-hand side rises.
    pub fn rate(&self, disk: usize) -> f64 {
        if !self.state.active[disk] {
            return 0.0;
        }
        let count = self.state.uncovered_in_disk[disk];
        let cap = self.state.remaining_capacity[self.disks.get(disk).server];
        f64::from(count.min(cap))
    }

    pub fn is_tight(&self, disk: usize) -> bool {
        let p = self.disks.get(disk).power;
        p - self.state.lhs[disk] <= tightness_tolerance(p)
    }

    /// Time until the next disk goes tight and every disk tight at that time.
    pub fn next_event(&self) -> Result<NextEvent> {
        let mut best = f64::INFINITY;
        for d in 0..self.disks.len() {
            let rate = self.rate(d);
            if rate > 0.0 {
                let slack = (self.disks.get(d).power - self.state.lhs[d]).max(0.0);
                best = best.min(slack / rate);
            }
        }
        if !best.is_finite() {
            return Err(Error::Stalled { uncovered: self.state.num_uncovered, clock: self.duals.clock });
        }
        let tight_disks = (0..self.disks.len())
            .filter(|&d| {
                let rate = self.rate(d);
                let p = self.disks.get(d).power;
                rate > 0.0 && p - (self.state.lhs[d] + rate * best) <= tightness_tolerance(p)
            })
            .collect();
        Ok(NextEvent { delta: best, tight_disks })
    }

    /// Raises all duals of uncovered users by `delta`.
    pub fn advance(&mut self, delta: f64) {
        let st = &mut self.state;
        let duals = &mut self.duals;
        for d in 0..self.disks.len() {
            let count = st.uncovered_in_disk[d];
            if !st.active[d] || count == 0 {
                continue;
            }
            let cap = st.remaining_capacity[self.disks.get(d).server];
            if count > cap {
                let k = f64::from(cap);
                duals.beta[d] += delta;
                st.lhs[d] += k * delta;
                st.weighted_beta[d] += k * delta;
                st.share_clock[d] += k / f64::from(count) * delta;
            } else {
                let c = f64::from(count);
                duals.gamma_clock[d] += delta;
                st.lhs[d] += c * delta;
                st.gamma_sum[d] += c * delta;
            }
        }
        duals.clock += delta;
        for (theta, &open) in duals.theta.iter_mut().zip(&st.uncovered) {
            if open {
                *theta = duals.clock;
            }
        }
    }

    /// Opens a tight disk: its uncovered users go to its server, the server's
    /// remaining capacity drops accordingly and every disk of the server up
    /// to this one leaves the active set. Returns the newly covered users.
    ///
    /// A tight disk without uncovered users is only deactivated.
    pub fn apply_selection(&mut self, disk: usize) -> Result<Vec<usize>> {
        if !self.state.active[disk] || !self.is_tight(disk) {
            return Err(Error::NotSelectable { disk });
        }
        let d = *self.disks.get(disk);
        let newly: Vec<usize> = {
            let mut v: Vec<usize> = self.disks.users_in(disk).filter(|&u| self.state.uncovered[u]).collect();
            v.sort_unstable();
            v
        };
        if newly.is_empty() {
            self.state.active[disk] = false;
            return Ok(newly);
        }
        let cap = self.state.remaining_capacity[d.server];
        if newly.len() > cap as usize {
            return Err(Error::CapacityInvariant {
                server: d.server,
                boundary_user: d.boundary_user,
                newly_covered: newly.len(),
                remaining_capacity: cap,
                clock: self.duals.clock,
                trace: self.trace.clone(),
            });
        }
        for &u in &newly {
            self.cover(u, d.server);
        }
        let charge = self.charge_record(disk, cap);
        self.state.remaining_capacity[d.server] = cap - newly.len() as u32;
        self.state.last_selected[d.server] = Some(disk);
        for r in 0..=d.rank {
            self.state.active[self.disks.index(d.server, r)] = false;
        }
        self.trace.push(SelectionEvent {
            clock: self.duals.clock,
            server: d.server,
            boundary_user: d.boundary_user,
            disk,
            newly_covered: newly.clone(),
            charge,
        });
        Ok(newly)
    }

    fn cover(&mut self, user: usize, server: usize) {
        let st = &mut self.state;
        st.uncovered[user] = false;
        st.num_uncovered -= 1;
        st.served_by[user] = Some(server);
        self.duals.covered_at[user] = Some(self.duals.clock);
        self.duals.theta[user] = self.duals.clock;
        for i in 0..self.disks.num_servers() {
            let first = self.disks.rank_of(i, user);
            for r in first..self.disks.num_users() {
                let idx = self.disks.index(i, r);
                st.uncovered_in_disk[idx] -= 1;
                if st.active[idx] {
                    let g = self.duals.gamma_clock[idx];
                    if g > 0.0 {
                        self.duals.gamma_frozen[user].push(idx, g);
                    }
                    let s = st.share_clock[idx];
                    if s > 0.0 {
                        st.share_frozen[user].push(idx, s);
                    }
                }
            }
        }
    }

    fn charge_record(&self, disk: usize, remaining_capacity: u32) -> ChargeRecord {
        let mut gamma_sum = 0.0;
        let charges = self
            .disks
            .users_in(disk)
            .map(|u| {
                let g = self.duals.gamma(u, disk);
                gamma_sum += g;
                (u, g + self.state.share(u, disk), self.duals.theta[u])
            })
            .collect();
        ChargeRecord {
            power: self.disks.get(disk).power,
            lhs: self.state.lhs[disk],
            beta: self.duals.beta[disk],
            weighted_beta: self.state.weighted_beta[disk],
            gamma_sum,
            remaining_capacity,
            charges,
        }
    }

    /// One event: advance to the next tightness time and open the tight
    /// disks in (server, key) order, re-testing each against the updated
    /// state. Returns the number of disks opened.
    pub fn step(&mut self) -> Result<usize> {
        let event = self.next_event()?;
        self.advance(event.delta);
        let mut opened = 0;
        for d in event.tight_disks {
            if self.state.active[d] && self.state.uncovered_in_disk[d] > 0 && self.rate(d) > 0.0 && self.is_tight(d)
                && !self.apply_selection(d)?.is_empty() {
                    opened += 1;
                }
        }
        Ok(opened)
    }

    /// Runs the ascent to completion.
    pub fn run(mut self) -> Result<PdOutcome> {
        while !self.is_done() {
            self.step()?;
        }
        self.finish()
    }

    fn finish(mut self) -> Result<PdOutcome> {
        self.settle_mu();
        let chosen = self.state.last_selected.iter().map(|d| d.map(|i| *self.disks.get(i))).collect();
        let assignment = self
            .state
            .served_by
            .iter()
            .map(|s| s.ok_or(Error::Stalled { uncovered: self.state.num_uncovered, clock: self.duals.clock }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PdOutcome {
            solution: Solution::new(chosen, assignment),
            duals: self.duals,
            trace: self.trace,
            disks: self.disks,
        })
    }

    /// Smallest `mu_i` making every packing constraint of server `i` hold
    /// with the full capacity `k_i`. Stays zero unless the server ran out of
    /// remaining capacity while its larger disks still held uncovered users.
    fn settle_mu(&mut self) {
        for server in self.instance.servers() {
            let k = f64::from(server.capacity);
            let excess = (0..self.disks.num_users())
                .map(|r| {
                    let d = self.disks.index(server.id, r);
                    k * self.duals.beta[d] + self.state.gamma_sum[d] - self.disks.get(d).power
                })
                .fold(0.0f64, f64::max);
            self.duals.mu[server.id] = excess;
        }
    }
}

/// Runs the primal-dual algorithm on `instance`.
pub fn pd_solve(instance: &Instance) -> Result<PdOutcome> {
    PdSolver::new(instance)?.run()
}
