use alloc::vec;
use alloc::vec::Vec;

/// Sparse per-user map from flat disk index to a value, sorted by disk index.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct SparseRow(Vec<(u32, f64)>);

impl SparseRow {
    pub(crate) fn push(&mut self, disk: usize, value: f64) {
        debug_assert!(self.0.last().is_none_or(|&(d, _)| (d as usize) < disk));
        self.0.push((disk as u32, value));
    }

    pub(crate) fn get(&self, disk: usize) -> Option<f64> {
        let disk = disk as u32;
        self.0.binary_search_by_key(&disk, |&(d, _)| d).ok().map(|i| self.0[i].1)
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|&(d, v)| (d as usize, v))
    }
}

/// Dual variables of the LP relaxation.
///
/// `theta` is the price of each user, `beta` the capacity-scarce price of
/// each disk, `gamma` the per-(user, disk) willingness to pay and `mu` the
/// per-server surcharge. All are nonnegative.
///
/// `gamma` is stored lazily: a user that is still uncovered has accrued
/// exactly `gamma_clock[disk]` on every disk containing it (it has been
/// uncovered since time zero); once covered its values are frozen into a
/// sparse row.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub clock: f64,
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    /// Clock value at which each user left the uncovered set.
    pub covered_at: Vec<Option<f64>>,
    pub(crate) gamma_clock: Vec<f64>,
    pub(crate) gamma_frozen: Vec<SparseRow>,
}

impl DualState {
    pub(crate) fn zero(num_servers: usize, num_users: usize) -> Self {
        let num_disks = num_servers * num_users;
        Self {
            clock: 0.0,
            theta: vec![0.0; num_users],
            beta: vec![0.0; num_disks],
            mu: vec![0.0; num_servers],
            covered_at: vec![None; num_users],
            gamma_clock: vec![0.0; num_disks],
            gamma_frozen: vec![SparseRow::default(); num_users],
        }
    }

    /// All-zero duals; trivially feasible.
    pub fn zeros(num_servers: usize, num_users: usize) -> Self {
        Self::zero(num_servers, num_users)
    }

    /// `gamma[user, disk]`. Only meaningful when `disk` contains `user`;
    /// zero is returned for pairs outside the containment relation once the
    /// user is covered.
    pub fn gamma(&self, user: usize, disk: usize) -> f64 {
        match self.covered_at[user] {
            Some(_) => self.gamma_frozen[user].get(disk).unwrap_or(0.0),
            None => self.gamma_clock[disk],
        }
    }

    /// Overrides one `gamma` entry of a covered user. Used to build dual
    /// states by hand (for checking the verifier itself).
    pub fn set_gamma(&mut self, user: usize, disk: usize, value: f64) {
        if self.covered_at[user].is_none() {
            self.covered_at[user] = Some(self.theta[user]);
        }
        let row = &mut self.gamma_frozen[user].0;
        let key = disk as u32;
        match row.binary_search_by_key(&key, |&(d, _)| d) {
            Ok(i) => row[i].1 = value,
            Err(i) => row.insert(i, (key, value)),
        }
    }

    /// Nonzero `gamma` entries of covered users as `(user, disk, value)`.
    pub fn gamma_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.gamma_frozen
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |(d, v)| (u, d, v)))
    }
}

/// Dual objective `sum theta - sum mu`.
pub fn dual_objective(duals: &DualState) -> f64 {
    duals.theta.iter().sum::<f64>() - duals.mu.iter().sum::<f64>()
}

/// Primal-side bookkeeping of the ascent.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub(crate) uncovered: Vec<bool>,
    pub(crate) num_uncovered: usize,
    pub(crate) active: Vec<bool>,
    pub(crate) uncovered_in_disk: Vec<u32>,
    pub(crate) lhs: Vec<f64>,
    pub(crate) remaining_capacity: Vec<u32>,
    pub(crate) last_selected: Vec<Option<usize>>,
    pub(crate) served_by: Vec<Option<usize>>,
    /// `sum over beta-phases of k' * d(beta)` per disk.
    pub(crate) weighted_beta: Vec<f64>,
    /// `sum over users of gamma[h, disk]`, accumulated by rate.
    pub(crate) gamma_sum: Vec<f64>,
    /// Per-user share of the weighted beta term, accrued while uncovered.
    pub(crate) share_clock: Vec<f64>,
    pub(crate) share_frozen: Vec<SparseRow>,
}

impl SolverState {
    pub(crate) fn new(capacities: Vec<u32>, num_users: usize) -> Self {
        let num_servers = capacities.len();
        let num_disks = num_servers * num_users;
        let mut uncovered_in_disk = Vec::with_capacity(num_disks);
        for _ in 0..num_servers {
            uncovered_in_disk.extend((1..=num_users as u32).collect::<Vec<_>>());
        }
        Self {
            uncovered: vec![true; num_users],
            num_uncovered: num_users,
            active: vec![true; num_disks],
            uncovered_in_disk,
            lhs: vec![0.0; num_disks],
            remaining_capacity: capacities,
            last_selected: vec![None; num_servers],
            served_by: vec![None; num_users],
            weighted_beta: vec![0.0; num_disks],
            gamma_sum: vec![0.0; num_disks],
            share_clock: vec![0.0; num_disks],
            share_frozen: vec![SparseRow::default(); num_users],
        }
    }

    pub fn num_uncovered(&self) -> usize {
        self.num_uncovered
    }

    pub fn is_uncovered(&self, user: usize) -> bool {
        self.uncovered[user]
    }

    pub fn is_active(&self, disk: usize) -> bool {
        self.active[disk]
    }

    /// `|D' intersect U'|` for the disk.
    pub fn uncovered_count(&self, disk: usize) -> u32 {
        self.uncovered_in_disk[disk]
    }

    /// Accumulated left-hand side of the disk's packing constraint, with the
    /// capacity term weighted by the remaining capacity at the time.
    pub fn lhs(&self, disk: usize) -> f64 {
        self.lhs[disk]
    }

    pub fn remaining_capacity(&self, server: usize) -> u32 {
        self.remaining_capacity[server]
    }

    pub fn last_selected(&self, server: usize) -> Option<usize> {
        self.last_selected[server]
    }

    pub fn served_by(&self, user: usize) -> Option<usize> {
        self.served_by[user]
    }

    pub fn weighted_beta(&self, disk: usize) -> f64 {
        self.weighted_beta[disk]
    }

    pub(crate) fn share(&self, user: usize, disk: usize) -> f64 {
        if self.uncovered[user] {
            self.share_clock[disk]
        } else {
            self.share_frozen[user].get(disk).unwrap_or(0.0)
        }
    }
}
