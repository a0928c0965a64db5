use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Disk, DiskSet};

/// A power assignment (at most one disk per server) plus the user-to-server
/// assignment it supports.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub chosen_disk: Vec<Option<Disk>>,
    pub assignment: Vec<usize>,
    pub total_power: f64,
}

impl Solution {
    pub fn new(chosen_disk: Vec<Option<Disk>>, assignment: Vec<usize>) -> Self {
        let total_power = chosen_disk.iter().flatten().map(|d| d.power).sum();
        Self { chosen_disk, assignment, total_power }
    }

    /// Smallest disks supporting `assignment`: each server's disk has its
    /// farthest assigned user on the boundary; idle servers stay off.
    pub fn from_assignment(disks: &DiskSet, assignment: Vec<usize>) -> Self {
        let mut farthest: Vec<Option<usize>> = vec![None; disks.num_servers()];
        for (user, &server) in assignment.iter().enumerate() {
            let idx = disks.disk_of(server, user);
            let slot = &mut farthest[server];
            if slot.is_none_or(|cur| disks.get(cur).rank < disks.get(idx).rank) {
                *slot = Some(idx);
            }
        }
        let chosen = farthest.into_iter().map(|d| d.map(|i| *disks.get(i))).collect();
        Self::new(chosen, assignment)
    }

    /// Number of users served by each server.
    pub fn loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.chosen_disk.len()];
        for &s in &self.assignment {
            if let Some(l) = loads.get_mut(s) {
                *l += 1;
            }
        }
        loads
    }

    /// Users served by `server`, ascending by id.
    pub fn users_of(&self, server: usize) -> Vec<usize> {
        self.assignment.iter().enumerate().filter(|&(_, &s)| s == server).map(|(u, _)| u).collect()
    }
}
