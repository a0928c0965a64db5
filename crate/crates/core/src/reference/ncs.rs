use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{build_disks, Instance, OrderKey};
use crate::solution::Solution;

/// Nearest capable server: repeatedly assign the closest (server, uncovered
/// user) pair whose server still has capacity. Pairs are compared by the
/// user's order key relative to the server, then by server id.
pub fn ncs_solve(instance: &Instance) -> Result<Solution> {
    instance.ensure_sufficient_capacity()?;
    let disks = build_disks(instance);
    let mut pairs: Vec<(OrderKey, usize, usize)> = disks.all().iter().map(|d| (d.key, d.server, d.boundary_user)).collect();
    pairs.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut remaining: Vec<u32> = instance.servers().iter().map(|s| s.capacity).collect();
    let mut assignment: Vec<Option<usize>> = vec![None; instance.num_users()];
    let mut left = instance.num_users();
    // eligibility only shrinks, so one pass in key order equals repeated
    // global minimum selection
    for (_, server, user) in pairs {
        if left == 0 {
            break;
        }
        if assignment[user].is_none() && remaining[server] > 0 {
            assignment[user] = Some(server);
            remaining[server] -= 1;
            left -= 1;
        }
    }
    let assignment = assignment.into_iter().map(|s| s.expect("total capacity covers every user")).collect();
    Ok(Solution::from_assignment(&disks, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, PowerParams};
    use crate::reference::{opt_solve, DEFAULT_NODE_BUDGET};

    fn inst(servers: Vec<((f64, f64), u32)>, users: Vec<(f64, f64)>) -> Instance {
        Instance::new(
            PowerParams::new(1.0, 2.0).unwrap(),
            servers.into_iter().map(|((x, y), k)| (Point::new(x, y), k)).collect(),
            users.into_iter().map(|(x, y)| Point::new(x, y)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn independent_pairs_match_opt() {
        let i = inst(vec![((0.0, 0.0), 1), ((10.0, 0.0), 1)], vec![(1.0, 0.0), (9.0, 0.0)]);
        let s = ncs_solve(&i).unwrap();
        assert_eq!(s.assignment, vec![0, 1]);
        assert_eq!(s.total_power, 2.0);
        assert_eq!(Some(s.total_power), opt_solve(&i, DEFAULT_NODE_BUDGET).value());
    }

    #[test]
    fn three_user_instance_steps() {
        // (s1,u2) and (s0,u0) both at distance 1, then s0 is full and u1
        // goes to s1 at distance 8
        let i = inst(vec![((0.0, 0.0), 1), ((10.0, 0.0), 2)], vec![(1.0, 0.0), (2.0, 0.0), (9.0, 0.0)]);
        let s = ncs_solve(&i).unwrap();
        assert_eq!(s.assignment, vec![0, 1, 1]);
        assert_eq!(s.total_power, 65.0);
    }

    #[test]
    fn single_server_equals_opt() {
        let i = inst(vec![((3.0, 3.0), 5)], vec![(1.0, 0.0), (2.0, 7.0), (9.0, 4.0), (3.0, 3.0)]);
        let s = ncs_solve(&i).unwrap();
        assert_eq!(Some(s.total_power), opt_solve(&i, DEFAULT_NODE_BUDGET).value());
    }

    #[test]
    fn insufficient_capacity_errors() {
        let i = inst(vec![((0.0, 0.0), 1)], vec![(1.0, 0.0), (2.0, 0.0)]);
        assert!(ncs_solve(&i).is_err());
    }
}
