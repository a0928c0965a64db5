use alloc::vec;
use alloc::vec::Vec;

use crate::model::{DiskSet, Instance};

/// One radius choice per server: the rank of the selected disk, or `None`
/// when the server is off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusChoice(pub Vec<Option<usize>>);

impl RadiusChoice {
    pub fn all_off(num_servers: usize) -> Self {
        Self(vec![None; num_servers])
    }

    pub fn total_power(&self, disks: &DiskSet) -> f64 {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(s, r)| r.map(|r| disks.get(disks.index(s, r)).power))
            .sum()
    }
}

/// Finds a user-to-server assignment where every user sits inside its
/// server's selected disk and no server exceeds its capacity.
///
/// Capacitated bipartite matching by augmenting paths; `None` when the
/// maximum matching leaves some user unassigned.
pub fn feasible_assignment(choice: &RadiusChoice, instance: &Instance, disks: &DiskSet) -> Option<Vec<usize>> {
    let m = instance.num_servers();
    let n = instance.num_users();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            (0..m)
                .filter(|&s| choice.0[s].is_some_and(|r| disks.rank_of(s, u) <= r))
                .collect()
        })
        .collect();
    let cap: Vec<usize> = instance.servers().iter().map(|s| s.capacity as usize).collect();
    let mut matcher = Matcher { adj: &adj, cap: &cap, owner: vec![None; n], members: vec![Vec::new(); m] };
    for u in 0..n {
        let mut visited = vec![false; m];
        if !matcher.augment(u, &mut visited) {
            return None;
        }
    }
    matcher.owner.into_iter().collect()
}

struct Matcher<'a> {
    adj: &'a [Vec<usize>],
    cap: &'a [usize],
    owner: Vec<Option<usize>>,
    members: Vec<Vec<usize>>,
}

impl Matcher<'_> {
    fn augment(&mut self, user: usize, visited: &mut [bool]) -> bool {
        for &s in &self.adj[user] {
            if visited[s] {
                continue;
            }
            visited[s] = true;
            if self.members[s].len() < self.cap[s] {
                self.take(user, s);
                return true;
            }
            let members = self.members[s].clone();
            for other in members {
                if self.augment(other, visited) {
                    // `other` now sits elsewhere; its slot in `s` is free
                    self.members[s].retain(|&v| v != other);
                    self.take(user, s);
                    return true;
                }
            }
        }
        false
    }

    fn take(&mut self, user: usize, server: usize) {
        self.owner[user] = Some(server);
        self.members[server].push(user);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_disks, Point, PowerParams};
    use proptest::prelude::*;

    fn instance(servers: Vec<((f64, f64), u32)>, users: Vec<(f64, f64)>) -> Instance {
        Instance::new(
            PowerParams::new(1.0, 2.0).unwrap(),
            servers.into_iter().map(|((x, y), k)| (Point::new(x, y), k)).collect(),
            users.into_iter().map(|(x, y)| Point::new(x, y)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn forced_assignment_on_disjoint_disks() {
        let inst = instance(vec![((0.0, 0.0), 1), ((10.0, 0.0), 1)], vec![(1.0, 0.0), (9.0, 0.0)]);
        let disks = build_disks(&inst);
        let choice = RadiusChoice(vec![Some(0), Some(0)]);
        assert_eq!(feasible_assignment(&choice, &inst, &disks), Some(vec![0, 1]));
    }

    #[test]
    fn hall_condition_met_by_two_unit_disks() {
        let inst = instance(vec![((0.0, 0.0), 1), ((0.0, 1.0), 1)], vec![(1.0, 0.5), (-1.0, 0.5)]);
        let disks = build_disks(&inst);
        let a = feasible_assignment(&RadiusChoice(vec![Some(1), Some(1)]), &inst, &disks).unwrap();
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn capacity_deficit_is_infeasible() {
        let inst = instance(vec![((0.0, 0.0), 1)], vec![(1.0, 0.0), (2.0, 0.0)]);
        let disks = build_disks(&inst);
        assert_eq!(feasible_assignment(&RadiusChoice(vec![Some(1)]), &inst, &disks), None);
    }

    #[test]
    fn augmenting_path_reroutes_earlier_users() {
        // user 0 fits both servers, user 1 only server 0; greedy first fit
        // would block user 1
        let inst = instance(vec![((0.0, 0.0), 1), ((4.0, 0.0), 1)], vec![(2.0, 0.0), (-1.0, 0.0)]);
        let disks = build_disks(&inst);
        let choice = RadiusChoice(vec![Some(1), Some(0)]);
        assert_eq!(feasible_assignment(&choice, &inst, &disks), Some(vec![1, 0]));
    }

    /// Every map user -> selected server, checked directly.
    fn brute_force_exists(choice: &RadiusChoice, inst: &Instance, disks: &DiskSet) -> bool {
        let m = inst.num_servers();
        let n = inst.num_users();
        let total = m.pow(n as u32);
        (0..total).any(|mut code| {
            let mut load = vec![0u32; m];
            for u in 0..n {
                let s = code % m;
                code /= m;
                match choice.0[s] {
                    Some(r) if disks.rank_of(s, u) <= r => load[s] += 1,
                    _ => return false,
                }
            }
            load.iter().zip(inst.servers()).all(|(&l, s)| l <= s.capacity)
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            servers in proptest::collection::vec(((0u8..6, 0u8..6), 0u32..4), 1..4),
            users in proptest::collection::vec((0u8..6, 0u8..6), 1..7),
            picks in proptest::collection::vec(0usize..8, 4),
        ) {
            let inst = instance(
                servers.iter().map(|&((x, y), k)| ((x as f64, y as f64), k)).collect(),
                users.iter().map(|&(x, y)| (x as f64, y as f64)).collect(),
            );
            let disks = build_disks(&inst);
            let n = inst.num_users();
            let choice = RadiusChoice((0..inst.num_servers()).map(|s| if picks[s] >= n { None } else { Some(picks[s]) }).collect());
            let found = feasible_assignment(&choice, &inst, &disks);
            prop_assert_eq!(found.is_some(), brute_force_exists(&choice, &inst, &disks));
            if let Some(a) = found {
                let mut load = vec![0u32; inst.num_servers()];
                for (u, &s) in a.iter().enumerate() {
                    prop_assert!(disks.rank_of(s, u) <= choice.0[s].unwrap());
                    load[s] += 1;
                }
                for (l, s) in load.iter().zip(inst.servers()) {
                    prop_assert!(*l <= s.capacity);
                }
            }
        }
    }
}
