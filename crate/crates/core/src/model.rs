//! Geometric domain types, the power law and the candidate disks.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Constants of the power law `p = c * r^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    c: f64,
    alpha: f64,
}

impl PowerParams {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("power scale c must be positive, got {c}")));
        }
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::Domain(format!("attenuation alpha must be >= 1, got {alpha}")));
        }
        Ok(Self { c, alpha })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same constants with a different attenuation factor.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.c, alpha)
    }
}

/// Power needed for a disk of radius `r`.
pub fn power(params: &PowerParams, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    Ok(params.c * libm::pow(r, params.alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(other.x - self.x, other.y - self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Server {
    pub id: usize,
    pub pos: Point,
    pub capacity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub id: usize,
    pub pos: Point,
}

/// A CMPC instance. Ids of servers and users are their positions in the lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    params: PowerParams,
    servers: Vec<Server>,
    users: Vec<User>,
}

impl Instance {
    /// Builds an instance from positions and capacities.
    ///
    /// Total capacity is not required to reach the number of users here; the
    /// solvers that need it report [`Error::InsufficientCapacity`].
    pub fn new(params: PowerParams, servers: Vec<(Point, u32)>, users: Vec<Point>) -> Result<Self> {
        if servers.is_empty() {
            return Err(Error::InvalidInstance("at least one server is required".into()));
        }
        if users.is_empty() {
            return Err(Error::InvalidInstance("at least one user is required".into()));
        }
        if users.len() > u32::MAX as usize {
            return Err(Error::InvalidInstance("too many users".into()));
        }
        if let Some(i) = servers.iter().position(|(p, _)| !p.is_finite()) {
            return Err(Error::InvalidInstance(format!("server {i} has a non-finite coordinate")));
        }
        if let Some(j) = users.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInstance(format!("user {j} has a non-finite coordinate")));
        }
        let servers = servers
            .into_iter()
            .enumerate()
            .map(|(id, (pos, capacity))| Server { id, pos, capacity })
            .collect();
        let users = users.into_iter().enumerate().map(|(id, pos)| User { id, pos }).collect();
        Ok(Self { params, servers, users })
    }

    pub fn params(&self) -> &PowerParams {
        &self.params
    }

    pub fn servers(&self) -> &[Server] {
        &self.servers
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn num_servers(&self) -> usize {
        self.servers.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn total_capacity(&self) -> u64 {
        self.servers.iter().map(|s| u64::from(s.capacity)).sum()
    }

    pub fn ensure_sufficient_capacity(&self) -> Result<()> {
        let capacity = self.total_capacity();
        if capacity < self.users.len() as u64 {
            return Err(Error::InsufficientCapacity { capacity, users: self.users.len() });
        }
        Ok(())
    }

    /// Same positions and capacities under different power constants.
    pub fn with_params(&self, params: PowerParams) -> Self {
        Self { params, ..self.clone() }
    }
}

/// Position of a user in a server's total order.
///
/// Ordered lexicographically by distance, then by the cosine of the angle
/// between the server-to-user vector and the x axis (larger cosine is
/// "farther"), then by `tiebreak`. Two users mirrored across the horizontal
/// line through the server share distance and cosine; `tiebreak` puts the
/// one above the line first and falls back to the user id.
#[derive(Debug, Clone, Copy)]
pub struct OrderKey {
    pub dist: f64,
    pub cosine: f64,
    pub tiebreak: u64,
}

impl OrderKey {
    fn side_rank(dy: f64) -> u64 {
        if dy > 0.0 {
            0
        } else if dy == 0.0 {
            1
        } else {
            2
        }
    }
}

impl PartialEq for OrderKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OrderKey {}

impl PartialOrd for OrderKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // fields are finite by construction
        self.dist
            .partial_cmp(&other.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.cosine.partial_cmp(&other.cosine).unwrap_or(Ordering::Equal))
            .then_with(|| self.tiebreak.cmp(&other.tiebreak))
    }
}

pub fn order_key(server: &Server, user: &User) -> OrderKey {
    let dx = user.pos.x - server.pos.x;
    let dy = user.pos.y - server.pos.y;
    let dist = server.pos.distance(&user.pos);
    let cosine = if dist > 0.0 { (dx / dist).clamp(-1.0, 1.0) } else { 0.0 };
    let tiebreak = (OrderKey::side_rank(dy) << 32) | user.id as u64;
    OrderKey { dist, cosine, tiebreak }
}

/// Candidate disk centered on `server` with `boundary_user` on its boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub server: usize,
    pub boundary_user: usize,
    /// Position of the disk among the server's disks (0 = smallest).
    pub rank: usize,
    pub key: OrderKey,
    pub power: f64,
}

impl Disk {
    pub fn radius(&self) -> f64 {
        self.key.dist
    }
}

/// Whether a user whose key (relative to `server`) is `user_key` lies in `disk`.
pub fn contains(disk: &Disk, server: usize, user_key: &OrderKey) -> Result<bool> {
    if disk.server != server {
        return Err(Error::ServerMismatch { disk_server: disk.server, key_server: server });
    }
    Ok(*user_key <= disk.key)
}

/// All `m * n` candidate disks, grouped by server and sorted by key.
///
/// Disk `rank` of server `i` contains exactly the users at ranks
/// `0..=rank` of that server's order.
#[derive(Debug, Clone)]
pub struct DiskSet {
    num_servers: usize,
    num_users: usize,
    disks: Vec<Disk>,
    /// `ranks[i * n + h]` is the rank of user `h` in server `i`'s order.
    ranks: Vec<u32>,
}

pub fn build_disks(instance: &Instance) -> DiskSet {
    let params = instance.params();
    let m = instance.num_servers();
    let n = instance.num_users();
    let mut disks = Vec::with_capacity(m * n);
    let mut ranks = alloc::vec![0u32; m * n];
    for server in instance.servers() {
        let mut keyed: Vec<(OrderKey, usize)> =
            instance.users().iter().map(|u| (order_key(server, u), u.id)).collect();
        keyed.sort_unstable_by_key(|a| a.0);
        for (rank, (key, user)) in keyed.into_iter().enumerate() {
            ranks[server.id * n + user] = rank as u32;
            disks.push(Disk {
                server: server.id,
                boundary_user: user,
                rank,
                key,
                // distances are finite and nonnegative
                power: params.c * libm::pow(key.dist, params.alpha),
            });
        }
    }
    DiskSet { num_servers: m, num_users: n, disks, ranks }
}

impl DiskSet {
    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    pub fn num_servers(&self) -> usize {
        self.num_servers
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn all(&self) -> &[Disk] {
        &self.disks
    }

    /// Flat index of the disk of `server` at `rank`.
    pub fn index(&self, server: usize, rank: usize) -> usize {
        server * self.num_users + rank
    }

    pub fn get(&self, index: usize) -> &Disk {
        &self.disks[index]
    }

    pub fn of_server(&self, server: usize) -> &[Disk] {
        let n = self.num_users;
        &self.disks[server * n..(server + 1) * n]
    }

    pub fn rank_of(&self, server: usize, user: usize) -> usize {
        self.ranks[server * self.num_users + user] as usize
    }

    pub fn key_of(&self, server: usize, user: usize) -> OrderKey {
        self.disks[self.index(server, self.rank_of(server, user))].key
    }

    /// Flat index of the disk of `server` whose boundary user is `user`.
    pub fn disk_of(&self, server: usize, user: usize) -> usize {
        self.index(server, self.rank_of(server, user))
    }

    pub fn contains_user(&self, index: usize, user: usize) -> bool {
        let disk = &self.disks[index];
        self.rank_of(disk.server, user) <= disk.rank
    }

    /// Users inside the disk at `index`, nearest first.
    pub fn users_in(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let disk = &self.disks[index];
        self.of_server(disk.server)[..=disk.rank].iter().map(|d| d.boundary_user)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(c: f64, alpha: f64) -> PowerParams {
        PowerParams::new(c, alpha).unwrap()
    }

    fn server_at(x: f64, y: f64) -> Server {
        Server { id: 0, pos: Point::new(x, y), capacity: 1 }
    }

    fn user_at(id: usize, x: f64, y: f64) -> User {
        User { id, pos: Point::new(x, y) }
    }

    #[test]
    fn power_law_values() {
        assert_eq!(power(&params(1.0, 2.0), 3.0).unwrap(), 9.0);
        assert_eq!(power(&params(1.0, 2.0), 0.0).unwrap(), 0.0);
        assert_eq!(power(&params(1.0, 1.0), 5.0).unwrap(), 5.0);
        assert_eq!(power(&params(2.5, 1.7), 1.0).unwrap(), 2.5);
        assert!(matches!(power(&params(1.0, 2.0), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn params_are_validated() {
        assert!(PowerParams::new(0.0, 2.0).is_err());
        assert!(PowerParams::new(1.0, 0.5).is_err());
        assert!(PowerParams::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn order_key_examples() {
        let k = order_key(&server_at(0.0, 0.0), &user_at(0, 3.0, 4.0));
        assert_eq!(k.dist, 5.0);
        assert!((k.cosine - 0.6).abs() < 1e-15);
        let k = order_key(&server_at(0.0, 0.0), &user_at(0, 0.0, 2.0));
        assert_eq!((k.dist, k.cosine), (2.0, 0.0));
        let k = order_key(&server_at(1.0, 1.0), &user_at(0, 1.0, 1.0));
        assert_eq!((k.dist, k.cosine), (0.0, 0.0));
    }

    #[test]
    fn contains_examples() {
        let disk = |dist, cosine| Disk {
            server: 0,
            boundary_user: 0,
            rank: 0,
            key: OrderKey { dist, cosine, tiebreak: 0 },
            power: 0.0,
        };
        let key = |dist, cosine| OrderKey { dist, cosine, tiebreak: 0 };
        assert!(contains(&disk(2.0, 0.0), 0, &key(1.0, 0.0)).unwrap());
        assert!(contains(&disk(2.0, 0.0), 0, &key(2.0, 0.0)).unwrap());
        assert!(!contains(&disk(2.0, 0.1), 0, &key(2.0, 0.9)).unwrap());
        assert!(matches!(contains(&disk(2.0, 0.0), 1, &key(1.0, 0.0)), Err(Error::ServerMismatch { .. })));
    }

    #[test]
    fn nested_disks_for_one_server() {
        let inst = Instance::new(
            params(1.0, 2.0),
            alloc::vec![(Point::new(0.0, 0.0), 2)],
            alloc::vec![Point::new(2.0, 0.0), Point::new(1.0, 0.0)],
        )
        .unwrap();
        let disks = build_disks(&inst);
        assert_eq!(disks.len(), 2);
        let small = disks.disk_of(0, 1);
        let large = disks.disk_of(0, 0);
        assert_eq!(disks.get(small).radius(), 1.0);
        assert_eq!(disks.get(large).power, 4.0);
        assert!(disks.contains_user(large, 0) && disks.contains_user(large, 1));
        assert!(disks.contains_user(small, 1) && !disks.contains_user(small, 0));
        assert_eq!(disks.users_in(large).collect::<Vec<_>>(), alloc::vec![1, 0]);
    }

    #[test]
    fn disk_count_is_m_times_n() {
        let inst = Instance::new(
            params(1.0, 2.0),
            alloc::vec![(Point::new(0.0, 0.0), 2), (Point::new(5.0, 5.0), 2)],
            alloc::vec![Point::new(1.0, 0.0), Point::new(2.0, 3.0), Point::new(4.0, 4.0)],
        )
        .unwrap();
        assert_eq!(build_disks(&inst).len(), 6);
    }

    #[test]
    fn mirrored_users_are_strictly_ordered() {
        // equal distance and cosine: both orderings enumerated, exactly one
        // disk holds both users
        let inst = Instance::new(
            params(1.0, 2.0),
            alloc::vec![(Point::new(0.0, 0.0), 2)],
            alloc::vec![Point::new(1.0, 1.0), Point::new(1.0, -1.0)],
        )
        .unwrap();
        let disks = build_disks(&inst);
        let both: Vec<_> = (0..2)
            .filter(|&d| (0..2).all(|u| disks.contains_user(d, u)))
            .collect();
        assert_eq!(both.len(), 1);
        let a = disks.key_of(0, 0);
        let b = disks.key_of(0, 1);
        assert_eq!((a.dist, a.cosine), (b.dist, b.cosine));
        assert!(a < b, "user above the horizontal line comes first");
        assert_ne!(a.cmp(&b), b.cmp(&a));
        // the disk whose boundary is the lower user holds both
        assert_eq!(disks.get(both[0]).boundary_user, 1);
    }

    #[test]
    fn coincident_user_gets_zero_power_disk() {
        let inst = Instance::new(
            params(3.0, 2.0),
            alloc::vec![(Point::new(1.0, 1.0), 1)],
            alloc::vec![Point::new(1.0, 1.0), Point::new(2.0, 1.0)],
        )
        .unwrap();
        let disks = build_disks(&inst);
        let d = disks.get(disks.disk_of(0, 0));
        assert_eq!((d.rank, d.power), (0, 0.0));
        assert_eq!(disks.users_in(disks.disk_of(0, 0)).count(), 1);
    }

    #[test]
    fn instance_rejects_bad_input() {
        let p = params(1.0, 2.0);
        assert!(Instance::new(p, alloc::vec![], alloc::vec![Point::new(0.0, 0.0)]).is_err());
        assert!(Instance::new(p, alloc::vec![(Point::new(0.0, 0.0), 1)], alloc::vec![]).is_err());
        assert!(Instance::new(p, alloc::vec![(Point::new(f64::INFINITY, 0.0), 1)], alloc::vec![Point::new(0.0, 0.0)]).is_err());
        let short = Instance::new(p, alloc::vec![(Point::new(0.0, 0.0), 1)], alloc::vec![Point::new(0.0, 0.0); 2]).unwrap();
        assert!(matches!(short.ensure_sufficient_capacity(), Err(Error::InsufficientCapacity { capacity: 1, users: 2 })));
    }

    fn grid_point() -> impl Strategy<Value = Point> {
        // small integer grid so equal distances and mirror images are common
        (-3i32..=3, -3i32..=3).prop_map(|(x, y)| Point::new(x as f64, y as f64))
    }

    proptest! {
        #[test]
        fn order_key_is_strict_total_order(server in grid_point(), pts in proptest::collection::vec(grid_point(), 2..12)) {
            let s = Server { id: 0, pos: server, capacity: 1 };
            let keys: Vec<OrderKey> = pts.iter().enumerate().map(|(id, &pos)| order_key(&s, &User { id, pos })).collect();
            for (i, a) in keys.iter().enumerate() {
                for (j, b) in keys.iter().enumerate() {
                    if i == j {
                        prop_assert_eq!(a.cmp(b), Ordering::Equal);
                    } else {
                        prop_assert_ne!(a.cmp(b), Ordering::Equal);
                        prop_assert_eq!(a.cmp(b), b.cmp(a).reverse());
                    }
                    for c in &keys {
                        if a < b && b < c {
                            prop_assert!(a < c);
                        }
                    }
                }
            }
        }

        #[test]
        fn power_is_monotone(r1 in 0.0f64..200.0, r2 in 0.0f64..200.0, c in 0.1f64..5.0, alpha in 1.0f64..3.0) {
            let p = params(c, alpha);
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(power(&p, lo).unwrap() <= power(&p, hi).unwrap());
        }

        #[test]
        fn containment_is_monotone(pts in proptest::collection::vec(grid_point(), 1..10), a in 0usize..10, b in 0usize..10) {
            let inst = Instance::new(params(1.0, 2.0), alloc::vec![(Point::new(0.0, 0.0), 1)], pts.clone()).unwrap();
            let disks = build_disks(&inst);
            let n = pts.len();
            let (a, b) = (a % n, b % n);
            let (small, large) = if disks.get(a).key <= disks.get(b).key { (a, b) } else { (b, a) };
            for u in disks.users_in(small) {
                prop_assert!(disks.contains_user(large, u));
            }
            prop_assert_eq!(disks.users_in(large).count(), disks.get(large).rank + 1);
        }
    }
}
