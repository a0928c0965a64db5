//! Seeded random instances.
//!
//! The generator is ChaCha8 seeded with `ChaCha8Rng::seed_from_u64(seed)`,
//! using one stream per entity kind (`set_stream`): 0 for users, 1 for
//! servers, 2 for capacities. Draws are made in id order.
//!
//! * uniform real in `[0, 1)`: `(next_u64() >> 11) * 2^-53`
//! * uniform integer in `[lo, hi]`: `lo + next_u64() % (hi - lo + 1)`
//!
//! Users are uniform in `[0, l]^2`. Servers are uniform in the square of side
//! `lambda * l` centered at `(l/2, l/2)`. Capacities are uniform integers in
//! `[ceil(kbar/2), floor(3 kbar/2)]`, then raised round-robin until they
//! cover every user.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{Instance, Point, PowerParams};

const USER_STREAM: u64 = 0;
const SERVER_STREAM: u64 = 1;
const CAPACITY_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub m: usize,
    pub n: usize,
    pub c: f64,
    pub alpha: f64,
    /// Side length of the square holding all users.
    pub side: f64,
    /// Side of the server square relative to `side`.
    pub lambda: f64,
    /// Mean server capacity.
    pub kbar: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { m: 5, n: 100, c: 1.0, alpha: 2.0, side: 100.0, lambda: 1.0, kbar: 50.0, seed: 0 }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<PowerParams> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidInstance(format!("need m >= 1 and n >= 1, got m={} n={}", self.m, self.n)));
        }
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::Domain(format!("side length must be positive, got {}", self.side)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Domain(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !(self.kbar.is_finite() && self.kbar >= 0.0) {
            return Err(Error::Domain(format!("mean capacity must be nonnegative, got {}", self.kbar)));
        }
        PowerParams::new(self.c, self.alpha)
    }

    /// With a zero-size server square every server sits at the center.
    pub fn servers_coincide(&self) -> bool {
        self.m > 1 && self.lambda * self.side == 0.0
    }

    /// Inclusive capacity range `[ceil(kbar/2), floor(3 kbar/2)]`.
    pub fn capacity_range(&self) -> (u32, u32) {
        let lo = libm::ceil(self.kbar / 2.0) as u32;
        let hi = libm::floor(1.5 * self.kbar) as u32;
        (lo, hi.max(lo))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn int_in(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> u32 {
    let span = u64::from(hi - lo) + 1;
    lo + (rng.next_u64() % span) as u32
}

pub fn gen_instance(config: &GenConfig) -> Result<Instance> {
    let params = config.validate()?;
    let l = config.side;

    let mut rng = stream(config.seed, USER_STREAM);
    let users: Vec<Point> = (0..config.n)
        .map(|_| {
            let x = l * unit(&mut rng);
            let y = l * unit(&mut rng);
            Point::new(x, y)
        })
        .collect();

    let width = config.lambda * l;
    let origin = (l - width) / 2.0;
    let mut rng = stream(config.seed, SERVER_STREAM);
    let positions: Vec<Point> = (0..config.m)
        .map(|_| {
            let x = origin + width * unit(&mut rng);
            let y = origin + width * unit(&mut rng);
            Point::new(x, y)
        })
        .collect();

    let (lo, hi) = config.capacity_range();
    let mut rng = stream(config.seed, CAPACITY_STREAM);
    let caps: Vec<u32> = (0..config.m).map(|_| int_in(&mut rng, lo, hi)).collect();
    let caps = adjust_capacities(caps, config.n);

    Instance::new(params, positions.into_iter().zip(caps).collect(), users)
}

/// Raises capacities one unit at a time, cycling through servers in id
/// order, until they sum to at least `n`. Sufficient capacities are
/// returned unchanged.
pub fn adjust_capacities(mut capacities: Vec<u32>, n: usize) -> Vec<u32> {
    if capacities.is_empty() {
        return capacities;
    }
    let total: u64 = capacities.iter().map(|&k| u64::from(k)).sum();
    let mut deficit = (n as u64).saturating_sub(total);
    let mut i = 0;
    while deficit > 0 {
        capacities[i] += 1;
        deficit -= 1;
        i = (i + 1) % capacities.len();
    }
    capacities
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn adjust_examples() {
        assert_eq!(adjust_capacities(vec![3, 3], 8), vec![4, 4]);
        assert_eq!(adjust_capacities(vec![10, 10], 8), vec![10, 10]);
        assert_eq!(adjust_capacities(vec![0, 0, 0], 2), vec![1, 1, 0]);
    }

    #[test]
    fn table_configuration() {
        let cfg = GenConfig { m: 5, n: 100, kbar: 50.0, lambda: 1.0, seed: 42, ..GenConfig::default() };
        let inst = gen_instance(&cfg).unwrap();
        assert_eq!((inst.num_servers(), inst.num_users()), (5, 100));
        assert!(inst.total_capacity() >= 100);
        for s in inst.servers() {
            assert!((25..=75).contains(&s.capacity));
        }
        for u in inst.users() {
            assert!((0.0..100.0).contains(&u.pos.x) && (0.0..100.0).contains(&u.pos.y));
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let cfg = GenConfig { seed: 7, ..GenConfig::default() };
        assert_eq!(gen_instance(&cfg).unwrap(), gen_instance(&cfg).unwrap());
        let other = GenConfig { seed: 8, ..cfg };
        assert_ne!(gen_instance(&cfg).unwrap(), gen_instance(&other).unwrap());
    }

    #[test]
    fn alpha_does_not_move_points() {
        let a = gen_instance(&GenConfig { alpha: 1.0, seed: 3, ..GenConfig::default() }).unwrap();
        let b = gen_instance(&GenConfig { alpha: 2.0, seed: 3, ..GenConfig::default() }).unwrap();
        assert_eq!(a.servers(), b.servers());
        assert_eq!(a.users(), b.users());
    }

    #[test]
    fn lambda_shrinks_server_square() {
        let cfg = GenConfig { m: 10, lambda: 0.2, seed: 11, ..GenConfig::default() };
        for s in gen_instance(&cfg).unwrap().servers() {
            assert!((40.0..=60.0).contains(&s.pos.x) && (40.0..=60.0).contains(&s.pos.y));
        }
        let zero = GenConfig { m: 3, lambda: 0.0, ..cfg };
        assert!(zero.servers_coincide());
        let inst = gen_instance(&zero).unwrap();
        assert!(inst.servers().iter().all(|s| s.pos == Point::new(50.0, 50.0)));
    }

    #[test]
    fn full_lambda_spans_domain() {
        let cfg = GenConfig { m: 2000, n: 1, lambda: 1.0, seed: 5, ..GenConfig::default() };
        let inst = gen_instance(&cfg).unwrap();
        let xs: Vec<f64> = inst.servers().iter().map(|s| s.pos.x).collect();
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(min < 1.0 && max > 99.0);
    }

    #[test]
    fn coordinate_means_are_centered() {
        // mean of 10^4 uniform draws on [0, 100]: sigma = 100 / sqrt(12 * 10^4)
        let cfg = GenConfig { m: 1, n: 10_000, seed: 99, ..GenConfig::default() };
        let inst = gen_instance(&cfg).unwrap();
        let sigma = 100.0 / libm::sqrt(12.0 * 10_000.0);
        let mean_x = inst.users().iter().map(|u| u.pos.x).sum::<f64>() / 10_000.0;
        let mean_y = inst.users().iter().map(|u| u.pos.y).sum::<f64>() / 10_000.0;
        assert!((mean_x - 50.0).abs() < 3.0 * sigma, "{mean_x}");
        assert!((mean_y - 50.0).abs() < 3.0 * sigma, "{mean_y}");
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(gen_instance(&GenConfig { m: 0, ..GenConfig::default() }).is_err());
        assert!(gen_instance(&GenConfig { lambda: 1.5, ..GenConfig::default() }).is_err());
        assert!(gen_instance(&GenConfig { alpha: 0.5, ..GenConfig::default() }).is_err());
        assert!(gen_instance(&GenConfig { kbar: -1.0, ..GenConfig::default() }).is_err());
    }
}
