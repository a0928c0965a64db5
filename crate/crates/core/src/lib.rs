//! Capacitated Minimum Power Cover (CMPC).
//!
//! Edge servers with integer user capacities must each pick one coverage
//! disk (centered on the server, with some user on its boundary) so that
//! every user is served by a server whose disk contains it, no server serves
//! more users than its capacity, and the total transmit power
//! `sum c * r^alpha` is minimal.
//!
//! This crate is `no_std` (it needs `alloc`) and holds all the algorithmic
//! parts:
//!
//! * [`model`] - points, servers, users, the power law, the user ordering
//!   used to break distance ties, and the `m * n` candidate disks.
//! * [`pd`] - the event-driven primal-dual solver together with its dual
//!   state and the checkers for dual feasibility and the charging argument.
//! * [`reference`] - the exact branch-and-bound oracle, the capacitated
//!   assignment (matching) subroutine it relies on, and the nearest capable
//!   server greedy baseline.
//! * [`metrics`] - solution validation against the integer program and the
//!   load-variance / approximation-ratio metrics.
//! * [`gen`] - seeded random instance generation.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod gen;
pub mod metrics;
pub mod model;
pub mod pd;
pub mod reference;
mod solution;

pub use error::{Error, Result};
pub use model::{build_disks, order_key, power, Disk, DiskSet, Instance, OrderKey, Point, PowerParams, Server, User};
pub use solution::Solution;
