//! Reference solvers: the exact oracle and the greedy baseline.

mod matching;
mod ncs;
mod opt;

pub use matching::{feasible_assignment, RadiusChoice};
pub use ncs::ncs_solve;
pub use opt::{opt_solve, OptReport, OptStatus, DEFAULT_NODE_BUDGET};
