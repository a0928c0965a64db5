//! Primal-dual solver.
//!
//! Prices `theta` of all uncovered users rise together. Each candidate disk
//! absorbs the rise through its `beta` (when it holds more uncovered users
//! than its server has slots left) or through per-user `gamma` values. The
//! first disk whose packing constraint becomes tight is opened: its
//! uncovered users are assigned to its server, which then drops every
//! smaller-or-equal disk. A server may open several nested disks over the
//! run; its final power is that of the last one.

mod solver;
mod state;
mod verify;

pub use solver::{pd_solve, tightness_tolerance, ChargeRecord, EventTrace, NextEvent, PdOutcome, PdSolver, SelectionEvent};
pub use state::{dual_objective, DualState, SolverState};
pub use verify::{check_charging, check_run, verify_dual_feasibility, ChargeViolation, DualViolation, RunReport};
