use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument is outside its domain (negative radius, `c <= 0`, ...).
    Domain(String),
    /// Instance is structurally invalid (no servers, non-finite coordinate, ...).
    InvalidInstance(String),
    /// Total server capacity is smaller than the number of users.
    InsufficientCapacity { capacity: u64, users: usize },
    /// The dual ascent has uncovered users left but nothing can rise.
    Stalled { uncovered: usize, clock: f64 },
    /// A tight disk holds more uncovered users than its server can still take.
    CapacityInvariant {
        server: usize,
        boundary_user: usize,
        newly_covered: usize,
        remaining_capacity: u32,
        clock: f64,
        trace: Vec<crate::pd::SelectionEvent>,
    },
    /// A disk handed to the selection step is not active and tight.
    NotSelectable { disk: usize },
    /// Disk and key belong to different servers.
    ServerMismatch { disk_server: usize, key_server: usize },
    /// Approximation ratio requested against a zero optimum with a positive value.
    DegenerateRatio { alg_power: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidInstance(msg) => write!(f, "invalid instance: {msg}"),
            Error::InsufficientCapacity { capacity, users } => {
                write!(f, "total capacity {capacity} is below the number of users {users}")
            }
            Error::Stalled { uncovered, clock } => {
                write!(f, "dual ascent stalled at clock {clock} with {uncovered} uncovered users")
            }
            Error::CapacityInvariant {
                server,
                boundary_user,
                newly_covered,
                remaining_capacity,
                clock,
                trace,
            } => write!(
                f,
                "tight disk (server {server}, boundary user {boundary_user}) at clock {clock} would \
                 cover {newly_covered} users but only {remaining_capacity} slots remain \
                 ({} selections before it)",
                trace.len()
            ),
            Error::NotSelectable { disk } => write!(f, "disk {disk} is not active and tight"),
            Error::ServerMismatch { disk_server, key_server } => {
                write!(f, "disk of server {disk_server} compared with a key of server {key_server}")
            }
            Error::DegenerateRatio { alg_power } => {
                write!(f, "optimum is zero but the algorithm paid {alg_power}")
            }
        }
    }
}

impl core::error::Error for Error {}
