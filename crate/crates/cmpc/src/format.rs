//! JSON formats for instances, solutions, event traces and oracle reports.

use std::fs;
use std::path::{Path, PathBuf};

use cmpc_core::pd::SelectionEvent;
use cmpc_core::reference::{OptReport, OptStatus};
use cmpc_core::{Instance, Point, PowerParams, Solution};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Syntax or shape error; serde_json reports the field and the line.
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Field { path: PathBuf, field: String, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerRecord {
    pub x: f64,
    pub y: f64,
    pub k: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserRecord {
    pub x: f64,
    pub y: f64,
}

/// On-disk instance. Array positions are the ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub c: f64,
    pub alpha: f64,
    pub servers: Vec<ServerRecord>,
    pub users: Vec<UserRecord>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            c: inst.params().c(),
            alpha: inst.params().alpha(),
            servers: inst.servers().iter().map(|s| ServerRecord { x: s.pos.x, y: s.pos.y, k: s.capacity }).collect(),
            users: inst.users().iter().map(|u| UserRecord { x: u.pos.x, y: u.pos.y }).collect(),
        }
    }
}

impl InstanceFile {
    fn into_instance(self, path: &Path) -> Result<Instance, FormatError> {
        let field = |field: &str, message: String| FormatError::Field { path: path.to_path_buf(), field: field.into(), message };
        let params = PowerParams::new(self.c, self.alpha).map_err(|e| {
            let name = if self.c.is_finite() && self.c > 0.0 { "alpha" } else { "c" };
            field(name, e.to_string())
        })?;
        for (i, s) in self.servers.iter().enumerate() {
            if !(s.x.is_finite() && s.y.is_finite()) {
                return Err(field(&format!("servers[{i}]"), "coordinates must be finite".into()));
            }
        }
        for (i, u) in self.users.iter().enumerate() {
            if !(u.x.is_finite() && u.y.is_finite()) {
                return Err(field(&format!("users[{i}]"), "coordinates must be finite".into()));
            }
        }
        let servers = self.servers.into_iter().map(|s| (Point::new(s.x, s.y), s.k)).collect();
        let users = self.users.into_iter().map(|u| Point::new(u.x, u.y)).collect();
        Instance::new(params, servers, users).map_err(|e| {
            let name = if e.to_string().contains("user") { "users" } else { "servers" };
            field(name, e.to_string())
        })
    }
}

pub fn parse_instance(text: &str, path: &Path) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_instance(path)
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    parse_instance(&text, path)
}

pub fn instance_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("instance serializes")
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<(), FormatError> {
    fs::write(path, instance_json(inst) + "\n").map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerSolution {
    pub server: usize,
    pub radius: f64,
    pub power: f64,
    /// `None` for a switched-off server.
    pub boundary_user: Option<usize>,
    pub users: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub servers: Vec<ServerSolution>,
    pub total_power: f64,
}

impl From<&Solution> for SolutionFile {
    fn from(sol: &Solution) -> Self {
        let servers = sol
            .chosen_disk
            .iter()
            .enumerate()
            .map(|(server, disk)| ServerSolution {
                server,
                radius: disk.map_or(0.0, |d| d.radius()),
                power: disk.map_or(0.0, |d| d.power),
                boundary_user: disk.map(|d| d.boundary_user),
                users: sol.users_of(server),
            })
            .collect();
        SolutionFile { servers, total_power: sol.total_power }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub clock: f64,
    pub server: usize,
    pub boundary_user: usize,
    pub newly_covered: Vec<usize>,
}

pub fn trace_entries(trace: &[SelectionEvent]) -> Vec<TraceEntry> {
    trace
        .iter()
        .map(|e| TraceEntry {
            clock: e.clock,
            server: e.server,
            boundary_user: e.boundary_user,
            newly_covered: e.newly_covered.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStatus {
    pub status: String,
    pub nodes_explored: u64,
}

pub fn status_name(status: OptStatus) -> &'static str {
    match status {
        OptStatus::Optimal => "optimal",
        OptStatus::BudgetExceeded => "budget_exceeded",
        OptStatus::Infeasible => "infeasible",
    }
}

impl From<&OptReport> for OracleStatus {
    fn from(r: &OptReport) -> Self {
        OracleStatus { status: status_name(r.status).into(), nodes_explored: r.nodes_explored }
    }
}
