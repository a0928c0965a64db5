//! File formats, the experiment harness and the command-line interface on
//! top of `cmpc_core`.

pub mod bench;
pub mod cli;
pub mod format;
