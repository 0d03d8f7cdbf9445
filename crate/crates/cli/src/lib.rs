//! Config-driven runner for the heatlab computations.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric failure,
//! 3 failed verification suite.

pub mod config;
pub mod output;
pub mod sweep;
pub mod tasks;
pub mod verify;

pub use config::{parse_config, render, TaskConfig};
pub use heatlab_core::profile;
pub use tasks::{execute, run_task, Failure};
