//! Budget-constrained online assignment of workers to spatial tasks.
//!
//! Workers appear one at a time and must be paired with a task immediately
//! and irrevocably. Each pair costs the travel distance, the batch has a
//! total travel budget, and a worker must reach its task before the task's
//! deadline. The crate provides the offline optimum (min-cost flow), the
//! online threshold-greedy family, workload generators and an experiment
//! harness.

pub mod cost;
pub mod error;
pub mod fixtures;
pub mod genbench;
pub mod harness;
pub mod model;
pub mod offline;
pub mod online;

pub use error::{Error, Result};
