//! Experiment driver for the swarm throughput models.
//!
//! An [`ExperimentSpec`] names a method, a scenario and an optional sweep
//! over one parameter. [`run`] evaluates every point and yields a CSV table
//! plus a JSON manifest from which the run can be repeated exactly.

pub mod compare;
pub mod config;
pub mod error;
pub mod format;
pub mod recipes;
pub mod run;
pub mod spec;
pub mod table;

pub use compare::{compare, CompareRow, Series};
pub use error::{ExpError, Result};
pub use run::{run, RunOutput};
pub use spec::{Axis, ExperimentSpec, Method, Range, SimSettings, Sweep, TransientEvent, TransientSettings};
pub use table::{read_throughput_csv, Table, ThroughputRow, TransientRow};
