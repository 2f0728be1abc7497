//! Experiment harness for selective DIKW differential privacy: the
//! epsilon x retained-fraction sweep, the empirical epsilon verifier and
//! run-directory output.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod output;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, ModeChoice};
pub use error::{BenchError, Result};
pub use output::{emit_curves, write_sweep_run};
pub use sweep::{run_sweep, SweepOutput, SweepResult, SweepRow};
pub use verify::{run_verify, VerifyReport};
