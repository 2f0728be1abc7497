//! Selective differential privacy for DIKW-tagged tabular data.
//!
//! A dataset is a set of items (columns) tagged with a DIKW modal and a
//! 5W category. Privacy modes pick the eligible items by category, a
//! sign-valued binary particle swarm picks which eligible items actually
//! receive noise, and a Gaussian naive-Bayes classifier measures what the
//! noise costs in accuracy.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! CLI and the file formats use.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dikw;
pub mod error;
pub mod gen;
pub mod mech;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod swarm;
pub mod utility;

pub use dikw::{
    Category, Column, DikwDataset, DikwItem, MaskPlan, Modal, PrivacyMode, PurposeEdge, Value,
    ValueKind,
};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dataset over `f64` values.
pub type Dataset = dikw::DikwDataset<f64>;
/// Item over `f64` metadata.
pub type Item = dikw::DikwItem<f64>;
/// Differential-privacy parameters over `f64`.
pub type DpParams = mech::DpParams<f64>;
/// Swarm configuration over `f64`.
pub type SwarmConfig = swarm::SwarmConfig<f64>;
/// Particle over `f64` velocities.
pub type Particle = swarm::Particle<f64>;
/// Optimization trace over `f64` fitness values.
pub type OptimizationTrace = swarm::OptimizationTrace<f64>;
/// Fitness weights over `f64`.
pub type FitnessWeights = utility::FitnessWeights<f64>;
/// Gaussian naive-Bayes model over `f64`.
pub type GnbModel = utility::GnbModel<f64>;
/// Utility report over `f64`.
pub type UtilityReport = utility::UtilityReport<f64>;
