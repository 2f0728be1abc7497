//! Utility measurement: naive-Bayes accuracy, variance inflation and the swarm fitness.

mod eval;
mod fitness;
mod gnb;
mod variance;

pub use eval::{evaluate_utility, stratified_split, Split, UtilityReport};
pub use fitness::{compose_fitness, fitness, DpObjective, FitnessWeights};
pub use gnb::{train_gnb, GnbModel};
pub use variance::masked_variance_ratio;
