//! Sign-valued binary particle swarm over noise masks.
//!
//! Positions and sign velocities live in {-1, +1}: +1 means "noise this
//! item", and a sign velocity of -1 toggles the item. The real-valued
//! velocity recurrence is carried between steps and its sign drives the
//! toggle decision.

mod bests;
mod binary;
mod continuous;
mod decide;
mod optimize;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub use bests::{plain_bests, spatiotemporal_bests, SpatioTemporalContext};
pub use binary::binary_pso_step;
pub use continuous::continuous_pso_step;
pub use decide::{association, decide_mode, ModeDecision};
pub use optimize::{
    converged, optimize_mask, MaskObjective, OptimizationOutcome, OptimizationTrace, TraceRecord,
};

/// Spatial-temporal weighting of best-candidate ranking.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatioTemporalWeights<F> {
    pub spatial: F,
    pub temporal: F,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "F: Scalar"))]
pub struct SwarmConfig<F> {
    pub particle_count: usize,
    pub c1: F,
    pub c2: F,
    /// Multiplier on the carried real velocity; 1 reproduces the plain recurrence.
    pub inertia: F,
    /// Symmetric bound on the real velocity, applied after each update.
    pub velocity_clamp: Option<F>,
    /// Per-coordinate probability of flipping a position after each step
    /// (its real velocity is reset to 0). 0 gives the bare recurrence,
    /// which stops moving once every particle agrees with its guides.
    pub mutation_rate: F,
    pub max_iterations: usize,
    /// Ring neighbourhood radius for the local best.
    pub neighborhood_radius: usize,
    pub seed: u64,
    pub variance_blowup_factor: F,
    pub st_weights: Option<SpatioTemporalWeights<F>>,
}

impl<F: Scalar> Default for SwarmConfig<F> {
    fn default() -> Self {
        Self {
            particle_count: 16,
            c1: F::lit(2.0),
            c2: F::lit(2.0),
            inertia: F::one(),
            velocity_clamp: Some(F::lit(4.0)),
            mutation_rate: F::lit(0.2),
            max_iterations: 40,
            neighborhood_radius: 1,
            seed: 0,
            variance_blowup_factor: F::lit(1.5),
            st_weights: None,
        }
    }
}

impl<F: Scalar> SwarmConfig<F> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.particle_count < 2 {
            return bad(format!(
                "particle_count must be >= 2, got {}",
                self.particle_count
            ));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("inertia", self.inertia)] {
            if !(v >= F::zero()) || !v.is_finite() {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(self.mutation_rate >= F::zero() && self.mutation_rate <= F::one()) {
            return bad(format!(
                "mutation_rate must lie in [0, 1], got {}",
                self.mutation_rate
            ));
        }
        if let Some(c) = self.velocity_clamp {
            if !(c > F::zero()) {
                return bad(format!("velocity_clamp must be positive, got {c}"));
            }
        }
        if !(self.variance_blowup_factor > F::one()) {
            return bad(format!(
                "variance_blowup_factor must exceed 1, got {}",
                self.variance_blowup_factor
            ));
        }
        if let Some(w) = self.st_weights {
            if !(w.spatial >= F::zero()) || !(w.temporal >= F::zero()) {
                return bad("spatial-temporal weights must be non-negative".into());
            }
        }
        Ok(())
    }
}

/// Sign entry, always -1 or +1.
pub type Sign = i8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Particle<F> {
    pub position: Vec<Sign>,
    pub sign_velocity: Vec<Sign>,
    pub real_velocity: Vec<F>,
    pub best_position: Vec<Sign>,
    pub best_fitness: F,
}

impl<F: Scalar> Particle<F> {
    /// Particle at `position` with zero velocity; its personal best is the start.
    pub fn at(position: Vec<Sign>, fitness: F) -> Self {
        let n = position.len();
        Self {
            best_position: position.clone(),
            position,
            sign_velocity: vec![1; n],
            real_velocity: vec![F::zero(); n],
            best_fitness: fitness,
        }
    }

    pub fn dimension(&self) -> usize {
        self.position.len()
    }

    /// Flips each coordinate with probability `rate`, zeroing its real velocity.
    pub fn mutate<R: rand::Rng + ?Sized>(&mut self, rate: F, rng: &mut R) {
        if rate <= F::zero() {
            return;
        }
        for i in 0..self.position.len() {
            if F::lit(rng.gen::<f64>()) < rate {
                self.position[i] = -self.position[i];
                self.sign_velocity[i] = -self.sign_velocity[i];
                self.real_velocity[i] = F::zero();
            }
        }
    }

    /// Records an evaluation of the current position.
    pub fn observe(&mut self, fitness: F) {
        if fitness > self.best_fitness {
            self.best_fitness = fitness;
            self.best_position.clone_from(&self.position);
        }
    }
}

pub(crate) fn check_signs(v: &[Sign]) -> Result<()> {
    match v.iter().position(|&s| s != 1 && s != -1) {
        Some(index) => Err(Error::NotASign {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
