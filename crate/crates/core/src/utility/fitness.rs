use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{evaluate_utility, masked_variance_ratio};
use crate::dikw::{DikwDataset, MaskPlan};
use crate::mech::{apply_dp_seeded, DpParams};
use crate::swarm::MaskObjective;
use crate::{Error, Result, Scalar};

/// Weights of holdout accuracy and support coverage in the swarm fitness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights<F> {
    pub utility: F,
    pub coverage: F,
}

impl<F: Scalar> Default for FitnessWeights<F> {
    fn default() -> Self {
        Self {
            utility: F::one(),
            coverage: F::lit(0.5),
        }
    }
}

impl<F: Scalar> FitnessWeights<F> {
    /// The utility weight must be non-negative. A negative coverage weight
    /// is allowed and penalizes noising; retained-fraction targeting uses it
    /// to reach small fractions.
    pub fn validate(&self) -> Result<()> {
        if !(self.utility >= F::zero() && self.utility.is_finite()) || !self.coverage.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "invalid fitness weights ({}, {})",
                self.utility, self.coverage
            )));
        }
        if self.utility == F::zero() && self.coverage == F::zero() {
            return Err(Error::InvalidParameter(
                "fitness weights are both zero".into(),
            ));
        }
        Ok(())
    }
}

pub fn compose_fitness<F: Scalar>(accuracy: F, coverage: F, weights: &FitnessWeights<F>) -> F {
    weights.utility * accuracy + weights.coverage * coverage
}

/// Weighted sum of `accuracy` and the share of `support` that `mask` selects.
pub fn fitness<F: Scalar>(
    accuracy: F,
    mask: &MaskPlan,
    support: &MaskPlan,
    weights: &FitnessWeights<F>,
) -> Result<F> {
    if mask.len() != support.len() {
        return Err(Error::LengthMismatch {
            expected: support.len(),
            found: mask.len(),
        });
    }
    let size = support.count();
    if size == 0 {
        return Err(Error::EmptySupport("(given support)".into()));
    }
    let covered = mask.indices().filter(|&j| support.is_selected(j)).count();
    Ok(compose_fitness(
        accuracy,
        F::from_count(covered) / F::from_count(size),
        weights,
    ))
}

/// Swarm objective: noise the training split under a mask, train naive
/// Bayes on it and score the clean holdout.
///
/// The noise seed is fixed, so a mask always sees the same noise and each
/// item's noise does not depend on which other items are selected.
/// Accuracies are cached per mask and survive weight changes.
pub struct DpObjective<'a, F> {
    train: &'a DikwDataset<F>,
    holdout: &'a DikwDataset<F>,
    params: &'a DpParams<F>,
    support: MaskPlan,
    noise_seed: u64,
    weights: FitnessWeights<F>,
    accuracy: HashMap<MaskPlan, F>,
    variance: HashMap<MaskPlan, Option<F>>,
}

impl<'a, F: Scalar> DpObjective<'a, F> {
    pub fn new(
        train: &'a DikwDataset<F>,
        holdout: &'a DikwDataset<F>,
        params: &'a DpParams<F>,
        support: MaskPlan,
        noise_seed: u64,
        weights: FitnessWeights<F>,
    ) -> Result<Self> {
        weights.validate()?;
        train.check_mask(&support)?;
        if !train.same_schema(holdout) {
            return Err(Error::SchemaMismatch(
                "train and holdout datasets carry different items".into(),
            ));
        }
        Ok(Self {
            train,
            holdout,
            params,
            support,
            noise_seed,
            weights,
            accuracy: HashMap::new(),
            variance: HashMap::new(),
        })
    }

    pub fn weights(&self) -> &FitnessWeights<F> {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: FitnessWeights<F>) -> Result<()> {
        weights.validate()?;
        self.weights = weights;
        Ok(())
    }

    /// Distinct masks evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.accuracy.len()
    }

    pub fn accuracy(&mut self, mask: &MaskPlan) -> Result<F> {
        if let Some(&a) = self.accuracy.get(mask) {
            return Ok(a);
        }
        let noised = apply_dp_seeded(self.train, mask, self.params, self.noise_seed)?;
        let a = evaluate_utility(&noised, self.holdout)?.accuracy;
        self.accuracy.insert(mask.clone(), a);
        Ok(a)
    }
}

impl<F: Scalar> MaskObjective<F> for DpObjective<'_, F> {
    fn fitness(&mut self, mask: &MaskPlan) -> Result<F> {
        let a = self.accuracy(mask)?;
        fitness(a, mask, &self.support, &self.weights)
    }

    fn masked_variance(&mut self, mask: &MaskPlan) -> Result<Option<F>> {
        if let Some(&v) = self.variance.get(mask) {
            return Ok(v);
        }
        let numeric = mask
            .indices()
            .any(|j| self.train.items()[j].kind.is_numeric());
        let v = if numeric {
            let noised = apply_dp_seeded(self.train, mask, self.params, self.noise_seed)?;
            match masked_variance_ratio(self.train, &noised, mask) {
                Ok(v) => Some(v),
                Err(Error::Degenerate(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        self.variance.insert(mask.clone(), v);
        Ok(v)
    }
}
