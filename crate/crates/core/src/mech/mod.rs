//! Differential-privacy mechanisms and their selective application.

mod apply;
mod laplace;
mod order;
mod response;
mod verify;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dikw::{Column, DikwDataset};
use crate::{stats, Error, Result, Scalar};

pub use apply::{apply_dp, apply_dp_seeded, apply_dp_with_report};
pub use laplace::{laplace_noise, sample_laplace};
pub use order::mode_order_suggestion;
pub use response::{keep_probability, randomized_response};
pub use verify::{
    verify_epsilon, EpsilonEstimate, LaplaceMechanism, Probe, RandomizedResponse,
    SingleValueMechanism, Verdict,
};

/// Privacy budget and per-item sensitivities.
///
/// Numeric items are noised with the Laplace mechanism, categorical items
/// with randomized response. The budget is spent once per selected item;
/// items are disjoint columns of the same records, so the reported total
/// stays `epsilon` (parallel composition).
#[derive(Clone, Debug, PartialEq)]
pub struct DpParams<F> {
    epsilon: F,
    sensitivity: BTreeMap<String, F>,
}

impl<F: Scalar> DpParams<F> {
    pub fn new(epsilon: F) -> Result<Self> {
        if !(epsilon > F::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            sensitivity: BTreeMap::new(),
        })
    }

    /// Sensitivity of every numeric item defaults to its empirical range
    /// (max - min) over `dataset`. Constant columns get no default.
    pub fn from_ranges(dataset: &DikwDataset<F>, epsilon: F) -> Result<Self> {
        let mut params = Self::new(epsilon)?;
        for (item, col) in dataset.items().iter().zip(dataset.columns()) {
            if let Column::Numeric(v) = col {
                if let Some((lo, hi)) = stats::min_max(v) {
                    if hi > lo {
                        params.sensitivity.insert(item.id.clone(), hi - lo);
                    }
                }
            }
        }
        Ok(params)
    }

    pub fn with_sensitivity(mut self, item_id: &str, sensitivity: F) -> Result<Self> {
        if !(sensitivity > F::zero()) || !sensitivity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sensitivity for \"{item_id}\" must be positive, got {sensitivity}"
            )));
        }
        self.sensitivity.insert(item_id.to_string(), sensitivity);
        Ok(self)
    }

    pub fn with_epsilon(&self, epsilon: F) -> Result<Self> {
        let mut p = Self::new(epsilon)?;
        p.sensitivity = self.sensitivity.clone();
        Ok(p)
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn sensitivity(&self, item_id: &str) -> Option<F> {
        self.sensitivity.get(item_id).copied()
    }

    pub fn sensitivities(&self) -> &BTreeMap<String, F> {
        &self.sensitivity
    }

    pub fn budget(&self) -> BudgetReport {
        BudgetReport {
            epsilon_per_item: self.epsilon.as_f64(),
            total_epsilon: self.epsilon.as_f64(),
            composition: "parallel: each selected item spends epsilon once on disjoint columns",
        }
    }
}

/// Budget accounting attached to run metadata.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    pub epsilon_per_item: f64,
    pub total_epsilon: f64,
    pub composition: &'static str,
}

/// Summary of the noise actually drawn for one item.
///
/// For numeric items the statistics describe the additive noise
/// (noised - clean). For categorical items they describe the indicator
/// "label was changed".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseReport {
    pub item_id: String,
    pub draw_count: usize,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, DikwItem, Modal};

    #[test]
    fn params_validate() {
        assert!(DpParams::new(0.0f64).is_err());
        assert!(DpParams::new(-1.0f64).is_err());
        assert!(DpParams::new(f64::INFINITY).is_err());
        let p = DpParams::new(1.0f64).unwrap();
        assert!(p.clone().with_sensitivity("a", 0.0).is_err());
        assert_eq!(
            p.with_sensitivity("a", 2.0).unwrap().sensitivity("a"),
            Some(2.0)
        );
    }

    #[test]
    fn range_defaults_skip_constant_columns() {
        let ds = DikwDataset::new(
            vec![
                DikwItem::numeric("a", Modal::Data, Category::Who),
                DikwItem::numeric("c", Modal::Data, Category::Who),
            ],
            vec![
                Column::Numeric(vec![1.0, 4.0, 2.5]),
                Column::Numeric(vec![7.0, 7.0, 7.0]),
            ],
            vec![],
            None,
        )
        .unwrap();
        let p = DpParams::from_ranges(&ds, 1.0).unwrap();
        assert_eq!(p.sensitivity("a"), Some(3.0));
        assert_eq!(p.sensitivity("c"), None);
        assert_eq!(p.budget().total_epsilon, 1.0);
    }
}
