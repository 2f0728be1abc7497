use crate::dikw::{Column, DikwDataset};
use crate::{stats, Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
struct NumericFeature<F> {
    item: usize,
    /// (mean, variance) per class; `None` for classes absent from training.
    moments: Vec<Option<(F, F)>>,
}

#[derive(Clone, Debug, PartialEq)]
struct CategoricalFeature<F> {
    item: usize,
    /// log P(label | class) with add-one smoothing, indexed [class][label].
    log_prob: Vec<Vec<F>>,
}

/// Gaussian naive Bayes over numeric items, with categorical items
/// handled as smoothed per-class label frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct GnbModel<F> {
    class_item: usize,
    log_prior: Vec<F>,
    numeric: Vec<NumericFeature<F>>,
    categorical: Vec<CategoricalFeature<F>>,
}

/// Fits the model on the records in `train`.
///
/// Per-class variances are floored at 1e-9 times the feature's variance
/// over the training records (absolute 1e-9 when that is zero).
pub fn train_gnb<F: Scalar>(dataset: &DikwDataset<F>, train: &[usize]) -> Result<GnbModel<F>> {
    let class_item = dataset
        .class_index()
        .ok_or_else(|| Error::InvalidParameter("dataset has no class label".into()))?;
    let labels = dataset.class_values().expect("class label is categorical");
    let class_count = dataset.items()[class_item]
        .kind
        .labels()
        .map_or(0, <[String]>::len);
    if train.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for &r in train {
        by_class[labels[r]].push(r);
    }
    if by_class.iter().filter(|c| !c.is_empty()).count() < 2 {
        return Err(Error::Degenerate(
            "training set must contain at least two classes".into(),
        ));
    }
    let n = F::from_count(train.len());
    let log_prior = by_class
        .iter()
        .map(|c| (F::from_count(c.len()) / n).ln())
        .collect();

    let floor_unit = F::lit(1e-9);
    let mut numeric = Vec::new();
    let mut categorical = Vec::new();
    for (j, col) in dataset.columns().iter().enumerate() {
        if j == class_item {
            continue;
        }
        match col {
            Column::Numeric(v) => {
                let all: Vec<F> = train.iter().map(|&r| v[r]).collect();
                let global = stats::variance(&all).unwrap_or(F::zero());
                let floor = if global > F::zero() {
                    floor_unit * global
                } else {
                    floor_unit
                };
                let moments = by_class
                    .iter()
                    .map(|rows| {
                        let xs: Vec<F> = rows.iter().map(|&r| v[r]).collect();
                        let mean = stats::mean(&xs)?;
                        let var = stats::variance(&xs)?;
                        Some((mean, var.max(floor)))
                    })
                    .collect();
                numeric.push(NumericFeature { item: j, moments });
            }
            Column::Categorical(v) => {
                let k = dataset.items()[j].kind.labels().map_or(0, <[String]>::len);
                let log_prob = by_class
                    .iter()
                    .map(|rows| {
                        let mut counts = vec![0usize; k];
                        rows.iter().for_each(|&r| counts[v[r]] += 1);
                        let denom = F::from_count(rows.len() + k);
                        counts
                            .into_iter()
                            .map(|c| (F::from_count(c + 1) / denom).ln())
                            .collect()
                    })
                    .collect();
                categorical.push(CategoricalFeature { item: j, log_prob });
            }
        }
    }
    Ok(GnbModel {
        class_item,
        log_prior,
        numeric,
        categorical,
    })
}

impl<F: Scalar> GnbModel<F> {
    pub fn class_count(&self) -> usize {
        self.log_prior.len()
    }

    /// Unnormalized log posterior per class for one record; absent classes get -inf.
    pub fn log_posterior(&self, dataset: &DikwDataset<F>, record: usize) -> Vec<F> {
        let half = F::lit(0.5);
        let two_pi = F::lit(std::f64::consts::TAU);
        (0..self.class_count())
            .map(|c| {
                let mut lp = self.log_prior[c];
                if lp == F::neg_infinity() {
                    return lp;
                }
                for f in &self.numeric {
                    let x = dataset.column(f.item).as_numeric().expect("numeric")[record];
                    if let Some((m, var)) = f.moments[c] {
                        lp = lp - half * (two_pi * var).ln() - (x - m) * (x - m) / (var + var);
                    }
                }
                for f in &self.categorical {
                    let l = dataset
                        .column(f.item)
                        .as_categorical()
                        .expect("categorical")[record];
                    lp = lp + f.log_prob[c][l];
                }
                lp
            })
            .collect()
    }

    /// Most probable class; ties go to the lower class index.
    pub fn predict_record(&self, dataset: &DikwDataset<F>, record: usize) -> usize {
        let lp = self.log_posterior(dataset, record);
        let mut best = 0;
        for c in 1..lp.len() {
            if lp[c] > lp[best] {
                best = c;
            }
        }
        best
    }

    pub fn predict(&self, dataset: &DikwDataset<F>) -> Vec<usize> {
        (0..dataset.record_count())
            .map(|r| self.predict_record(dataset, r))
            .collect()
    }

    pub fn class_item(&self) -> usize {
        self.class_item
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, DikwItem, Modal};
    use crate::seed::stream;
    use rand::seq::SliceRandom;
    use rand::RngCore;

    fn gaussian(rng: &mut impl RngCore, mean: f64) -> f64 {
        // Box-Muller.
        let u1 = (rng.next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
        let u2 = rng.next_u64() as f64 / u64::MAX as f64;
        mean + (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn two_blobs(seed: u64, per_class: usize) -> DikwDataset<f64> {
        let mut rng = stream(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (c, m) in [(0usize, -5.0), (1, 5.0)] {
            for _ in 0..per_class {
                xs.push(gaussian(&mut rng, m));
                ys.push(c);
            }
        }
        DikwDataset::new(
            vec![
                DikwItem::numeric("x", Modal::Data, Category::Who),
                DikwItem::categorical("y", Modal::Information, Category::What, &["neg", "pos"]),
            ],
            vec![Column::Numeric(xs), Column::Categorical(ys)],
            vec![],
            Some("y"),
        )
        .unwrap()
    }

    #[test]
    fn separated_gaussians_are_classified() {
        let train = two_blobs(1, 100);
        let test = two_blobs(2, 100);
        let all: Vec<usize> = (0..200).collect();
        let model = train_gnb(&train, &all).unwrap();
        let pred = model.predict(&test);
        let truth = test.class_values().unwrap();
        let acc = pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / 200.0;
        assert!(acc >= 0.99, "{acc}");
    }

    #[test]
    fn permuted_labels_fall_to_chance() {
        let mut total = 0.0;
        for seed in 0..20 {
            let ds = two_blobs(seed, 100);
            let mut labels = ds.class_values().unwrap().to_vec();
            labels.shuffle(&mut stream(seed + 100));
            let shuffled = ds
                .with_columns(vec![ds.column(0).clone(), Column::Categorical(labels)])
                .unwrap();
            let train: Vec<usize> = (0..200).step_by(2).collect();
            let test: Vec<usize> = (1..200).step_by(2).collect();
            let model = train_gnb(&shuffled, &train).unwrap();
            let truth = shuffled.class_values().unwrap();
            let hits = test
                .iter()
                .filter(|&&r| model.predict_record(&shuffled, r) == truth[r])
                .count();
            total += hits as f64 / test.len() as f64;
        }
        assert!((total / 20.0 - 0.5).abs() <= 0.1, "{}", total / 20.0);
    }

    #[test]
    fn single_class_training_is_rejected() {
        let ds = two_blobs(3, 10);
        assert!(matches!(
            train_gnb(&ds, &[0, 1, 2]),
            Err(Error::Degenerate(_))
        ));
        assert!(train_gnb(&ds, &[]).is_err());
    }

    #[test]
    fn constant_feature_is_floored_not_singular() {
        let ds = DikwDataset::new(
            vec![
                DikwItem::numeric("c", Modal::Data, Category::Who),
                DikwItem::numeric("x", Modal::Data, Category::Who),
                DikwItem::categorical("y", Modal::Information, Category::What, &["a", "b"]),
            ],
            vec![
                Column::Numeric(vec![1.0; 6]),
                Column::Numeric(vec![0.0, 0.1, 0.2, 5.0, 5.1, 5.2]),
                Column::Categorical(vec![0, 0, 0, 1, 1, 1]),
            ],
            vec![],
            Some("y"),
        )
        .unwrap();
        let model = train_gnb::<f64>(&ds, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(model.predict(&ds), vec![0, 0, 0, 1, 1, 1]);
        assert!(model.log_posterior(&ds, 0).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn categorical_features_use_smoothed_frequencies() {
        let ds = DikwDataset::new(
            vec![
                DikwItem::categorical("k", Modal::Knowledge, Category::How, &["u", "v", "w"]),
                DikwItem::categorical("y", Modal::Information, Category::What, &["a", "b"]),
            ],
            vec![
                Column::Categorical(vec![0, 0, 1, 2, 2, 2]),
                Column::Categorical(vec![0, 0, 0, 1, 1, 1]),
            ],
            vec![],
            Some("y"),
        )
        .unwrap();
        let model = train_gnb::<f64>(&ds, &[0, 1, 2, 3, 4, 5]).unwrap();
        // P(k=u | a) = (2 + 1) / (3 + 3).
        let lp = model.log_posterior(&ds, 0);
        let expected_a = (0.5f64).ln() + (3.0f64 / 6.0).ln();
        assert!((lp[0] - expected_a).abs() < 1e-12);
        assert_eq!(model.predict(&ds), vec![0, 0, 0, 1, 1, 1]);
    }
}
