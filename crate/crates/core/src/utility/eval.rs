use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::Serialize;

use super::train_gnb;
use crate::dikw::DikwDataset;
use crate::seed::stream;
use crate::{Error, Result, Scalar};

/// Record indices of a train/holdout partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
    pub seed: u64,
}

/// Per-class shuffled split keeping `train_fraction` of each class (rounded) for training.
pub fn stratified_split<F: Scalar>(
    dataset: &DikwDataset<F>,
    train_fraction: f64,
    seed: u64,
) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let labels = dataset
        .class_values()
        .ok_or_else(|| Error::InvalidParameter("dataset has no class label".into()))?;
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = stream(seed);
    let (mut train, mut holdout) = (Vec::new(), Vec::new());
    for c in 0..classes {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == c).collect();
        rows.shuffle(&mut rng);
        let k = (rows.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&rows[..k]);
        holdout.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    holdout.sort_unstable();
    Ok(Split {
        train,
        holdout,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilityReport<F> {
    pub accuracy: F,
    /// Recall per class present in the holdout, keyed by label.
    pub per_class_accuracy: BTreeMap<String, F>,
    pub train_fraction: F,
    pub fold_seed: Option<u64>,
}

/// Trains on every record of `masked_train` and scores on `clean_holdout`.
pub fn evaluate_utility<F: Scalar>(
    masked_train: &DikwDataset<F>,
    clean_holdout: &DikwDataset<F>,
) -> Result<UtilityReport<F>> {
    if !masked_train.same_schema(clean_holdout) {
        return Err(Error::SchemaMismatch(
            "train and holdout datasets carry different items".into(),
        ));
    }
    if clean_holdout.record_count() == 0 {
        return Err(Error::InvalidParameter("empty holdout".into()));
    }
    let all: Vec<usize> = (0..masked_train.record_count()).collect();
    let model = train_gnb(masked_train, &all)?;
    let truth = clean_holdout.class_values().expect("class label present");
    let label_names = clean_holdout.items()[model.class_item()]
        .kind
        .labels()
        .expect("categorical class");
    let mut hits = vec![0usize; label_names.len()];
    let mut totals = vec![0usize; label_names.len()];
    for (r, &t) in truth.iter().enumerate() {
        totals[t] += 1;
        if model.predict_record(clean_holdout, r) == t {
            hits[t] += 1;
        }
    }
    let correct: usize = hits.iter().sum();
    let per_class_accuracy = label_names
        .iter()
        .enumerate()
        .filter(|&(c, _)| totals[c] > 0)
        .map(|(c, name)| {
            (
                name.clone(),
                F::from_count(hits[c]) / F::from_count(totals[c]),
            )
        })
        .collect();
    let n_train = masked_train.record_count();
    Ok(UtilityReport {
        accuracy: F::from_count(correct) / F::from_count(truth.len()),
        per_class_accuracy,
        train_fraction: F::from_count(n_train) / F::from_count(n_train + truth.len()),
        fold_seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, Column, DikwItem, Modal};

    fn ds(n_per_class: usize) -> DikwDataset<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for c in 0..3 {
            for k in 0..n_per_class {
                xs.push(c as f64 * 10.0 + (k % 5) as f64 * 0.1);
                ys.push(c);
            }
        }
        DikwDataset::new(
            vec![
                DikwItem::numeric("x", Modal::Data, Category::Who),
                DikwItem::categorical("y", Modal::Information, Category::What, &["a", "b", "c"]),
            ],
            vec![Column::Numeric(xs), Column::Categorical(ys)],
            vec![],
            Some("y"),
        )
        .unwrap()
    }

    #[test]
    fn split_is_stratified_disjoint_and_seeded() {
        let d = ds(50);
        let s = stratified_split(&d, 0.7, 3).unwrap();
        assert_eq!(s.train.len(), 105);
        assert_eq!(s.holdout.len(), 45);
        assert!(s.train.iter().all(|r| !s.holdout.contains(r)));
        let labels = d.class_values().unwrap();
        for c in 0..3 {
            assert_eq!(s.train.iter().filter(|&&r| labels[r] == c).count(), 35);
        }
        assert_eq!(s, stratified_split(&d, 0.7, 3).unwrap());
        assert_ne!(s, stratified_split(&d, 0.7, 4).unwrap());
        assert!(stratified_split(&d, 1.0, 3).is_err());
    }

    #[test]
    fn report_is_consistent() {
        let d = ds(20);
        let s = stratified_split(&d, 0.7, 1).unwrap();
        let r = evaluate_utility(&d.subset(&s.train), &d.subset(&s.holdout)).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.per_class_accuracy.len(), 3);
        assert!((r.train_fraction - 0.7).abs() < 1e-12);
        // accuracy is the class-count weighted mean of per-class accuracies
        let labels = d.subset(&s.holdout).class_values().unwrap().to_vec();
        let names = ["a", "b", "c"];
        let weighted: f64 = (0..3)
            .map(|c| {
                labels.iter().filter(|&&l| l == c).count() as f64 * r.per_class_accuracy[names[c]]
            })
            .sum::<f64>()
            / labels.len() as f64;
        assert!((weighted - r.accuracy).abs() < 1e-12);
    }

    #[test]
    fn schema_mismatch() {
        let d = ds(5);
        let other = DikwDataset::new(
            vec![
                DikwItem::numeric("z", Modal::Data, Category::Who),
                DikwItem::categorical("y", Modal::Information, Category::What, &["a", "b", "c"]),
            ],
            d.columns().to_vec(),
            vec![],
            Some("y"),
        )
        .unwrap();
        assert!(matches!(
            evaluate_utility(&d, &other),
            Err(Error::SchemaMismatch(_))
        ));
    }
}
