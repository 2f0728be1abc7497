use rand::RngCore;

use super::{laplace::sample_laplace, randomized_response, DpParams, NoiseReport};
use crate::dikw::{Column, DikwDataset, MaskPlan};
use crate::seed::{derive, hash_str, stream};
use crate::{stats, Error, Result, Scalar};

/// Noises every value of every selected item; unselected columns are copied.
///
/// One `u64` is taken from `rng` as the master seed; each item then draws
/// from its own sub-stream keyed by (master seed, item id), consumed in
/// record order. Item results are therefore independent of the order in
/// which items are processed.
pub fn apply_dp<F: Scalar, R: RngCore + ?Sized>(
    dataset: &DikwDataset<F>,
    mask: &MaskPlan,
    params: &DpParams<F>,
    rng: &mut R,
) -> Result<DikwDataset<F>> {
    apply_dp_seeded(dataset, mask, params, rng.next_u64())
}

pub fn apply_dp_seeded<F: Scalar>(
    dataset: &DikwDataset<F>,
    mask: &MaskPlan,
    params: &DpParams<F>,
    master_seed: u64,
) -> Result<DikwDataset<F>> {
    noise_columns(dataset, mask, params, master_seed, false).map(|(d, _)| d)
}

/// Like [`apply_dp_seeded`], also summarizing the drawn noise per selected item.
pub fn apply_dp_with_report<F: Scalar>(
    dataset: &DikwDataset<F>,
    mask: &MaskPlan,
    params: &DpParams<F>,
    master_seed: u64,
) -> Result<(DikwDataset<F>, Vec<NoiseReport>)> {
    noise_columns(dataset, mask, params, master_seed, true)
}

fn noise_columns<F: Scalar>(
    dataset: &DikwDataset<F>,
    mask: &MaskPlan,
    params: &DpParams<F>,
    master_seed: u64,
    report: bool,
) -> Result<(DikwDataset<F>, Vec<NoiseReport>)> {
    dataset.check_mask(mask)?;
    let eps = params.epsilon();
    let mut reports = Vec::new();
    let mut columns = Vec::with_capacity(dataset.item_count());
    for (j, (item, col)) in dataset.items().iter().zip(dataset.columns()).enumerate() {
        if !mask.is_selected(j) {
            columns.push(col.clone());
            continue;
        }
        let mut rng = stream(derive(master_seed, &[hash_str(&item.id)]));
        let (noised, deltas) = match col {
            Column::Numeric(v) => {
                let s = params
                    .sensitivity(&item.id)
                    .ok_or_else(|| Error::MissingSensitivity(item.id.clone()))?;
                let scale = s / eps;
                let noise: Vec<F> = v.iter().map(|_| sample_laplace(scale, &mut rng)).collect();
                let out = v.iter().zip(&noise).map(|(&x, &n)| x + n).collect();
                (Column::Numeric(out), noise)
            }
            Column::Categorical(v) => {
                let k = item.kind.labels().map_or(0, <[String]>::len);
                let out = v
                    .iter()
                    .map(|&l| randomized_response(l, k, eps, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let changed = v
                    .iter()
                    .zip(&out)
                    .map(|(a, b)| if a == b { F::zero() } else { F::one() })
                    .collect();
                (Column::Categorical(out), changed)
            }
        };
        if report && !deltas.is_empty() {
            reports.push(NoiseReport {
                item_id: item.id.clone(),
                draw_count: deltas.len(),
                empirical_mean: stats::mean(&deltas).map_or(0.0, Scalar::as_f64),
                empirical_variance: stats::variance(&deltas).map_or(0.0, Scalar::as_f64),
            });
        }
        columns.push(noised);
    }
    Ok((dataset.with_columns(columns)?, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, DikwItem, Modal};
    use crate::seed::stream;

    fn ds() -> DikwDataset<f64> {
        DikwDataset::new(
            vec![
                DikwItem::numeric("a", Modal::Data, Category::Who),
                DikwItem::numeric("b", Modal::Information, Category::What),
                DikwItem::categorical("k", Modal::Knowledge, Category::How, &["x", "y", "z"]),
                DikwItem::categorical("y", Modal::Information, Category::What, &["p", "q"]),
            ],
            vec![
                Column::Numeric((0..50).map(f64::from).collect()),
                Column::Numeric((0..50).map(|x| f64::from(x) * 0.5).collect()),
                Column::Categorical((0..50).map(|x| x % 3).collect()),
                Column::Categorical((0..50).map(|x| x % 2).collect()),
            ],
            vec![],
            Some("y"),
        )
        .unwrap()
    }

    fn params(d: &DikwDataset<f64>) -> DpParams<f64> {
        DpParams::from_ranges(d, 1.0).unwrap()
    }

    #[test]
    fn empty_mask_is_identity() {
        let d = ds();
        let out = apply_dp(&d, &MaskPlan::none(4), &params(&d), &mut stream(1)).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn only_selected_columns_change() {
        let d = ds();
        let mask = MaskPlan::new(vec![true, false, true, false]);
        let out = apply_dp(&d, &mask, &params(&d), &mut stream(1)).unwrap();
        assert_eq!(out.column(1), d.column(1));
        assert_eq!(out.column(3), d.column(3));
        assert_ne!(out.column(0), d.column(0));
        assert_eq!(out.record_count(), d.record_count());
        assert!(out.same_schema(&d));
    }

    #[test]
    fn deterministic_and_order_independent() {
        let d = ds();
        let p = params(&d);
        let both =
            apply_dp_seeded(&d, &MaskPlan::new(vec![true, true, false, false]), &p, 9).unwrap();
        let again =
            apply_dp_seeded(&d, &MaskPlan::new(vec![true, true, false, false]), &p, 9).unwrap();
        assert_eq!(both, again);
        // Per-item sub-streams: noising one item alone gives the same column.
        let only_b =
            apply_dp_seeded(&d, &MaskPlan::new(vec![false, true, false, false]), &p, 9).unwrap();
        assert_eq!(both.column(1), only_b.column(1));
    }

    #[test]
    fn missing_sensitivity_is_an_error() {
        let d = ds();
        let p = DpParams::new(1.0).unwrap();
        let err = apply_dp_seeded(&d, &MaskPlan::new(vec![true, false, false, false]), &p, 0);
        assert!(matches!(err, Err(Error::MissingSensitivity(id)) if id == "a"));
        // Categorical items need no sensitivity.
        assert!(
            apply_dp_seeded(&d, &MaskPlan::new(vec![false, false, true, false]), &p, 0).is_ok()
        );
    }

    #[test]
    fn class_label_mask_rejected() {
        let d = ds();
        let err = apply_dp_seeded(
            &d,
            &MaskPlan::new(vec![false, false, false, true]),
            &params(&d),
            0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn report_summarizes_draws() {
        let d = ds();
        let (_, reports) = apply_dp_with_report(
            &d,
            &MaskPlan::new(vec![true, false, true, false]),
            &params(&d),
            3,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.draw_count == 50));
        assert!(reports[1].empirical_mean >= 0.0 && reports[1].empirical_mean <= 1.0);
    }
}
