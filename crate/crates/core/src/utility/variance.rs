use crate::dikw::{DikwDataset, MaskPlan};
use crate::{stats, Error, Result, Scalar};

/// Mean over selected numeric items of var(masked column) / var(clean column).
///
/// Columns with zero clean variance are skipped with a warning.
pub fn masked_variance_ratio<F: Scalar>(
    clean: &DikwDataset<F>,
    masked: &DikwDataset<F>,
    mask: &MaskPlan,
) -> Result<F> {
    if !clean.same_schema(masked) || clean.record_count() != masked.record_count() {
        return Err(Error::SchemaMismatch(
            "clean and masked datasets differ in shape".into(),
        ));
    }
    clean.check_mask(mask)?;
    let mut ratios = Vec::new();
    let mut numeric_selected = 0;
    for j in mask.indices() {
        let (Some(c), Some(m)) = (clean.column(j).as_numeric(), masked.column(j).as_numeric())
        else {
            continue;
        };
        numeric_selected += 1;
        let vc = stats::variance(c).unwrap_or(F::zero());
        if vc <= F::zero() {
            log::warn!(
                "skipping \"{}\": zero variance before noising",
                clean.items()[j].id
            );
            continue;
        }
        ratios.push(stats::variance(m).unwrap_or(F::zero()) / vc);
    }
    if numeric_selected == 0 {
        return Err(Error::InvalidParameter(
            "mask selects no numeric item".into(),
        ));
    }
    stats::mean(&ratios)
        .ok_or_else(|| Error::Degenerate("every selected numeric column has zero variance".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, Column, DikwItem, Modal};
    use crate::mech::{apply_dp_seeded, DpParams};
    use crate::seed::stream;
    use rand::Rng;

    fn ds(n: usize) -> DikwDataset<f64> {
        let mut rng = stream(4);
        DikwDataset::new(
            vec![
                DikwItem::numeric("x", Modal::Data, Category::Who),
                DikwItem::numeric("flat", Modal::Data, Category::Who),
                DikwItem::categorical("k", Modal::Knowledge, Category::How, &["a", "b"]),
            ],
            vec![
                Column::Numeric((0..n).map(|_| rng.gen_range(0.0..6.0)).collect()),
                Column::Numeric(vec![2.0; n]),
                Column::Categorical((0..n).map(|r| r % 2).collect()),
            ],
            vec![],
            None,
        )
        .unwrap()
    }

    #[test]
    fn identity_is_one() {
        let d = ds(100);
        let m = MaskPlan::new(vec![true, false, true]);
        assert_eq!(masked_variance_ratio(&d, &d, &m).unwrap(), 1.0);
    }

    #[test]
    fn laplace_inflation_matches_additivity() {
        // Uniform(0, 6) has variance 3; Laplace(0, b) adds 2 b^2.
        let d = ds(10_000);
        let b = 1.5;
        let p = DpParams::new(1.0)
            .unwrap()
            .with_sensitivity("x", b)
            .unwrap();
        let m = MaskPlan::new(vec![true, false, false]);
        let noised = apply_dp_seeded(&d, &m, &p, 12).unwrap();
        let ratio = masked_variance_ratio(&d, &noised, &m).unwrap();
        let sigma2 = stats::variance(d.column(0).as_numeric().unwrap()).unwrap();
        let expected = (sigma2 + 2.0 * b * b) / sigma2;
        assert!(
            (ratio - expected).abs() / expected < 0.10,
            "{ratio} vs {expected}"
        );
    }

    #[test]
    fn empty_or_flat_selection_errors() {
        let d = ds(20);
        assert!(masked_variance_ratio(&d, &d, &MaskPlan::new(vec![false, false, true])).is_err());
        assert!(matches!(
            masked_variance_ratio(&d, &d, &MaskPlan::new(vec![false, true, false])),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(
            masked_variance_ratio(&d, &d, &MaskPlan::new(vec![true, true, false])).unwrap(),
            1.0
        );
    }
}
