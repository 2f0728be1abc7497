use serde::Serialize;

use crate::dikw::{Column, DikwDataset, MaskPlan, Modal, PrivacyMode};
use crate::{stats, Error, Result, Scalar};

/// Mode chosen by [`decide_mode`] together with the associations that drove it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeDecision<F> {
    pub mode: PrivacyMode,
    pub data_to_information: Option<F>,
    pub information_to_knowledge: Option<F>,
}

/// Column as reals; categorical labels become their frequency rank (0 = most common).
fn encoded<F: Scalar>(col: &Column<F>) -> Vec<F> {
    match col {
        Column::Numeric(v) => v.clone(),
        Column::Categorical(v) => {
            let k = v.iter().max().map_or(0, |m| m + 1);
            let mut freq = vec![0usize; k];
            v.iter().for_each(|&l| freq[l] += 1);
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
            let mut rank = vec![0usize; k];
            for (r, &l) in order.iter().enumerate() {
                rank[l] = r;
            }
            v.iter().map(|&l| F::from_count(rank[l])).collect()
        }
    }
}

/// Mean absolute Pearson correlation over all pairs (a, b). Pairs with an
/// undefined correlation (constant column) count as 0; empty sides give 0.
pub fn association<F: Scalar>(dataset: &DikwDataset<F>, a: &[usize], b: &[usize]) -> F {
    if a.is_empty() || b.is_empty() {
        return F::zero();
    }
    let cols: Vec<Vec<F>> = dataset.columns().iter().map(encoded).collect();
    let mut sum = F::zero();
    for &i in a {
        for &j in b {
            sum = sum + stats::pearson(&cols[i], &cols[j]).map_or(F::zero(), F::abs);
        }
    }
    sum / F::from_count(a.len() * b.len())
}

const CHAIN_ORDER: [PrivacyMode; 6] = [
    PrivacyMode::Ddp,
    PrivacyMode::Idp,
    PrivacyMode::Kdp,
    PrivacyMode::Didp,
    PrivacyMode::Ikdp,
    PrivacyMode::Dikdp,
];

/// Picks a privacy mode from the items a swarm kept.
///
/// Modals with retained items are included. Retained Data items that
/// associate with the Information layer at or above `tau` pull Information
/// in; an included Information layer (its retained items, or all of them
/// when it was pulled in) that associates with Knowledge pulls Knowledge in.
/// The result is the smallest mode covering every included modal. Purpose
/// items and the class label take no part.
pub fn decide_mode<F: Scalar>(
    dataset: &DikwDataset<F>,
    retained: &MaskPlan,
    tau: F,
) -> Result<ModeDecision<F>> {
    dataset.check_mask(retained)?;
    if !(tau > F::zero() && tau < F::one()) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0, 1), got {tau}"
        )));
    }
    if dataset.record_count() < 3 {
        return Err(Error::Degenerate(format!(
            "association needs at least 3 records, got {}",
            dataset.record_count()
        )));
    }
    let label = dataset.class_index();
    let layer = |modal: Modal, only_retained: bool| -> Vec<usize> {
        dataset
            .items()
            .iter()
            .enumerate()
            .filter(|&(j, item)| {
                item.modal == modal
                    && Some(j) != label
                    && (!only_retained || retained.is_selected(j))
            })
            .map(|(j, _)| j)
            .collect()
    };
    let kept_data = layer(Modal::Data, true);
    let kept_info = layer(Modal::Information, true);
    let kept_knowledge = layer(Modal::Knowledge, true);
    if kept_data.is_empty() && kept_info.is_empty() && kept_knowledge.is_empty() {
        return Err(Error::InvalidParameter(
            "retained mask selects no Data, Information or Knowledge item".into(),
        ));
    }

    let data = !kept_data.is_empty();
    let mut info = !kept_info.is_empty();
    let mut knowledge = !kept_knowledge.is_empty();

    let mut d_to_i = None;
    if data {
        let a = association(dataset, &kept_data, &layer(Modal::Information, false));
        d_to_i = Some(a);
        info |= a >= tau;
    }
    let mut i_to_k = None;
    if info {
        let source = if kept_info.is_empty() {
            layer(Modal::Information, false)
        } else {
            kept_info
        };
        let a = association(dataset, &source, &layer(Modal::Knowledge, false));
        i_to_k = Some(a);
        knowledge |= a >= tau;
    }

    let needed: Vec<Modal> = [
        (data, Modal::Data),
        (info, Modal::Information),
        (knowledge, Modal::Knowledge),
    ]
    .into_iter()
    .filter_map(|(on, m)| on.then_some(m))
    .collect();
    let mode = CHAIN_ORDER
        .into_iter()
        .find(|m| needed.iter().all(|n| m.modals().contains(n)))
        .expect("DIKDP covers every layer");
    Ok(ModeDecision {
        mode,
        data_to_information: d_to_i,
        information_to_knowledge: i_to_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, DikwItem};
    use crate::seed::stream;
    use rand::Rng;

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = stream(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn fixture(info: Vec<f64>, knowledge: Vec<f64>) -> DikwDataset<f64> {
        let n = info.len();
        DikwDataset::new(
            vec![
                DikwItem::numeric("d", Modal::Data, Category::Who),
                DikwItem::numeric("i", Modal::Information, Category::What),
                DikwItem::numeric("k", Modal::Knowledge, Category::How),
            ],
            vec![
                Column::Numeric(noise(1, n)),
                Column::Numeric(info),
                Column::Numeric(knowledge),
            ],
            vec![],
            None,
        )
        .unwrap()
    }

    #[test]
    fn independent_layers_stay_ddp() {
        let ds = fixture(noise(2, 500), noise(3, 500));
        let m = MaskPlan::new(vec![true, false, false]);
        let d = decide_mode(&ds, &m, 0.5).unwrap();
        assert_eq!(d.mode, PrivacyMode::Ddp);
        assert!(d.data_to_information.unwrap() < 0.5);
    }

    #[test]
    fn linear_information_chains_to_didp() {
        let data = noise(1, 200);
        let info: Vec<f64> = data.iter().map(|x| 2.0 * x).collect();
        let ds = fixture(info, noise(3, 200));
        let d = decide_mode(&ds, &MaskPlan::new(vec![true, false, false]), 0.5).unwrap();
        assert_eq!(d.mode, PrivacyMode::Didp);
        assert!((d.data_to_information.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_chain_is_dikdp() {
        let data = noise(1, 200);
        let info: Vec<f64> = data.iter().map(|x| 2.0 * x + 1.0).collect();
        let knowledge: Vec<f64> = info.iter().map(|x| -x).collect();
        let ds = fixture(info, knowledge);
        let d = decide_mode(&ds, &MaskPlan::new(vec![true, false, false]), 0.5).unwrap();
        assert_eq!(d.mode, PrivacyMode::Dikdp);
    }

    #[test]
    fn retained_layers_are_always_covered() {
        let ds = fixture(noise(2, 100), noise(3, 100));
        let d = decide_mode(&ds, &MaskPlan::new(vec![false, false, true]), 0.5).unwrap();
        assert_eq!(d.mode, PrivacyMode::Kdp);
        let d = decide_mode(&ds, &MaskPlan::new(vec![true, false, true]), 0.5).unwrap();
        assert_eq!(d.mode, PrivacyMode::Dikdp);
        let d = decide_mode(&ds, &MaskPlan::new(vec![false, true, true]), 0.5).unwrap();
        assert_eq!(d.mode, PrivacyMode::Ikdp);
    }

    #[test]
    fn errors() {
        let ds = fixture(vec![1.0, 2.0], vec![0.0, 1.0]);
        assert!(matches!(
            decide_mode(&ds, &MaskPlan::new(vec![true, false, false]), 0.5),
            Err(Error::Degenerate(_))
        ));
        let ds = fixture(noise(2, 10), noise(3, 10));
        assert!(decide_mode(&ds, &MaskPlan::none(3), 0.5).is_err());
        assert!(decide_mode(&ds, &MaskPlan::new(vec![true, false, false]), 1.5).is_err());
    }

    #[test]
    fn categorical_frequency_rank_encoding() {
        let col: Column<f64> = Column::Categorical(vec![2, 2, 0, 2, 1, 1]);
        assert_eq!(encoded(&col), vec![0.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
    }
}
