use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Category, DikwDataset, MaskPlan, Modal};
use crate::{Error, Scalar};

/// Which modal(s) of a dataset are eligible for noising.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrivacyMode {
    #[serde(rename = "DDP")]
    Ddp,
    #[serde(rename = "IDP")]
    Idp,
    #[serde(rename = "KDP")]
    Kdp,
    #[serde(rename = "DIDP")]
    Didp,
    #[serde(rename = "IKDP")]
    Ikdp,
    #[serde(rename = "DIKDP")]
    Dikdp,
    #[serde(rename = "PDP")]
    Pdp,
}

use Category::*;

impl PrivacyMode {
    pub const ALL: [PrivacyMode; 7] = [
        PrivacyMode::Ddp,
        PrivacyMode::Idp,
        PrivacyMode::Kdp,
        PrivacyMode::Didp,
        PrivacyMode::Ikdp,
        PrivacyMode::Dikdp,
        PrivacyMode::Pdp,
    ];

    /// Category set routing items to this mode; `None` for PDP, which
    /// selects by purpose-edge incidence instead.
    pub fn categories(self) -> Option<&'static [Category]> {
        Some(match self {
            PrivacyMode::Ddp => &[Who, When, Where],
            PrivacyMode::Idp => &[What],
            PrivacyMode::Kdp => &[How],
            PrivacyMode::Didp => &[Who, When, Where, What],
            PrivacyMode::Ikdp => &[How, What],
            PrivacyMode::Dikdp => &[Who, What, When, Where, Why, How],
            PrivacyMode::Pdp => return None,
        })
    }

    /// Modals a mode covers when chaining decisions across layers.
    pub fn modals(self) -> &'static [Modal] {
        match self {
            PrivacyMode::Ddp => &[Modal::Data],
            PrivacyMode::Idp => &[Modal::Information],
            PrivacyMode::Kdp => &[Modal::Knowledge],
            PrivacyMode::Didp => &[Modal::Data, Modal::Information],
            PrivacyMode::Ikdp => &[Modal::Information, Modal::Knowledge],
            PrivacyMode::Dikdp => &[Modal::Data, Modal::Information, Modal::Knowledge],
            PrivacyMode::Pdp => &[Modal::Purpose],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PrivacyMode::Ddp => "DDP",
            PrivacyMode::Idp => "IDP",
            PrivacyMode::Kdp => "KDP",
            PrivacyMode::Didp => "DIDP",
            PrivacyMode::Ikdp => "IKDP",
            PrivacyMode::Dikdp => "DIKDP",
            PrivacyMode::Pdp => "PDP",
        }
    }
}

impl fmt::Display for PrivacyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrivacyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PrivacyMode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown privacy mode \"{s}\"")))
    }
}

/// Items eligible for noising under `mode`. The class label is never selected.
pub fn mode_mask<F: Scalar>(dataset: &DikwDataset<F>, mode: PrivacyMode) -> MaskPlan {
    let mut selected: Vec<bool> = match mode.categories() {
        Some(cats) => dataset
            .items()
            .iter()
            .map(|i| cats.contains(&i.category))
            .collect(),
        None => {
            let incident: HashSet<&str> = dataset
                .purpose_edges()
                .iter()
                .flat_map(|e| [e.from.as_str(), e.to.as_str()])
                .collect();
            dataset
                .items()
                .iter()
                .map(|i| incident.contains(i.id.as_str()))
                .collect()
        }
    };
    if let Some(j) = dataset.class_index() {
        selected[j] = false;
    }
    MaskPlan::new(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Column, DikwItem, PurposeEdge};

    fn one_per_category() -> DikwDataset<f64> {
        let items: Vec<DikwItem<f64>> = Category::ALL
            .iter()
            .enumerate()
            .map(|(k, &c)| DikwItem::numeric(&format!("c{k}"), Modal::Data, c))
            .collect();
        let columns = vec![Column::Numeric(vec![0.0]); items.len()];
        DikwDataset::new(items, columns, vec![], None).unwrap()
    }

    // Expected table written out independently of `categories()`.
    fn expected(mode: PrivacyMode, cat: Category) -> bool {
        let table: &[(PrivacyMode, &str)] = &[
            (PrivacyMode::Ddp, "who when where"),
            (PrivacyMode::Idp, "what"),
            (PrivacyMode::Kdp, "how"),
            (PrivacyMode::Didp, "who when where what"),
            (PrivacyMode::Ikdp, "how what"),
            (PrivacyMode::Dikdp, "who what when where why how"),
            (PrivacyMode::Pdp, ""),
        ];
        let (_, cats) = table.iter().find(|(m, _)| *m == mode).unwrap();
        cats.split_whitespace().any(|c| c == cat.to_string())
    }

    #[test]
    fn exhaustive_mode_category_table() {
        let ds = one_per_category();
        let mut cases = 0;
        for mode in PrivacyMode::ALL {
            let mask = mode_mask(&ds, mode);
            for (k, &cat) in Category::ALL.iter().enumerate() {
                assert_eq!(mask.is_selected(k), expected(mode, cat), "{mode} {cat}");
                cases += 1;
            }
        }
        assert_eq!(cases, 49);
    }

    #[test]
    fn named_examples() {
        let ds = one_per_category();
        let who = Category::ALL.iter().position(|&c| c == Who).unwrap();
        let what = Category::ALL.iter().position(|&c| c == What).unwrap();
        let how = Category::ALL.iter().position(|&c| c == How).unwrap();
        assert!(mode_mask(&ds, PrivacyMode::Ddp).is_selected(who));
        assert!(!mode_mask(&ds, PrivacyMode::Ddp).is_selected(what));
        assert!(mode_mask(&ds, PrivacyMode::Ikdp).is_selected(how));
        assert_eq!(mode_mask(&ds, PrivacyMode::Pdp).count(), 0);
    }

    #[test]
    fn set_identities() {
        let ds = one_per_category();
        let m = |mode| mode_mask(&ds, mode);
        assert_eq!(
            m(PrivacyMode::Didp),
            m(PrivacyMode::Ddp).union(&m(PrivacyMode::Idp))
        );
        assert_eq!(
            m(PrivacyMode::Ikdp),
            m(PrivacyMode::Idp).union(&m(PrivacyMode::Kdp))
        );
        for mode in &PrivacyMode::ALL[..6] {
            assert!(m(*mode).is_subset_of(&m(PrivacyMode::Dikdp)));
        }
    }

    #[test]
    fn pdp_selects_edge_endpoints_but_not_label() {
        let items = vec![
            DikwItem::numeric("a", Modal::Data, Who),
            DikwItem::numeric("b", Modal::Information, What),
            DikwItem::numeric("c", Modal::Knowledge, How),
            DikwItem::categorical("y", Modal::Information, What, &["u", "v"]),
        ];
        let columns = vec![
            Column::Numeric(vec![1.0]),
            Column::Numeric(vec![1.0]),
            Column::Numeric(vec![1.0]),
            Column::Categorical(vec![0]),
        ];
        let edges = vec![
            PurposeEdge::new("b", "a", "from"),
            PurposeEdge::new("c", "y", "x"),
        ];
        let ds = DikwDataset::new(items, columns, edges, Some("y")).unwrap();
        assert_eq!(
            mode_mask(&ds, PrivacyMode::Pdp).as_slice(),
            &[true, true, true, false]
        );
        assert!(!mode_mask(&ds, PrivacyMode::Idp).is_selected(3));
    }

    #[test]
    fn parse_modes() {
        assert_eq!("dikdp".parse::<PrivacyMode>().unwrap(), PrivacyMode::Dikdp);
        assert!("XDP".parse::<PrivacyMode>().is_err());
    }
}
