use crate::dikw::{mode_mask, DikwDataset, PrivacyMode};
use crate::Scalar;

const PREFERENCE: [PrivacyMode; 6] = [
    PrivacyMode::Idp,
    PrivacyMode::Kdp,
    PrivacyMode::Ddp,
    PrivacyMode::Didp,
    PrivacyMode::Ikdp,
    PrivacyMode::Dikdp,
];

/// Modes in order of increasing cost, keeping only those that select
/// something on `dataset`. PDP comes last whenever purpose edges exist.
pub fn mode_order_suggestion<F: Scalar>(dataset: &DikwDataset<F>) -> Vec<PrivacyMode> {
    let mut out: Vec<PrivacyMode> = PREFERENCE
        .into_iter()
        .filter(|&m| mode_mask(dataset, m).count() > 0)
        .collect();
    if !dataset.purpose_edges().is_empty() {
        out.push(PrivacyMode::Pdp);
    }
    out
}
