use dikw_privacy::mech::{verify_epsilon, LaplaceMechanism, Probe, RandomizedResponse, Verdict};
use dikw_privacy::seed::{derive, stream};
use serde::Serialize;

use crate::config::{MechanismKind, VerifyCase, VerifyConfig};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub mechanism: MechanismKind,
    pub epsilon: f64,
    pub claimed: f64,
    pub status: CaseStatus,
    pub empirical: Option<f64>,
    pub slack: Option<f64>,
    pub lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub draws: usize,
    pub bins: usize,
    pub cases: Vec<CaseReport>,
}

/// Runs every configured case with its own stream derived from `seed`.
pub fn run_verify(config: &VerifyConfig, seed: u64) -> Result<VerifyReport> {
    let cases = config
        .cases
        .iter()
        .enumerate()
        .map(|(i, case)| run_case(case, config, derive(seed, &[i as u64])))
        .collect::<Result<_>>()?;
    Ok(VerifyReport {
        draws: config.draws,
        bins: config.bins,
        cases,
    })
}

fn run_case(case: &VerifyCase, config: &VerifyConfig, seed: u64) -> Result<CaseReport> {
    let mut rng = stream(seed);
    let verdict = match case.mechanism {
        MechanismKind::Laplace => {
            let m = LaplaceMechanism {
                sensitivity: case.sensitivity.unwrap_or(1.0),
                epsilon: case.epsilon,
            };
            verify_epsilon(
                &m,
                Probe::Numeric(case.a),
                Probe::Numeric(case.b),
                config.draws,
                config.bins,
                &mut rng,
            )?
        }
        MechanismKind::RandomizedResponse => {
            let m = RandomizedResponse {
                label_count: case.label_count.unwrap_or(2),
                epsilon: case.epsilon,
            };
            let (a, b) = (Probe::Label(case.a as usize), Probe::Label(case.b as usize));
            verify_epsilon(&m, a, b, config.draws, config.bins, &mut rng)?
        }
    };
    let claimed = case.claimed_epsilon();
    let (status, est, note) = match verdict {
        Verdict::Estimate(e) => {
            let status = if e.passes(claimed) {
                CaseStatus::Pass
            } else {
                CaseStatus::Fail
            };
            (status, Some(e), None)
        }
        Verdict::Inconclusive(why) => (CaseStatus::Inconclusive, None, Some(why)),
    };
    Ok(CaseReport {
        name: case.name.clone(),
        mechanism: case.mechanism,
        epsilon: case.epsilon,
        claimed,
        status,
        empirical: est.as_ref().map(|e| e.empirical),
        slack: est.as_ref().map(|e| e.slack),
        lower_bound: est.as_ref().map(|e| e.lower_bound),
        note,
    })
}
