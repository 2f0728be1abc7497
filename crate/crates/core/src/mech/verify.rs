//! Empirical check of the epsilon-DP inequality on a pair of neighbouring inputs.

use rand::Rng;

use super::{laplace_noise, randomized_response};
use crate::{Error, Result, Scalar};

/// Input or output of a single-value mechanism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe<F> {
    Numeric(F),
    Label(usize),
}

/// A mechanism releasing one value at a time.
pub trait SingleValueMechanism<F: Scalar> {
    fn release<R: Rng + ?Sized>(&self, input: Probe<F>, rng: &mut R) -> Result<Probe<F>>;
}

#[derive(Clone, Copy, Debug)]
pub struct LaplaceMechanism<F> {
    pub sensitivity: F,
    pub epsilon: F,
}

impl<F: Scalar> SingleValueMechanism<F> for LaplaceMechanism<F> {
    fn release<R: Rng + ?Sized>(&self, input: Probe<F>, rng: &mut R) -> Result<Probe<F>> {
        match input {
            Probe::Numeric(x) => {
                laplace_noise(x, self.sensitivity, self.epsilon, rng).map(Probe::Numeric)
            }
            Probe::Label(_) => Err(Error::InvalidParameter(
                "laplace mechanism takes numeric input".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RandomizedResponse<F> {
    pub label_count: usize,
    pub epsilon: F,
}

impl<F: Scalar> SingleValueMechanism<F> for RandomizedResponse<F> {
    fn release<R: Rng + ?Sized>(&self, input: Probe<F>, rng: &mut R) -> Result<Probe<F>> {
        match input {
            Probe::Label(l) => {
                randomized_response(l, self.label_count, self.epsilon, rng).map(Probe::Label)
            }
            Probe::Numeric(_) => Err(Error::InvalidParameter(
                "randomized response takes a label".into(),
            )),
        }
    }
}

/// Outcome of [`verify_epsilon`].
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<F> {
    Estimate(EpsilonEstimate<F>),
    /// Histograms too degenerate to compare.
    Inconclusive(String),
}

impl<F: Scalar> Verdict<F> {
    pub fn estimate(&self) -> Option<&EpsilonEstimate<F>> {
        match self {
            Verdict::Estimate(e) => Some(e),
            Verdict::Inconclusive(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonEstimate<F> {
    /// max over shared bins of |ln(pA / pB)|.
    pub empirical: F,
    /// Statistical slack 3 sqrt(2 / (n p_min)) at the bin attaining `empirical`.
    pub slack: F,
    /// max over bins of |ln(pA / pB)| minus that bin's slack.
    pub lower_bound: F,
    pub bins_compared: usize,
}

impl<F: Scalar> EpsilonEstimate<F> {
    /// True unless some bin's log-ratio exceeds `claimed` by more than its slack.
    pub fn passes(&self, claimed: F) -> bool {
        self.lower_bound <= claimed
    }
}

fn slack<F: Scalar>(draws: usize, p_min: F) -> F {
    F::lit(3.0) * (F::lit(2.0) / (F::from_count(draws) * p_min)).sqrt()
}

/// Runs `mechanism` `draw_count` times on each of two neighbouring inputs and
/// compares the outcome histograms.
///
/// Labels are binned by value. Numeric outputs share `bin_count` equal-width
/// bins spanning the pooled 0.5%..99.5% quantiles; outliers land in the end bins.
pub fn verify_epsilon<F: Scalar, M: SingleValueMechanism<F>, R: Rng + ?Sized>(
    mechanism: &M,
    value_a: Probe<F>,
    value_b: Probe<F>,
    draw_count: usize,
    bin_count: usize,
    rng: &mut R,
) -> Result<Verdict<F>> {
    if draw_count < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "verification needs at least 10000 draws, got {draw_count}"
        )));
    }
    let a = (0..draw_count)
        .map(|_| mechanism.release(value_a, rng))
        .collect::<Result<Vec<_>>>()?;
    let b = (0..draw_count)
        .map(|_| mechanism.release(value_b, rng))
        .collect::<Result<Vec<_>>>()?;
    let (ha, hb) = histograms(&a, &b, bin_count)?;
    Ok(compare(&ha, &hb, draw_count))
}

fn histograms<F: Scalar>(
    a: &[Probe<F>],
    b: &[Probe<F>],
    bin_count: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let labels = |xs: &[Probe<F>]| -> Option<Vec<usize>> {
        xs.iter()
            .map(|p| match p {
                Probe::Label(l) => Some(*l),
                Probe::Numeric(_) => None,
            })
            .collect()
    };
    if let (Some(la), Some(lb)) = (labels(a), labels(b)) {
        let k = la.iter().chain(&lb).max().map_or(0, |m| m + 1);
        let count = |ls: &[usize]| {
            let mut h = vec![0; k];
            ls.iter().for_each(|&l| h[l] += 1);
            h
        };
        return Ok((count(&la), count(&lb)));
    }
    if bin_count < 2 {
        return Err(Error::InvalidParameter("need at least 2 bins".into()));
    }
    let nums = |xs: &[Probe<F>]| -> Result<Vec<F>> {
        xs.iter()
            .map(|p| match p {
                Probe::Numeric(x) => Ok(*x),
                Probe::Label(_) => Err(Error::InvalidParameter(
                    "mixed numeric and label outcomes".into(),
                )),
            })
            .collect()
    };
    let (na, nb) = (nums(a)?, nums(b)?);
    let mut pooled: Vec<F> = na.iter().chain(&nb).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).expect("finite outcomes"));
    let at = |q: f64| pooled[((pooled.len() - 1) as f64 * q).round() as usize];
    let (lo, hi) = (at(0.005), at(0.995));
    let width = (hi - lo) / F::from_count(bin_count);
    let bin = |x: F| -> usize {
        if width <= F::zero() {
            return 0;
        }
        ((x - lo) / width)
            .floor()
            .max(F::zero())
            .to_usize()
            .unwrap_or(bin_count - 1)
            .min(bin_count - 1)
    };
    let count = |xs: &[F]| {
        let mut h = vec![0; bin_count];
        xs.iter().for_each(|&x| h[bin(x)] += 1);
        h
    };
    Ok((count(&na), count(&nb)))
}

fn compare<F: Scalar>(ha: &[usize], hb: &[usize], n: usize) -> Verdict<F> {
    let single_bin = |h: &[usize]| h.iter().filter(|&&c| c > 0).count() == 1;
    if single_bin(ha) != single_bin(hb) {
        return Verdict::Inconclusive("all mass in one bin on one side only".into());
    }
    let nf = F::from_count(n);
    let mut best: Option<EpsilonEstimate<F>> = None;
    let mut lower = F::neg_infinity();
    let mut compared = 0;
    for (&ca, &cb) in ha.iter().zip(hb) {
        if ca == 0 || cb == 0 {
            continue;
        }
        compared += 1;
        let (pa, pb) = (F::from_count(ca) / nf, F::from_count(cb) / nf);
        let ratio = (pa / pb).ln().abs();
        let s = slack(n, pa.min(pb));
        lower = lower.max(ratio - s);
        if best.as_ref().is_none_or(|b| ratio > b.empirical) {
            best = Some(EpsilonEstimate {
                empirical: ratio,
                slack: s,
                lower_bound: F::zero(),
                bins_compared: 0,
            });
        }
    }
    match best {
        None => Verdict::Inconclusive("no bin populated on both sides".into()),
        Some(mut e) => {
            e.lower_bound = lower;
            e.bins_compared = compared;
            Verdict::Estimate(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;

    #[test]
    fn randomized_response_recovers_ln3() {
        let m = RandomizedResponse {
            label_count: 2,
            epsilon: 3f64.ln(),
        };
        let v = verify_epsilon(
            &m,
            Probe::Label(0),
            Probe::Label(1),
            100_000,
            0,
            &mut stream(11),
        )
        .unwrap();
        let e = v.estimate().unwrap();
        assert!((e.empirical - 3f64.ln()).abs() < 0.05, "{e:?}");
        assert!(e.passes(3f64.ln()));
        assert!(!e.passes(3f64.ln() / 2.0));
    }

    #[test]
    fn laplace_within_bound_and_misdeclared_fails() {
        let m = LaplaceMechanism {
            sensitivity: 1.0f64,
            epsilon: 1.0,
        };
        let v = verify_epsilon(
            &m,
            Probe::Numeric(0.0),
            Probe::Numeric(1.0),
            100_000,
            20,
            &mut stream(5),
        )
        .unwrap();
        let e = v.estimate().unwrap();
        assert!(e.passes(1.0), "{e:?}");
        assert!(!e.passes(0.5), "{e:?}");
    }

    #[test]
    fn identical_inputs_give_near_zero() {
        let m = LaplaceMechanism {
            sensitivity: 1.0f64,
            epsilon: 1.0,
        };
        let v = verify_epsilon(
            &m,
            Probe::Numeric(3.0),
            Probe::Numeric(3.0),
            20_000,
            20,
            &mut stream(8),
        )
        .unwrap();
        let e = v.estimate().unwrap();
        assert!(e.empirical <= e.slack, "{e:?}");
        assert!(e.passes(0.0));
    }

    #[test]
    fn degenerate_histograms_are_inconclusive() {
        let ha = [100usize, 0, 0];
        let hb = [50usize, 30, 20];
        assert!(matches!(
            compare::<f64>(&ha, &hb, 100),
            Verdict::Inconclusive(_)
        ));
        assert!(matches!(
            compare::<f64>(&[10, 0], &[0, 10], 10),
            Verdict::Inconclusive(_)
        ));
    }

    #[test]
    fn rejects_small_draw_counts_and_mixed_inputs() {
        let m = LaplaceMechanism {
            sensitivity: 1.0f64,
            epsilon: 1.0,
        };
        assert!(verify_epsilon(
            &m,
            Probe::Numeric(0.0),
            Probe::Numeric(1.0),
            100,
            10,
            &mut stream(0)
        )
        .is_err());
        assert!(verify_epsilon(
            &m,
            Probe::Label(0),
            Probe::Numeric(1.0),
            10_000,
            10,
            &mut stream(0)
        )
        .is_err());
    }
}
