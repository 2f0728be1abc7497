use rand::Rng;

use crate::{Error, Result, Scalar};

/// Probability of reporting the true label: e^eps / (e^eps + k - 1).
pub fn keep_probability<F: Scalar>(epsilon: F, label_count: usize) -> F {
    let others = F::from_count(label_count.saturating_sub(1));
    F::one() / (F::one() + others * (-epsilon).exp())
}

/// k-ary randomized response over label indices `0..label_count`.
///
/// `epsilon = 0` is accepted and yields a uniform response.
pub fn randomized_response<F: Scalar, R: Rng + ?Sized>(
    label: usize,
    label_count: usize,
    epsilon: F,
    rng: &mut R,
) -> Result<usize> {
    if label_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "randomized response needs at least 2 labels, got {label_count}"
        )));
    }
    if label >= label_count {
        return Err(Error::UnknownLabel {
            label,
            size: label_count,
        });
    }
    if epsilon < F::zero() || epsilon.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let u: f64 = rng.gen();
    if u < keep_probability(epsilon, label_count).as_f64() {
        return Ok(label);
    }
    let other = rng.gen_range(0..label_count - 1);
    Ok(if other >= label { other + 1 } else { other })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;

    fn keep_rate(k: usize, eps: f64, n: usize) -> f64 {
        let mut rng = stream(99);
        let kept = (0..n)
            .filter(|_| randomized_response(1, k, eps, &mut rng).unwrap() == 1)
            .count();
        kept as f64 / n as f64
    }

    #[test]
    fn closed_form_keep_probability() {
        assert!((keep_probability(3f64.ln(), 2) - 0.75).abs() < 1e-12);
        assert_eq!(keep_probability(0.0f64, 2), 0.5);
        assert_eq!(keep_probability(1e6f64, 5), 1.0);
    }

    #[test]
    fn frequency_oracle() {
        assert!((keep_rate(2, 3f64.ln(), 100_000) - 0.75).abs() < 0.01);
        assert!((keep_rate(2, 0.0, 100_000) - 0.5).abs() < 0.01);
        assert_eq!(keep_rate(3, 1e3, 10_000), 1.0);
    }

    #[test]
    fn other_labels_are_uniform() {
        let mut rng = stream(5);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[randomized_response(0, 4, 0.0f64, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.015, "{counts:?}");
        }
    }

    #[test]
    fn errors() {
        let mut rng = stream(0);
        assert!(randomized_response(0, 1, 1.0f64, &mut rng).is_err());
        assert!(matches!(
            randomized_response(3, 3, 1.0f64, &mut rng),
            Err(Error::UnknownLabel { label: 3, size: 3 })
        ));
        assert!(randomized_response(0, 2, -1.0f64, &mut rng).is_err());
    }
}
