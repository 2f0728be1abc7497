//! Small descriptive statistics helpers.

use crate::Scalar;

pub fn mean<F: Scalar>(xs: &[F]) -> Option<F> {
    if xs.is_empty() {
        return None;
    }
    let sum = xs.iter().fold(F::zero(), |a, &x| a + x);
    Some(sum / F::from_count(xs.len()))
}

/// Population variance (divides by n).
pub fn variance<F: Scalar>(xs: &[F]) -> Option<F> {
    let m = mean(xs)?;
    let ss = xs.iter().fold(F::zero(), |a, &x| a + (x - m) * (x - m));
    Some(ss / F::from_count(xs.len()))
}

/// Unbiased sample variance (divides by n - 1).
pub fn sample_variance<F: Scalar>(xs: &[F]) -> Option<F> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let ss = xs.iter().fold(F::zero(), |a, &x| a + (x - m) * (x - m));
    Some(ss / F::from_count(xs.len() - 1))
}

/// Pearson correlation; `None` when lengths differ, n < 2, or either side is constant.
pub fn pearson<F: Scalar>(xs: &[F], ys: &[F]) -> Option<F> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = mean(xs)?;
    let my = mean(ys)?;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Some(r.max(-F::one()).min(F::one()))
}

pub fn min_max<F: Scalar>(xs: &[F]) -> Option<(F, F)> {
    let first = *xs.first()?;
    Some(
        xs.iter()
            .fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let xs = [1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), Some(2.5));
        assert_eq!(variance(&xs), Some(1.25));
        assert!((sample_variance(&xs).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(mean::<f64>(&[]), None);
    }

    #[test]
    fn correlation_of_linear_map_is_one() {
        let xs = [0.3f64, 1.7, 2.2, 5.0, 4.1];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| 3.0 - x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&xs, &[1.0; 5]), None);
    }
}
