use rand::distributions::Open01;
use rand::Rng;

use crate::{Error, Result, Scalar};

/// One draw from Laplace(0, `scale`) by inverse-CDF sampling.
pub fn sample_laplace<F: Scalar, R: Rng + ?Sized>(scale: F, rng: &mut R) -> F {
    let u: f64 = rng.sample(Open01);
    let l = if u < 0.5 {
        (2.0 * u).ln()
    } else {
        -(2.0 * (1.0 - u)).ln()
    };
    scale * F::lit(l)
}

/// `value` plus Laplace noise of scale `sensitivity / epsilon`.
pub fn laplace_noise<F: Scalar, R: Rng + ?Sized>(
    value: F,
    sensitivity: F,
    epsilon: F,
    rng: &mut R,
) -> Result<F> {
    if !value.is_finite() || !sensitivity.is_finite() || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(
            "laplace inputs must be finite".into(),
        ));
    }
    if sensitivity <= F::zero() || epsilon <= F::zero() {
        return Err(Error::InvalidParameter(format!(
            "sensitivity and epsilon must be positive (got {sensitivity}, {epsilon})"
        )));
    }
    Ok(value + sample_laplace(sensitivity / epsilon, rng))
}
