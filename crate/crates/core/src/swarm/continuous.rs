use rand::Rng;

use super::{check_len, SwarmConfig};
use crate::{Result, Scalar};

/// Classic real-valued PSO update:
/// `v' = inertia v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`, `x' = x + v'`,
/// with per-coordinate uniform `r1`, `r2` and the configured velocity clamp.
pub fn continuous_pso_step<F: Scalar, R: Rng + ?Sized>(
    position: &[F],
    velocity: &[F],
    personal_best: &[F],
    global_best: &[F],
    config: &SwarmConfig<F>,
    rng: &mut R,
) -> Result<(Vec<F>, Vec<F>)> {
    let n = position.len();
    check_len(n, velocity.len())?;
    check_len(n, personal_best.len())?;
    check_len(n, global_best.len())?;
    let mut new_x = Vec::with_capacity(n);
    let mut new_v = Vec::with_capacity(n);
    for i in 0..n {
        let r1 = F::lit(rng.gen::<f64>());
        let r2 = F::lit(rng.gen::<f64>());
        let mut v = config.inertia * velocity[i]
            + config.c1 * r1 * (personal_best[i] - position[i])
            + config.c2 * r2 * (global_best[i] - position[i]);
        if let Some(c) = config.velocity_clamp {
            v = v.max(-c).min(c);
        }
        new_v.push(v);
        new_x.push(position[i] + v);
    }
    Ok((new_x, new_v))
}
