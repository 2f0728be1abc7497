use rand::Rng;

use super::{check_len, check_signs, Particle, Sign, SwarmConfig};
use crate::{Result, Scalar};

/// One synchronous update of a sign-valued particle.
///
/// Per coordinate, with `x` the previous position:
///
/// ```text
/// v''  = inertia * v''_prev + c1 r1 (local - x) + c2 r2 (global - x)
/// v'   = sign(v'')            (v'' = 0 keeps the current state: v' = x)
/// v    = v' * x               (sign velocity: +1 keep, -1 toggle)
/// x'   = x * v
/// ```
///
/// `r1`, `r2` are fresh uniform draws per coordinate. The personal best
/// is left untouched; callers record the new fitness with [`Particle::observe`].
pub fn binary_pso_step<F: Scalar, R: Rng + ?Sized>(
    particle: &Particle<F>,
    local_best: &[Sign],
    global_best: &[Sign],
    config: &SwarmConfig<F>,
    rng: &mut R,
) -> Result<Particle<F>> {
    let n = particle.dimension();
    check_len(n, local_best.len())?;
    check_len(n, global_best.len())?;
    check_len(n, particle.real_velocity.len())?;
    check_len(n, particle.best_position.len())?;
    check_signs(&particle.position)?;
    check_signs(local_best)?;
    check_signs(global_best)?;

    let mut next = particle.clone();
    for i in 0..n {
        let x = particle.position[i];
        let r1 = F::lit(rng.gen::<f64>());
        let r2 = F::lit(rng.gen::<f64>());
        let pull_local = F::from(local_best[i] - x).expect("small int");
        let pull_global = F::from(global_best[i] - x).expect("small int");
        let mut v2 = config.inertia * particle.real_velocity[i]
            + config.c1 * r1 * pull_local
            + config.c2 * r2 * pull_global;
        if let Some(c) = config.velocity_clamp {
            v2 = v2.max(-c).min(c);
        }
        let v1: Sign = if v2 > F::zero() {
            1
        } else if v2 < F::zero() {
            -1
        } else {
            x
        };
        let sv = v1 * x;
        next.real_velocity[i] = v2;
        next.sign_velocity[i] = sv;
        next.position[i] = x * sv;
    }
    Ok(next)
}
