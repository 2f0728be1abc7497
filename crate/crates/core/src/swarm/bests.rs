use super::{Particle, Sign, SpatioTemporalWeights, SwarmConfig};
use crate::dikw::DikwDataset;
use crate::{Error, Result, Scalar};

fn ring<F>(index: usize, swarm: &[Particle<F>], radius: usize) -> Vec<usize> {
    let n = swarm.len();
    if 2 * radius + 1 >= n {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..=2 * radius)
        .map(|k| (index + n + k - radius) % n)
        .collect();
    idx.sort_unstable();
    idx
}

/// First index (ascending) attaining the maximum score.
fn argmax<F: Scalar>(indices: &[usize], score: impl Fn(usize) -> F) -> usize {
    let mut best = indices[0];
    let mut best_score = score(best);
    for &i in &indices[1..] {
        let s = score(i);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Ring-neighbourhood best and swarm-wide best personal positions for
/// particle `index`, ranked by raw fitness. Ties go to the lowest index.
pub fn plain_bests<F: Scalar>(
    index: usize,
    swarm: &[Particle<F>],
    radius: usize,
) -> (Vec<Sign>, Vec<Sign>) {
    let all: Vec<usize> = (0..swarm.len()).collect();
    let fit = |i: usize| swarm[i].best_fitness;
    let local = argmax(&ring(index, swarm, radius), fit);
    let global = argmax(&all, fit);
    (
        swarm[local].best_position.clone(),
        swarm[global].best_position.clone(),
    )
}

/// Normalized per-coordinate metadata for the items a swarm searches over.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatioTemporalContext<F> {
    /// Distance from the centroid of all located items, scaled to [0, 1].
    spatial: Vec<Option<F>>,
    /// (newest - timestamp) / (newest - oldest), in [0, 1].
    age: Vec<Option<F>>,
}

impl<F: Scalar> SpatioTemporalContext<F> {
    /// `support` lists the dataset item index behind each swarm coordinate.
    pub fn new(dataset: &DikwDataset<F>, support: &[usize]) -> Self {
        let items = dataset.items();
        let located: Vec<[F; 2]> = items.iter().filter_map(|i| i.spatial).collect();
        let spatial = if located.is_empty() {
            vec![None; support.len()]
        } else {
            let n = F::from_count(located.len());
            let cx = located.iter().fold(F::zero(), |a, p| a + p[0]) / n;
            let cy = located.iter().fold(F::zero(), |a, p| a + p[1]) / n;
            let dist = |p: [F; 2]| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt();
            let max = located.iter().map(|&p| dist(p)).fold(F::zero(), F::max);
            support
                .iter()
                .map(|&j| {
                    items[j].spatial.map(|p| {
                        if max > F::zero() {
                            dist(p) / max
                        } else {
                            F::zero()
                        }
                    })
                })
                .collect()
        };
        let stamps: Vec<i64> = items.iter().filter_map(|i| i.timestamp).collect();
        let age = match (stamps.iter().min(), stamps.iter().max()) {
            (Some(&oldest), Some(&newest)) => support
                .iter()
                .map(|&j| {
                    items[j].timestamp.map(|t| {
                        if newest > oldest {
                            F::from(newest - t).expect("i64 fits scalar")
                                / F::from(newest - oldest).expect("i64 fits scalar")
                        } else {
                            F::zero()
                        }
                    })
                })
                .collect(),
            _ => vec![None; support.len()],
        };
        Self { spatial, age }
    }

    pub fn dimension(&self) -> usize {
        self.spatial.len()
    }

    fn has_spatial(&self) -> bool {
        self.spatial.iter().any(Option::is_some)
    }

    fn has_age(&self) -> bool {
        self.age.iter().any(Option::is_some)
    }

    fn mean_over_selected(values: &[Option<F>], position: &[Sign]) -> F {
        let (sum, count) = values
            .iter()
            .zip(position)
            .filter(|(_, &s)| s == 1)
            .filter_map(|(v, _)| *v)
            .fold((F::zero(), 0usize), |(s, c), v| (s + v, c + 1));
        if count == 0 {
            F::zero()
        } else {
            sum / F::from_count(count)
        }
    }

    /// 1 / (1 + a_s * spatial distance + a_t * age) averaged over the selected items.
    pub fn weight(&self, position: &[Sign], w: &SpatioTemporalWeights<F>) -> F {
        let s = Self::mean_over_selected(&self.spatial, position);
        let t = Self::mean_over_selected(&self.age, position);
        F::one() / (F::one() + w.spatial * s + w.temporal * t)
    }
}

/// Like [`plain_bests`], but candidates are ranked by fitness times the
/// spatial-temporal weight of the items they select. Zero weights reduce
/// exactly to [`plain_bests`].
pub fn spatiotemporal_bests<F: Scalar>(
    index: usize,
    swarm: &[Particle<F>],
    context: &SpatioTemporalContext<F>,
    config: &SwarmConfig<F>,
) -> Result<(Vec<Sign>, Vec<Sign>)> {
    let Some(w) = config.st_weights else {
        return Err(Error::InvalidParameter(
            "spatial-temporal bests need st_weights in the swarm config".into(),
        ));
    };
    if w.spatial > F::zero() && !context.has_spatial() {
        return Err(Error::MissingMetadata("spatial"));
    }
    if w.temporal > F::zero() && !context.has_age() {
        return Err(Error::MissingMetadata("temporal"));
    }
    let score = |i: usize| {
        let p = &swarm[i];
        p.best_fitness * context.weight(&p.best_position, &w)
    };
    let all: Vec<usize> = (0..swarm.len()).collect();
    let local = argmax(&ring(index, swarm, config.neighborhood_radius), score);
    let global = argmax(&all, score);
    Ok((
        swarm[local].best_position.clone(),
        swarm[global].best_position.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, Column, DikwItem, Modal};
    use crate::seed::stream;
    use rand::Rng;

    fn particle(best: Vec<Sign>, fitness: f64) -> Particle<f64> {
        Particle::at(best, fitness)
    }

    #[test]
    fn ring_neighbourhoods() {
        let swarm: Vec<Particle<f64>> = (0..6).map(|k| particle(vec![1], k as f64)).collect();
        assert_eq!(ring(0, &swarm, 1), vec![0, 1, 5]);
        assert_eq!(ring(3, &swarm, 2), vec![1, 2, 3, 4, 5]);
        assert_eq!(ring(3, &swarm, 3), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn plain_local_and_global() {
        let swarm = vec![
            particle(vec![1, 1], 0.1),
            particle(vec![1, -1], 0.5),
            particle(vec![-1, 1], 0.2),
            particle(vec![-1, -1], 0.9),
            particle(vec![1, 1], 0.3),
        ];
        let (l, g) = plain_bests(1, &swarm, 1);
        assert_eq!(l, vec![1, -1]);
        assert_eq!(g, vec![-1, -1]);
        let (l, _) = plain_bests(0, &swarm, 1);
        assert_eq!(l, vec![1, -1]);
    }

    fn st_dataset() -> DikwDataset<f64> {
        let mut old = DikwItem::numeric("old", Modal::Data, Category::When);
        old.timestamp = Some(1_000);
        let mut fresh = DikwItem::numeric("fresh", Modal::Data, Category::When);
        fresh.timestamp = Some(9_000);
        let mut near = DikwItem::numeric("near", Modal::Data, Category::Where);
        near.spatial = Some([0.0, 0.0]);
        let mut far = DikwItem::numeric("far", Modal::Data, Category::Where);
        far.spatial = Some([10.0, 0.0]);
        DikwDataset::new(
            vec![old, fresh, near, far],
            vec![Column::Numeric(vec![0.0]); 4],
            vec![],
            None,
        )
        .unwrap()
    }

    fn cfg(spatial: f64, temporal: f64) -> SwarmConfig<f64> {
        SwarmConfig {
            st_weights: Some(SpatioTemporalWeights { spatial, temporal }),
            ..SwarmConfig::default()
        }
    }

    #[test]
    fn fresher_candidate_wins_ties() {
        let ds = st_dataset();
        let ctx = SpatioTemporalContext::new(&ds, &[0, 1, 2, 3]);
        let swarm = vec![
            particle(vec![1, -1, -1, -1], 0.8),
            particle(vec![-1, 1, -1, -1], 0.8),
        ];
        let (l, g) = spatiotemporal_bests(0, &swarm, &ctx, &cfg(0.0, 1.0)).unwrap();
        assert_eq!(l, vec![-1, 1, -1, -1]);
        assert_eq!(g, vec![-1, 1, -1, -1]);
        // Without weighting the lower index wins the tie.
        let (_, g) = plain_bests(0, &swarm, 1);
        assert_eq!(g, vec![1, -1, -1, -1]);
    }

    #[test]
    fn single_particle_is_its_own_best() {
        let ds = st_dataset();
        let ctx = SpatioTemporalContext::new(&ds, &[0, 1, 2, 3]);
        let swarm = vec![particle(vec![1, 1, -1, 1], 0.3)];
        let (l, g) = spatiotemporal_bests(0, &swarm, &ctx, &cfg(1.0, 1.0)).unwrap();
        assert_eq!(l, swarm[0].best_position);
        assert_eq!(g, swarm[0].best_position);
    }

    #[test]
    fn missing_metadata_is_reported() {
        let ds = DikwDataset::new(
            vec![DikwItem::numeric("a", Modal::Data, Category::Who)],
            vec![Column::Numeric(vec![0.0])],
            vec![],
            None,
        )
        .unwrap();
        let ctx = SpatioTemporalContext::new(&ds, &[0]);
        let swarm = vec![particle(vec![1], 0.3), particle(vec![-1], 0.1)];
        assert!(matches!(
            spatiotemporal_bests(0, &swarm, &ctx, &cfg(1.0, 0.0)),
            Err(Error::MissingMetadata("spatial"))
        ));
        assert!(matches!(
            spatiotemporal_bests(0, &swarm, &ctx, &cfg(0.0, 1.0)),
            Err(Error::MissingMetadata("temporal"))
        ));
        assert!(spatiotemporal_bests(0, &swarm, &ctx, &cfg(0.0, 0.0)).is_ok());
    }

    #[test]
    fn zero_weights_match_plain_bests() {
        let ds = st_dataset();
        let ctx = SpatioTemporalContext::new(&ds, &[0, 1, 2, 3]);
        let mut rng = stream(17);
        for _ in 0..100 {
            let n = rng.gen_range(1..9);
            let swarm: Vec<Particle<f64>> = (0..n)
                .map(|_| {
                    let pos = (0..4).map(|_| if rng.gen() { 1 } else { -1 }).collect();
                    // Coarse fitness values make ties common.
                    particle(pos, f64::from(rng.gen_range(0..4u8)) / 4.0)
                })
                .collect();
            let c = SwarmConfig {
                neighborhood_radius: rng.gen_range(0..3),
                ..cfg(0.0, 0.0)
            };
            for i in 0..n {
                assert_eq!(
                    spatiotemporal_bests(i, &swarm, &ctx, &c).unwrap(),
                    plain_bests(i, &swarm, c.neighborhood_radius)
                );
            }
        }
    }
}
