use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use super::{
    binary_pso_step, plain_bests, spatiotemporal_bests, Particle, Sign, SpatioTemporalContext,
    SwarmConfig,
};
use crate::dikw::{mode_mask, DikwDataset, MaskPlan, PrivacyMode};
use crate::seed::stream;
use crate::{Error, Result, Scalar};

/// Objective maximized over masks.
///
/// `masked_variance` feeds the convergence rule; objectives that cannot
/// measure it return `None` and the swarm then runs to `max_iterations`.
pub trait MaskObjective<F> {
    fn fitness(&mut self, mask: &MaskPlan) -> Result<F>;

    fn masked_variance(&mut self, _mask: &MaskPlan) -> Result<Option<F>> {
        Ok(None)
    }
}

impl<F, T> MaskObjective<F> for T
where
    T: FnMut(&MaskPlan) -> F,
{
    fn fitness(&mut self, mask: &MaskPlan) -> Result<F> {
        Ok(self(mask))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord<F> {
    pub iteration: usize,
    pub global_best_fitness: F,
    /// Share of the mode's support selected by the global best.
    pub retained_fraction: F,
    pub masked_data_variance: Option<F>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OptimizationTrace<F> {
    pub records: Vec<TraceRecord<F>>,
}

impl<F: Scalar> OptimizationTrace<F> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_monotone(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].global_best_fitness >= w[0].global_best_fitness)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationOutcome<F> {
    pub best_mask: MaskPlan,
    pub best_fitness: F,
    pub trace: OptimizationTrace<F>,
    /// Distinct masks whose fitness was computed.
    pub evaluations: usize,
    /// Iteration at which the variance blow-up rule stopped the run.
    pub converged_at: Option<usize>,
}

/// True when the retained share just shrank and the masked variance jumped
/// by more than `variance_blowup_factor`.
pub fn converged<F: Scalar>(trace: &OptimizationTrace<F>, config: &SwarmConfig<F>) -> bool {
    let [.., prev, last] = trace.records.as_slice() else {
        return false;
    };
    let shrank = last.retained_fraction < prev.retained_fraction;
    match (prev.masked_data_variance, last.masked_data_variance) {
        (Some(v0), Some(v1)) => shrank && v1 > config.variance_blowup_factor * v0,
        _ => false,
    }
}

struct Evaluator<'a, F, O> {
    objective: &'a mut O,
    support: &'a [usize],
    items: usize,
    fitness: HashMap<Vec<Sign>, F>,
    variance: HashMap<Vec<Sign>, Option<F>>,
}

impl<F: Scalar, O: MaskObjective<F>> Evaluator<'_, F, O> {
    fn mask(&self, position: &[Sign]) -> MaskPlan {
        let mut selected = vec![false; self.items];
        for (&j, &s) in self.support.iter().zip(position) {
            selected[j] = s == 1;
        }
        MaskPlan::new(selected)
    }

    fn fitness(&mut self, position: &[Sign]) -> Result<F> {
        if let Some(&f) = self.fitness.get(position) {
            return Ok(f);
        }
        let f = self.objective.fitness(&self.mask(position))?;
        self.fitness.insert(position.to_vec(), f);
        Ok(f)
    }

    fn variance(&mut self, position: &[Sign]) -> Result<Option<F>> {
        if let Some(&v) = self.variance.get(position) {
            return Ok(v);
        }
        let v = self.objective.masked_variance(&self.mask(position))?;
        self.variance.insert(position.to_vec(), v);
        Ok(v)
    }
}

fn retained<F: Scalar>(position: &[Sign]) -> F {
    let on = position.iter().filter(|&&s| s == 1).count();
    F::from_count(on) / F::from_count(position.len())
}

/// Searches the masks inside `mode`'s support with the binary swarm.
///
/// Items outside the support stay unselected throughout. Fitness values
/// are cached per mask, so the objective must be deterministic in the mask.
/// Particles are evaluated in index order and the global best only moves on
/// strict improvement, which makes the trace non-decreasing and the whole
/// run a function of (dataset, mode, objective, config).
pub fn optimize_mask<F: Scalar, O: MaskObjective<F>>(
    dataset: &DikwDataset<F>,
    mode: PrivacyMode,
    objective: &mut O,
    config: &SwarmConfig<F>,
) -> Result<OptimizationOutcome<F>> {
    config.validate()?;
    let support: Vec<usize> = mode_mask(dataset, mode).indices().collect();
    if support.is_empty() {
        return Err(Error::EmptySupport(mode.to_string()));
    }
    let st_context = config
        .st_weights
        .map(|_| SpatioTemporalContext::new(dataset, &support));
    let mut eval = Evaluator {
        objective,
        support: &support,
        items: dataset.item_count(),
        fitness: HashMap::new(),
        variance: HashMap::new(),
    };
    let mut rng = stream(config.seed);
    let dim = support.len();

    let mut swarm = Vec::with_capacity(config.particle_count);
    for _ in 0..config.particle_count {
        let position: Vec<Sign> = (0..dim).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let f = eval.fitness(&position)?;
        swarm.push(Particle::at(position, f));
    }
    let mut best = best_of(&swarm);
    let mut trace = OptimizationTrace::default();
    let record = |it: usize, best: &(Vec<Sign>, F), eval: &mut Evaluator<'_, F, O>| {
        Ok::<_, Error>(TraceRecord {
            iteration: it,
            global_best_fitness: best.1,
            retained_fraction: retained(&best.0),
            masked_data_variance: eval.variance(&best.0)?,
        })
    };
    trace.records.push(record(0, &best, &mut eval)?);

    let mut converged_at = None;
    for it in 1..=config.max_iterations {
        let guides = (0..swarm.len())
            .map(|i| match &st_context {
                Some(ctx) => spatiotemporal_bests(i, &swarm, ctx, config),
                None => Ok(plain_bests(i, &swarm, config.neighborhood_radius)),
            })
            .collect::<Result<Vec<_>>>()?;
        for (p, (local, global)) in swarm.iter_mut().zip(&guides) {
            let mut next = binary_pso_step(p, local, global, config, &mut rng)?;
            next.mutate(config.mutation_rate, &mut rng);
            let f = eval.fitness(&next.position)?;
            next.observe(f);
            *p = next;
        }
        let candidate = best_of(&swarm);
        if candidate.1 > best.1 {
            best = candidate;
        }
        trace.records.push(record(it, &best, &mut eval)?);
        if converged(&trace, config) {
            converged_at = Some(it);
            break;
        }
    }

    Ok(OptimizationOutcome {
        best_mask: eval.mask(&best.0),
        best_fitness: best.1,
        evaluations: eval.fitness.len(),
        trace,
        converged_at,
    })
}

fn best_of<F: Scalar>(swarm: &[Particle<F>]) -> (Vec<Sign>, F) {
    let mut best = &swarm[0];
    for p in &swarm[1..] {
        if p.best_fitness > best.best_fitness {
            best = p;
        }
    }
    (best.best_position.clone(), best.best_fitness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dikw::{Category, Column, DikwItem, Modal};

    fn dataset(support: usize, frozen: usize) -> DikwDataset<f64> {
        let items: Vec<DikwItem<f64>> =
            (0..support)
                .map(|k| DikwItem::numeric(&format!("s{k}"), Modal::Data, Category::Who))
                .chain((0..frozen).map(|k| {
                    DikwItem::numeric(&format!("f{k}"), Modal::Information, Category::What)
                }))
                .collect();
        let n = items.len();
        DikwDataset::new(items, vec![Column::Numeric(vec![0.0]); n], vec![], None).unwrap()
    }

    fn record(it: usize, retained: f64, var: Option<f64>) -> TraceRecord<f64> {
        TraceRecord {
            iteration: it,
            global_best_fitness: 0.0,
            retained_fraction: retained,
            masked_data_variance: var,
        }
    }

    #[test]
    fn convergence_rule() {
        let c = SwarmConfig::<f64>::default();
        let t = |a, b| OptimizationTrace {
            records: vec![a, b],
        };
        assert!(!converged(
            &t(record(0, 0.8, Some(1.0)), record(1, 0.6, Some(1.0))),
            &c
        ));
        assert!(converged(
            &t(record(0, 0.8, Some(1.0)), record(1, 0.6, Some(2.0))),
            &c
        ));
        assert!(!converged(
            &t(record(0, 0.6, Some(1.0)), record(1, 0.8, Some(5.0))),
            &c
        ));
        assert!(!converged(
            &t(record(0, 0.8, None), record(1, 0.6, Some(5.0))),
            &c
        ));
        assert!(!converged(
            &OptimizationTrace {
                records: vec![record(0, 1.0, Some(1.0))]
            },
            &c
        ));
    }

    #[test]
    fn single_coordinate_is_found_quickly() {
        let ds = dataset(1, 2);
        let mut f = |m: &MaskPlan| m.count() as f64;
        let c = SwarmConfig {
            max_iterations: 5,
            ..SwarmConfig::default()
        };
        let out = optimize_mask(&ds, PrivacyMode::Ddp, &mut f, &c).unwrap();
        assert_eq!(out.best_mask.as_slice(), &[true, false, false]);
    }

    #[test]
    fn count_fitness_selects_everything() {
        let ds = dataset(8, 0);
        let mut f = |m: &MaskPlan| m.count() as f64;
        let out = optimize_mask(&ds, PrivacyMode::Ddp, &mut f, &SwarmConfig::default()).unwrap();
        // Exhaustive oracle over all 256 masks.
        let optimum = (0u32..256)
            .map(|b| b.count_ones() as f64)
            .fold(0.0, f64::max);
        assert_eq!(out.best_fitness, optimum);
        assert_eq!(out.best_mask.count(), 8);
        assert!(out.trace.is_monotone());
    }

    #[test]
    fn frozen_coordinates_never_selected() {
        let ds = dataset(4, 3);
        // Reward everything, including items outside the DDP support.
        let mut f = |m: &MaskPlan| m.count() as f64;
        for seed in 0..10 {
            let c = SwarmConfig {
                seed,
                ..SwarmConfig::default()
            };
            let out = optimize_mask(&ds, PrivacyMode::Ddp, &mut f, &c).unwrap();
            assert!(out.best_mask.as_slice()[4..].iter().all(|&s| !s));
        }
    }

    #[test]
    fn empty_support_is_reported() {
        let ds = dataset(3, 0);
        let mut f = |_: &MaskPlan| 0.0;
        assert!(matches!(
            optimize_mask(&ds, PrivacyMode::Kdp, &mut f, &SwarmConfig::default()),
            Err(Error::EmptySupport(m)) if m == "KDP"
        ));
    }

    #[test]
    fn seed_determinism() {
        let ds = dataset(6, 1);
        let weights = [0.3, -0.2, 0.9, 0.1, -0.5, 0.4];
        let run = |seed| {
            let mut f = |m: &MaskPlan| m.indices().map(|i| weights[i]).sum::<f64>() + 3.0;
            let c = SwarmConfig {
                seed,
                ..SwarmConfig::default()
            };
            optimize_mask(&ds, PrivacyMode::Ddp, &mut f, &c).unwrap()
        };
        assert_eq!(run(3), run(3));
    }

    struct Shrinking;

    impl MaskObjective<f64> for Shrinking {
        fn fitness(&mut self, m: &MaskPlan) -> Result<f64> {
            Ok(10.0 - m.count() as f64)
        }

        fn masked_variance(&mut self, m: &MaskPlan) -> Result<Option<f64>> {
            Ok(Some(100.0 / (1.0 + m.count() as f64).powi(3)))
        }
    }

    #[test]
    fn variance_blowup_stops_early() {
        let ds = dataset(8, 0);
        let c = SwarmConfig {
            max_iterations: 200,
            ..SwarmConfig::default()
        };
        let out = optimize_mask(&ds, PrivacyMode::Ddp, &mut Shrinking, &c).unwrap();
        let at = out.converged_at.expect("variance rule fires");
        assert_eq!(out.trace.len(), at + 1);
        assert!(converged(&out.trace, &c));
    }
}
