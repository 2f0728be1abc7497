//! Epsilon x retained-fraction sweep on a DIKW dataset.

use dikw_privacy::dikw::mode_mask;
use dikw_privacy::mech::{apply_dp_seeded, mode_order_suggestion};
use dikw_privacy::seed::derive;
use dikw_privacy::swarm::{decide_mode, optimize_mask, ModeDecision, OptimizationOutcome};
use dikw_privacy::utility::{evaluate_utility, stratified_split, DpObjective};
use dikw_privacy::{stats, Dataset, DpParams, FitnessWeights, MaskPlan, PrivacyMode, SwarmConfig};
use serde::Serialize;

use crate::config::{ExperimentConfig, ModeChoice};
use crate::Result;

const SPLIT_KEY: u64 = u64::MAX;
const AUTO_KEY: u64 = u64::MAX - 1;
const FITNESS_NOISE: u64 = 1;
const SWARM: u64 = 2;
const FINAL_NOISE: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub retained_fraction: f64,
    pub mean_accuracy: f64,
    pub accuracy_std_dev: f64,
    /// Repetitions that produced a mask within tolerance of the target.
    pub repetitions: usize,
    pub seed: u64,
    pub mean_selected_items: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbsentCell {
    pub epsilon: f64,
    pub retained_fraction: f64,
    pub reason: String,
}

/// Noise-free accuracy over the same splits the sweep uses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Baseline {
    pub mean_accuracy: f64,
    pub std_dev: f64,
    pub repetitions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub mode: PrivacyMode,
    pub support_size: usize,
    pub baseline: Baseline,
    pub rows: Vec<SweepRow>,
    pub absent: Vec<AbsentCell>,
}

impl SweepResult {
    pub fn row(&self, epsilon: f64, fraction: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.epsilon == epsilon && r.retained_fraction == fraction)
    }
}

/// One swarm iteration inside one bisection round of one repetition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceLine {
    pub epsilon: f64,
    pub retained_fraction: f64,
    pub repetition: usize,
    pub round: usize,
    pub coverage_weight: f64,
    pub iteration: usize,
    pub global_best_fitness: f64,
    pub best_retained_fraction: f64,
    pub masked_data_variance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub traces: Vec<TraceLine>,
    /// Present when the mode was chosen automatically.
    pub decision: Option<ModeDecision<f64>>,
}

/// Train/holdout pair for one repetition.
pub struct Fold {
    pub train: Dataset,
    pub holdout: Dataset,
}

pub fn fold(dataset: &Dataset, config: &ExperimentConfig, repetition: usize) -> Result<Fold> {
    let seed = derive(config.seed, &[SPLIT_KEY, repetition as u64]);
    let split = stratified_split(dataset, config.train_fraction, seed)?;
    Ok(Fold {
        train: dataset.subset(&split.train),
        holdout: dataset.subset(&split.holdout),
    })
}

/// Range sensitivities of `train` with the configured overrides applied.
pub fn dp_params(train: &Dataset, epsilon: f64, config: &ExperimentConfig) -> Result<DpParams> {
    let mut params = DpParams::from_ranges(train, epsilon)?;
    for (id, &s) in &config.sensitivity {
        params = params.with_sensitivity(id, s)?;
    }
    Ok(params)
}

/// Resolves `auto`: a swarm run over the widest suggested category mode
/// feeds `decide_mode`; if that fails the cheapest suggestion is used.
pub fn resolve_mode(
    dataset: &Dataset,
    config: &ExperimentConfig,
) -> Result<(PrivacyMode, Option<ModeDecision<f64>>)> {
    let ModeChoice::Fixed(mode) = config.mode else {
        let suggestions = mode_order_suggestion(dataset);
        let Some(&first) = suggestions.first() else {
            return Err(dikw_privacy::Error::EmptySupport("every mode".into()).into());
        };
        let widest = suggestions
            .iter()
            .copied()
            .filter(|&m| m != PrivacyMode::Pdp)
            .max_by_key(|&m| mode_mask(dataset, m).count())
            .unwrap_or(first);
        let f = fold(dataset, config, 0)?;
        let epsilon = config
            .epsilons
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let params = dp_params(&f.train, epsilon, config)?;
        let mut objective = DpObjective::new(
            &f.train,
            &f.holdout,
            &params,
            mode_mask(&f.train, widest),
            derive(config.seed, &[AUTO_KEY, FITNESS_NOISE]),
            config.fitness,
        )?;
        let swarm = SwarmConfig {
            seed: derive(config.seed, &[AUTO_KEY, SWARM]),
            ..config.swarm.clone()
        };
        let out = optimize_mask(&f.train, widest, &mut objective, &swarm)?;
        return Ok(match decide_mode(&f.train, &out.best_mask, config.tau) {
            Ok(d) => (d.mode, Some(d)),
            Err(e) => {
                log::warn!("decide_mode failed ({e}); falling back to {first}");
                (first, None)
            }
        });
    };
    Ok((mode, None))
}

enum Repetition {
    Hit { accuracy: f64, selected: usize },
    Miss { closest: usize },
}

struct Cell<'a> {
    config: &'a ExperimentConfig,
    mode: PrivacyMode,
    epsilon: f64,
    fraction: f64,
    target: usize,
}

impl Cell<'_> {
    fn run(
        &self,
        fold: &Fold,
        repetition: usize,
        seed: u64,
        traces: &mut Vec<TraceLine>,
    ) -> Result<Repetition> {
        let config = self.config;
        let params = dp_params(&fold.train, self.epsilon, config)?;
        let support = mode_mask(&fold.train, self.mode);
        let mask = if self.target == support.count() {
            support
        } else {
            let b = &config.bisection;
            let mut objective = DpObjective::new(
                &fold.train,
                &fold.holdout,
                &params,
                support,
                derive(seed, &[FITNESS_NOISE]),
                config.fitness,
            )?;
            let swarm = SwarmConfig {
                seed: derive(seed, &[SWARM]),
                ..config.swarm.clone()
            };
            let (mut lo, mut hi) = (b.lower, b.upper);
            let mut closest: Option<(usize, MaskPlan)> = None;
            for round in 0..b.max_rounds {
                let lambda = 0.5 * (lo + hi);
                objective.set_weights(FitnessWeights {
                    utility: config.fitness.utility,
                    coverage: lambda,
                })?;
                let out = optimize_mask(&fold.train, self.mode, &mut objective, &swarm)?;
                self.record(&out, repetition, round, lambda, traces);
                let count = out.best_mask.count();
                let gap = count.abs_diff(self.target);
                if closest.as_ref().is_none_or(|(g, _)| gap < *g) {
                    closest = Some((gap, out.best_mask));
                }
                if gap <= b.tolerance_items {
                    break;
                }
                if count > self.target {
                    hi = lambda;
                } else {
                    lo = lambda;
                }
            }
            let (gap, mask) = closest.expect("at least one round");
            if gap > b.tolerance_items {
                return Ok(Repetition::Miss {
                    closest: mask.count(),
                });
            }
            mask
        };
        let noised = apply_dp_seeded(&fold.train, &mask, &params, derive(seed, &[FINAL_NOISE]))?;
        Ok(Repetition::Hit {
            accuracy: evaluate_utility(&noised, &fold.holdout)?.accuracy,
            selected: mask.count(),
        })
    }

    fn record(
        &self,
        out: &OptimizationOutcome<f64>,
        repetition: usize,
        round: usize,
        lambda: f64,
        traces: &mut Vec<TraceLine>,
    ) {
        traces.extend(out.trace.records.iter().map(|r| TraceLine {
            epsilon: self.epsilon,
            retained_fraction: self.fraction,
            repetition,
            round,
            coverage_weight: lambda,
            iteration: r.iteration,
            global_best_fitness: r.global_best_fitness,
            best_retained_fraction: r.retained_fraction,
            masked_data_variance: r.masked_data_variance,
        }));
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let mean = stats::mean(xs).unwrap_or(f64::NAN);
    (mean, stats::sample_variance(xs).map_or(0.0, f64::sqrt))
}

/// Runs every (epsilon, fraction) cell `repetitions` times.
///
/// Repetition `r` uses the same train/holdout split in every cell, so cells
/// are paired; swarm and noise seeds are derived from
/// (seed, epsilon index, fraction index, r).
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let dataset = config.dataset.load()?;
    let (mode, decision) = resolve_mode(&dataset, config)?;
    let support_size = mode_mask(&dataset, mode).count();
    if support_size == 0 {
        return Err(dikw_privacy::Error::EmptySupport(mode.to_string()).into());
    }
    let folds = (0..config.repetitions)
        .map(|r| fold(&dataset, config, r))
        .collect::<Result<Vec<_>>>()?;

    let clean: Vec<f64> = folds
        .iter()
        .map(|f| Ok(evaluate_utility(&f.train, &f.holdout)?.accuracy))
        .collect::<Result<_>>()?;
    let (b_mean, b_sd) = mean_sd(&clean);

    let mut rows = Vec::new();
    let mut absent = Vec::new();
    let mut traces = Vec::new();
    for (e_idx, &epsilon) in config.epsilons.iter().enumerate() {
        for (f_idx, &fraction) in config.fractions.iter().enumerate() {
            let target = (fraction * support_size as f64).round() as usize;
            if target == 0 {
                absent.push(AbsentCell {
                    epsilon,
                    retained_fraction: fraction,
                    reason: format!(
                        "fraction {fraction} of a {support_size}-item support rounds to zero items"
                    ),
                });
                continue;
            }
            let cell = Cell {
                config,
                mode,
                epsilon,
                fraction,
                target,
            };
            let mut accuracies = Vec::new();
            let mut selected = Vec::new();
            let mut misses = Vec::new();
            for (rep, f) in folds.iter().enumerate() {
                let seed = derive(config.seed, &[e_idx as u64, f_idx as u64, rep as u64]);
                match cell.run(f, rep, seed, &mut traces)? {
                    Repetition::Hit {
                        accuracy,
                        selected: s,
                    } => {
                        accuracies.push(accuracy);
                        selected.push(s as f64);
                    }
                    Repetition::Miss { closest } => misses.push(closest),
                }
            }
            if accuracies.is_empty() {
                absent.push(AbsentCell {
                    epsilon,
                    retained_fraction: fraction,
                    reason: format!(
                        "no repetition reached {target} +/- {} items (closest counts {misses:?})",
                        config.bisection.tolerance_items
                    ),
                });
                continue;
            }
            if !misses.is_empty() {
                log::warn!(
                    "epsilon {epsilon}, fraction {fraction}: {} of {} repetitions missed the target",
                    misses.len(),
                    config.repetitions
                );
            }
            let (mean_accuracy, accuracy_std_dev) = mean_sd(&accuracies);
            rows.push(SweepRow {
                epsilon,
                retained_fraction: fraction,
                mean_accuracy,
                accuracy_std_dev,
                repetitions: accuracies.len(),
                seed: config.seed,
                mean_selected_items: mean_sd(&selected).0,
            });
        }
    }

    Ok(SweepOutput {
        result: SweepResult {
            mode,
            support_size,
            baseline: Baseline {
                mean_accuracy: b_mean,
                std_dev: b_sd,
                repetitions: clean.len(),
            },
            rows,
            absent,
        },
        traces,
        decision,
    })
}
