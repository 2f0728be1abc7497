// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dikw_bench::config::{ExperimentConfig, ModeChoice};
use dikw_bench::output::{self, VERSION_STAMP};
use dikw_bench::sweep::{dp_params, fold, resolve_mode};
use dikw_bench::{run_sweep, run_verify, write_sweep_run, BenchError, Result};
use dikw_privacy::dikw::{mode_mask, write_dataset};
use dikw_privacy::gen::{generate_iris_dikw, validate_generated};
use dikw_privacy::seed::derive;
use dikw_privacy::swarm::{decide_mode, optimize_mask};
use dikw_privacy::utility::DpObjective;
use dikw_privacy::{Dataset, MaskPlan, SwarmConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "dikw-dp",
    version,
    about = "Selective differential privacy on DIKW-tagged data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// DDP, IDP, KDP, DIDP, IKDP, DIKDP, PDP or auto.
    #[arg(long)]
    mode: Option<ModeChoice>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the Iris-DIKW dataset (data file plus schema).
    Generate(Common),
    /// Run the epsilon x retained-fraction sweep.
    Sweep(Common),
    /// Empirically check the configured mechanisms against their epsilon.
    Verify(Common),
    /// Run one swarm optimization on the first split.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Privacy budget for the fitness; the smallest grid value when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Choose a privacy mode from a retained mask.
    DecideMode {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ids of the retained items.
        #[arg(long, value_delimiter = ',', required = true)]
        mask: Vec<String>,
        /// Association threshold, overriding the config.
        #[arg(long)]
        tau: Option<f64>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(mode) = common.mode {
        config.mode = mode;
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &ExperimentConfig, fallback: &str) -> PathBuf {
    config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn print_json<T: Serialize>(what: &str, value: &T) -> Result<()> {
    let bytes = output::json(what, value)?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}

fn generate(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let mut spec =
        config.dataset.generated.clone().ok_or_else(|| {
            BenchError::Config("generate needs a [dataset.generated] section".into())
        })?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let dataset: Dataset = generate_iris_dikw(&spec)?;
    let report = validate_generated(dataset.parts());
    for v in &report.violations {
        log::warn!("{v}");
    }
    let dir = out_dir(&config, "iris-dikw");
    let (data, schema) = (dir.join("iris_dikw.csv"), dir.join("iris_dikw.schema.toml"));
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    write_dataset(&dataset, &data, &schema)?;
    println!("{}", data.display());
    println!("{}", schema.display());
    Ok(())
}

fn sweep(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let dir = out_dir(&config, "sweep-run");
    let out = run_sweep(&config)?;
    write_sweep_run(&dir, &config, &out)?;
    let r = &out.result;
    println!(
        "mode {} ({} items), clean baseline {:.4}",
        r.mode, r.support_size, r.baseline.mean_accuracy
    );
    for row in &r.rows {
        println!(
            "epsilon {:<6} fraction {:<5} accuracy {:.4} +/- {:.4} ({} reps)",
            row.epsilon,
            row.retained_fraction,
            row.mean_accuracy,
            row.accuracy_std_dev,
            row.repetitions
        );
    }
    for a in &r.absent {
        println!(
            "epsilon {} fraction {}: absent ({})",
            a.epsilon, a.retained_fraction, a.reason
        );
    }
    println!("written to {}", dir.display());
    Ok(())
}

fn verify(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let report = run_verify(&config.verify, config.seed)?;
    for c in &report.cases {
        println!(
            "{:<32} {:?} claimed {:.4} empirical {}",
            c.name,
            c.status,
            c.claimed,
            c.empirical.map_or("-".into(), |e| format!("{e:.4}"))
        );
    }
    if let Some(dir) = &config.output_dir {
        output::write(
            &dir.join("verify.json"),
            &output::json("verify report", &report)?,
        )?;
        output::write(&dir.join("VERSION"), VERSION_STAMP.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeReport {
    mode: dikw_privacy::PrivacyMode,
    epsilon: f64,
    selected: Vec<String>,
    best_fitness: f64,
    evaluations: usize,
    converged_at: Option<usize>,
}

fn optimize(common: &Common, epsilon: Option<f64>) -> Result<()> {
    let config = load_config(common)?;
    let dataset = config.dataset.load()?;
    let (mode, _) = resolve_mode(&dataset, &config)?;
    let epsilon = epsilon.unwrap_or_else(|| {
        config
            .epsilons
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    });
    let f = fold(&dataset, &config, 0)?;
    let params = dp_params(&f.train, epsilon, &config)?;
    let mut objective = DpObjective::new(
        &f.train,
        &f.holdout,
        &params,
        mode_mask(&f.train, mode),
        derive(config.seed, &[1]),
        config.fitness,
    )?;
    let swarm = SwarmConfig {
        seed: derive(config.seed, &[2]),
        ..config.swarm.clone()
    };
    let out = optimize_mask(&f.train, mode, &mut objective, &swarm)?;
    let report = OptimizeReport {
        mode,
        epsilon,
        selected: out
            .best_mask
            .ids(&f.train)
            .into_iter()
            .map(str::to_string)
            .collect(),
        best_fitness: out.best_fitness,
        evaluations: out.evaluations,
        converged_at: out.converged_at,
    };
    print_json("optimize report", &report)?;
    if let Some(dir) = &config.output_dir {
        output::write(
            &dir.join("optimize.json"),
            &output::json("optimize report", &report)?,
        )?;
        output::write(
            &dir.join("trace.jsonl"),
            &output::jsonl("trace", &out.trace.records)?,
        )?;
        output::write(&dir.join("VERSION"), VERSION_STAMP.as_bytes())?;
    }
    Ok(())
}

fn decide(common: &Common, ids: &[String], tau: Option<f64>) -> Result<()> {
    let config = load_config(common)?;
    let dataset = config.dataset.load()?;
    let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
    let mask = MaskPlan::from_ids(&dataset, &ids)?;
    let decision = decide_mode(&dataset, &mask, tau.unwrap_or(config.tau))?;
    print_json("mode decision", &decision)?;
    if let Some(dir) = &config.output_dir {
        output::write(
            &dir.join("mode_decision.json"),
            &output::json("mode decision", &decision)?,
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(c) => generate(c),
        Command::Sweep(c) => sweep(c),
        Command::Verify(c) => verify(c),
        Command::Optimize { common, epsilon } => optimize(common, *epsilon),
        Command::DecideMode { common, mask, tau } => decide(common, mask, *tau),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
