//! Experiment configuration (TOML, `format_version = 1`).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dikw_privacy::gen::{generate_iris_dikw, GenSpec};
use dikw_privacy::{dikw::load_dataset, Dataset, FitnessWeights, PrivacyMode, SwarmConfig};
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

pub const FORMAT_VERSION: i64 = 1;

/// A fixed privacy mode, or `auto` to let the swarm and `decide_mode` pick one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModeChoice {
    Fixed(PrivacyMode),
    Auto,
}

impl FromStr for ModeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ModeChoice::Auto);
        }
        s.parse().map(ModeChoice::Fixed).map_err(|e| e.to_string())
    }
}

impl TryFrom<String> for ModeChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ModeChoice> for String {
    fn from(m: ModeChoice) -> String {
        m.to_string()
    }
}

impl fmt::Display for ModeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeChoice::Fixed(m) => m.fmt(f),
            ModeChoice::Auto => f.write_str("auto"),
        }
    }
}

/// Either a generated dataset or a data/schema file pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated: Option<GenSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            generated: Some(GenSpec::default()),
            data: None,
            schema: None,
        }
    }
}

impl DatasetConfig {
    pub fn load(&self) -> Result<Dataset> {
        match (&self.generated, &self.data, &self.schema) {
            (Some(spec), None, None) => Ok(generate_iris_dikw(spec)?),
            (None, Some(data), Some(schema)) => Ok(load_dataset(data, schema)?),
            _ => Err(BenchError::Config(
                "dataset needs either [dataset.generated] or both data and schema".into(),
            )),
        }
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.data, &mut self.schema].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(spec) = &mut self.generated {
            if let Some(p) = &mut spec.source_file {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}

/// Coverage-weight bisection used to hit a retained-fraction target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BisectionConfig {
    pub max_rounds: usize,
    pub lower: f64,
    pub upper: f64,
    /// Allowed distance, in items, between the selected count and the target.
    pub tolerance_items: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            max_rounds: 12,
            lower: -2.0,
            upper: 2.0,
            tolerance_items: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Laplace,
    RandomizedResponse,
}

/// One neighbouring-input check. Laplace reads `a`/`b` as values and needs
/// `sensitivity`; randomized response reads them as label indices and
/// needs `label_count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCase {
    pub name: String,
    pub mechanism: MechanismKind,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_count: Option<usize>,
    /// Epsilon the mechanism is declared to satisfy; defaults to `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed: Option<f64>,
    pub a: f64,
    pub b: f64,
}

impl VerifyCase {
    pub fn laplace(name: &str, sensitivity: f64, epsilon: f64, a: f64, b: f64) -> Self {
        Self {
            name: name.into(),
            mechanism: MechanismKind::Laplace,
            epsilon,
            sensitivity: Some(sensitivity),
            label_count: None,
            claimed: None,
            a,
            b,
        }
    }

    pub fn randomized_response(
        name: &str,
        label_count: usize,
        epsilon: f64,
        a: usize,
        b: usize,
    ) -> Self {
        Self {
            name: name.into(),
            mechanism: MechanismKind::RandomizedResponse,
            epsilon,
            sensitivity: None,
            label_count: Some(label_count),
            claimed: None,
            a: a as f64,
            b: b as f64,
        }
    }

    pub fn claiming(self, claimed: f64) -> Self {
        Self {
            claimed: Some(claimed),
            ..self
        }
    }

    pub fn claimed_epsilon(&self) -> f64 {
        self.claimed.unwrap_or(self.epsilon)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.epsilon.is_finite()
            && self.claimed.is_none_or(|c| c >= 0.0 && c.is_finite())
            && match self.mechanism {
                MechanismKind::Laplace => {
                    self.epsilon > 0.0
                        && self.sensitivity.is_some_and(|s| s > 0.0 && s.is_finite())
                        && self.label_count.is_none()
                        && self.a.is_finite()
                        && self.b.is_finite()
                }
                MechanismKind::RandomizedResponse => {
                    let k = self.label_count.unwrap_or(0);
                    self.epsilon >= 0.0
                        && k >= 2
                        && self.sensitivity.is_none()
                        && [self.a, self.b]
                            .iter()
                            .all(|v| v.fract() == 0.0 && *v >= 0.0 && (*v as usize) < k)
                }
            };
        if ok {
            Ok(())
        } else {
            Err(BenchError::Config(format!(
                "verify case \"{}\" has invalid parameters",
                self.name
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub draws: usize,
    pub bins: usize,
    pub cases: Vec<VerifyCase>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            draws: 100_000,
            bins: 40,
            cases: vec![
                VerifyCase::randomized_response("randomized_response_ln3", 2, 3f64.ln(), 0, 1),
                VerifyCase::laplace("laplace_eps1", 1.0, 1.0, 0.0, 1.0),
                VerifyCase::laplace("laplace_eps1_claimed_half", 1.0, 1.0, 0.0, 1.0).claiming(0.5),
                VerifyCase::laplace("laplace_identical_inputs", 1.0, 1.0, 0.0, 0.0),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: i64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: ModeChoice,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Association threshold for `auto` mode.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Where run files go; not written back into the resolved config so
    /// that run directories are byte-identical wherever they live.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    /// Per-item sensitivity overrides; other numeric items use their range.
    #[serde(default)]
    pub sensitivity: BTreeMap<String, f64>,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub swarm: SwarmConfig,
    #[serde(default)]
    pub fitness: FitnessWeights,
    #[serde(default)]
    pub bisection: BisectionConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_mode() -> ModeChoice {
    ModeChoice::Fixed(PrivacyMode::Dikdp)
}
fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.5, 1.0, 2.0, 4.0]
}
fn default_fractions() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}
fn default_repetitions() -> usize {
    10
}
fn default_train_fraction() -> f64 {
    0.7
}
fn default_tau() -> f64 {
    0.5
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            seed: 0,
            mode: default_mode(),
            epsilons: default_epsilons(),
            fractions: default_fractions(),
            repetitions: default_repetitions(),
            train_fraction: default_train_fraction(),
            tau: default_tau(),
            output_dir: None,
            sensitivity: BTreeMap::new(),
            dataset: DatasetConfig::default(),
            swarm: SwarmConfig::default(),
            fitness: FitnessWeights::default(),
            bisection: BisectionConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let version = text
            .parse::<toml::Table>()
            .map_err(|e| BenchError::Config(e.to_string()))?
            .get("format_version")
            .and_then(toml::Value::as_integer);
        match version {
            Some(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(BenchError::Config(format!(
                    "unsupported format_version {v} (expected {FORMAT_VERSION})"
                )))
            }
            None => return Err(BenchError::Config("missing format_version".into())),
        }
        let mut config: ExperimentConfig =
            toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.dataset.resolve(base);
        if let Some(out) = &mut config.output_dir {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| BenchError::encode("config", e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.format_version != FORMAT_VERSION {
            return bad(format!(
                "unsupported format_version {}",
                self.format_version
            ));
        }
        if self.epsilons.is_empty() || self.fractions.is_empty() {
            return bad("epsilons and fractions must be non-empty".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return bad(format!("epsilon {e} is not a positive finite number"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return bad(format!("retained fraction {f} is outside (0, 1]"));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction {} is outside (0, 1)",
                self.train_fraction
            ));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau {} is outside (0, 1)", self.tau));
        }
        if let Some((id, s)) = self
            .sensitivity
            .iter()
            .find(|(_, s)| !(**s > 0.0 && s.is_finite()))
        {
            return bad(format!(
                "sensitivity for \"{id}\" must be positive, got {s}"
            ));
        }
        // TOML integers are signed, so larger seeds could not be written back.
        let seeds = [
            ("seed", Some(self.seed)),
            ("swarm.seed", Some(self.swarm.seed)),
            (
                "dataset.generated.seed",
                self.dataset.generated.as_ref().map(|g| g.seed),
            ),
        ];
        if let Some((name, Some(s))) = seeds
            .iter()
            .find(|(_, s)| s.is_some_and(|s| s > i64::MAX as u64))
        {
            return bad(format!("{name} {s} exceeds {}", i64::MAX));
        }
        let b = &self.bisection;
        if b.max_rounds == 0 || !(b.lower < b.upper) || !b.lower.is_finite() || !b.upper.is_finite()
        {
            return bad("bisection needs max_rounds >= 1 and a finite lower < upper".into());
        }
        if self.verify.draws < 10_000 || self.verify.bins < 2 {
            return bad("verify needs draws >= 10000 and bins >= 2".into());
        }
        for case in &self.verify.cases {
            case.validate()?;
        }
        match &self.dataset {
            DatasetConfig {
                generated: Some(spec),
                data: None,
                schema: None,
            } => spec.validate()?,
            DatasetConfig {
                generated: None,
                data: Some(_),
                schema: Some(_),
            } => {}
            _ => {
                return bad(
                    "dataset needs either [dataset.generated] or both data and schema".into(),
                )
            }
        }
        self.swarm.validate()?;
        self.fitness.validate()?;
        Ok(())
    }
}
