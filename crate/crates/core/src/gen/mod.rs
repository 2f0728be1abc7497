//! Builds a DIKW-tagged dataset from a plain labelled table.
//!
//! The default [`GenSpec`] extends the UCI Iris table: the four
//! measurements become Data items, two ratios become Information, a
//! centroid-distance score becomes Knowledge, and `species` is the class
//! label. Item-level spatial and temporal metadata are synthesized from the
//! seed so spatial-temporal weighting has something to work with.

mod formula;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dikw::{
    Category, Column, DatasetParts, DikwDataset, DikwItem, Modal, PrivacyMode, PurposeEdge,
    Violation,
};
use crate::seed::{derive, hash_str, stream};
use crate::{Error, Result, Scalar};

pub use formula::{parse as parse_formula, Expr};

/// Canonical UCI Iris table (150 records, header row).
pub const IRIS_CSV: &str = include_str!("../../data/iris.csv");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceColumn {
    pub name: String,
    pub modal: Modal,
    pub category: Category,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedColumn {
    pub name: String,
    pub formula: String,
    pub modal: Modal,
    pub category: Category,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSpec {
    /// Raw table; the bundled Iris file when absent.
    pub source_file: Option<PathBuf>,
    pub seed: u64,
    pub class_column: String,
    /// Tags for every numeric column of the source.
    pub source_columns: Vec<SourceColumn>,
    pub derived_columns: Vec<DerivedColumn>,
    /// Half-width of the uniform jitter added to grid coordinates.
    pub spatial_jitter: f64,
    /// Timestamps are drawn uniformly from `[0, time_span]` seconds.
    pub time_span: i64,
    /// Share of records used to fit `centroid_distance` centroids.
    pub fit_fraction: f64,
    pub purpose_label: String,
}

fn tag(name: &str, modal: Modal, category: Category) -> SourceColumn {
    SourceColumn {
        name: name.into(),
        modal,
        category,
    }
}

fn derived(name: &str, formula: &str, modal: Modal, category: Category) -> DerivedColumn {
    DerivedColumn {
        name: name.into(),
        formula: formula.into(),
        modal,
        category,
    }
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            source_file: None,
            seed: 0,
            class_column: "species".into(),
            source_columns: vec![
                tag("sepal_length", Modal::Data, Category::Where),
                tag("sepal_width", Modal::Data, Category::Where),
                tag("petal_length", Modal::Data, Category::When),
                tag("petal_width", Modal::Data, Category::When),
            ],
            derived_columns: vec![
                derived(
                    "petal_ratio",
                    "petal_length / petal_width",
                    Modal::Information,
                    Category::What,
                ),
                derived(
                    "sepal_ratio",
                    "sepal_length / sepal_width",
                    Modal::Information,
                    Category::What,
                ),
                derived(
                    "centroid_score",
                    "centroid_distance(sepal_length, sepal_width, petal_length, petal_width)",
                    Modal::Knowledge,
                    Category::How,
                ),
            ],
            spatial_jitter: 0.1,
            time_span: 86_400,
            fit_fraction: 0.5,
            purpose_label: "derived_from".into(),
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.spatial_jitter >= 0.0) || !self.spatial_jitter.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spatial_jitter must be non-negative, got {}",
                self.spatial_jitter
            )));
        }
        if self.time_span < 0 {
            return Err(Error::InvalidParameter(format!(
                "time_span must be non-negative, got {}",
                self.time_span
            )));
        }
        if !(self.fit_fraction > 0.0 && self.fit_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fit_fraction must lie in (0, 1], got {}",
                self.fit_fraction
            )));
        }
        Ok(())
    }
}

struct Source {
    numeric: Vec<(String, Vec<f64>)>,
    class_labels: Vec<String>,
    classes: Vec<usize>,
}

fn read_source(text: &str, class_column: &str) -> Result<Source> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("source header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let class_pos = header
        .iter()
        .position(|h| h == class_column)
        .ok_or_else(|| Error::MissingSchemaEntry {
            column: class_column.to_string(),
        })?;
    let mut numeric: Vec<(String, Vec<f64>)> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != class_pos)
        .map(|(_, h)| (h.clone(), Vec::new()))
        .collect();
    let mut class_labels: Vec<String> = Vec::new();
    let mut classes = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Schema(format!("source: {e}")))?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: rec.len(),
            });
        }
        let mut k = 0;
        for (j, field) in rec.iter().enumerate() {
            if j == class_pos {
                let idx = match class_labels.iter().position(|l| l == field) {
                    Some(i) => i,
                    None => {
                        class_labels.push(field.to_string());
                        class_labels.len() - 1
                    }
                };
                classes.push(idx);
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                column: header[j].clone(),
                value: field.to_string(),
                expected: "number".into(),
            })?;
            numeric[k].1.push(v);
            k += 1;
        }
    }
    if classes.is_empty() {
        return Err(Error::Schema("source table has no records".into()));
    }
    Ok(Source {
        numeric,
        class_labels,
        classes,
    })
}

/// Derived columns in an order where every reference is computed first.
fn evaluation_order(spec: &GenSpec, known: &HashSet<String>) -> Result<Vec<(usize, Expr)>> {
    let parsed: Vec<Expr> = spec
        .derived_columns
        .iter()
        .map(|d| formula::parse(&d.formula))
        .collect::<Result<_>>()?;
    let derived_names: HashMap<&str, usize> = spec
        .derived_columns
        .iter()
        .enumerate()
        .map(|(i, d)| (d.name.as_str(), i))
        .collect();
    for (d, e) in spec.derived_columns.iter().zip(&parsed) {
        for c in e.columns() {
            if !known.contains(c) && !derived_names.contains_key(c) {
                return Err(Error::Formula(format!(
                    "\"{}\" references unknown column \"{c}\"",
                    d.name
                )));
            }
        }
    }
    // Kahn's algorithm, declaration order among ready columns.
    let n = parsed.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let ready = (0..n).find(|&i| {
            !done[i]
                && parsed[i]
                    .columns()
                    .iter()
                    .all(|c| derived_names.get(c).is_none_or(|&k| done[k]))
        });
        let Some(i) = ready else {
            let stuck: Vec<&str> = (0..n)
                .filter(|&i| !done[i])
                .map(|i| spec.derived_columns[i].name.as_str())
                .collect();
            return Err(Error::Formula(format!(
                "derived columns form a cycle: {}",
                stuck.join(", ")
            )));
        };
        done[i] = true;
        order.push((i, parsed[i].clone()));
    }
    Ok(order)
}

fn to_scalar<F: Scalar>(v: &[f64]) -> Vec<F> {
    v.iter().map(|&x| F::lit(x)).collect()
}

/// Generates the dataset described by `spec`.
///
/// Pure in (source bytes, spec): the same inputs always give the same
/// dataset.
pub fn generate_iris_dikw<F: Scalar>(spec: &GenSpec) -> Result<DikwDataset<F>> {
    spec.validate()?;
    let text = match &spec.source_file {
        None => IRIS_CSV.to_string(),
        Some(p) => fs::read_to_string(p).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        })?,
    };
    let src = read_source(&text, &spec.class_column)?;
    let n = src.classes.len();

    let tags: HashMap<&str, &SourceColumn> = spec
        .source_columns
        .iter()
        .map(|t| (t.name.as_str(), t))
        .collect();
    for t in &spec.source_columns {
        if !src.numeric.iter().any(|(name, _)| name == &t.name) {
            return Err(Error::Schema(format!(
                "tagged column \"{}\" is not a numeric source column",
                t.name
            )));
        }
    }

    let mut values: HashMap<String, Vec<f64>> = HashMap::new();
    let mut items: Vec<DikwItem<F>> = Vec::new();
    let mut refs: Vec<Vec<String>> = Vec::new();
    for (name, v) in &src.numeric {
        let t = tags
            .get(name.as_str())
            .ok_or_else(|| Error::MissingSchemaEntry {
                column: name.clone(),
            })?;
        items.push(DikwItem::numeric(name, t.modal, t.category));
        refs.push(Vec::new());
        values.insert(name.clone(), v.clone());
    }

    let known: HashSet<String> = values.keys().cloned().collect();
    for d in &spec.derived_columns {
        if known.contains(&d.name) || d.name == spec.class_column {
            return Err(Error::DuplicateId(d.name.clone()));
        }
    }
    let order = evaluation_order(spec, &known)?;

    let mut fit: Vec<usize> = (0..n).collect();
    fit.shuffle(&mut stream(derive(spec.seed, &[hash_str("fit")])));
    fit.truncate(((n as f64 * spec.fit_fraction).round() as usize).max(1));
    fit.sort_unstable();

    let mut computed: Vec<Option<Vec<f64>>> = vec![None; spec.derived_columns.len()];
    for (i, expr) in &order {
        let d = &spec.derived_columns[*i];
        let lookup = |c: &str| -> Option<&[f64]> { values.get(c).map(Vec::as_slice) };
        let ctx = formula::EvalContext {
            records: n,
            column: &lookup,
            classes: &src.classes,
            fit_records: &fit,
        };
        let col = formula::eval(expr, &ctx)?;
        if let Some(r) = col.iter().position(|x| !x.is_finite()) {
            return Err(Error::Formula(format!(
                "\"{}\" is not finite at record {r}",
                d.name
            )));
        }
        values.insert(d.name.clone(), col.clone());
        computed[*i] = Some(col);
    }
    for (d, e) in spec.derived_columns.iter().zip(order_exprs(&order, spec)) {
        items.push(DikwItem::numeric(&d.name, d.modal, d.category));
        refs.push(e.columns().iter().map(|s| s.to_string()).collect());
    }

    attach_metadata(&mut items, src.numeric.len(), &refs, spec);

    let mut columns: Vec<Column<F>> = src
        .numeric
        .iter()
        .map(|(_, v)| Column::Numeric(to_scalar(v)))
        .collect();
    columns.extend(
        computed
            .into_iter()
            .map(|c| Column::Numeric(to_scalar(&c.expect("every derived column evaluated")))),
    );

    let labels: Vec<&str> = src.class_labels.iter().map(String::as_str).collect();
    items.push(DikwItem::categorical(
        &spec.class_column,
        Modal::Information,
        Category::What,
        &labels,
    ));
    columns.push(Column::Categorical(src.classes));

    let purpose_edges = spec
        .derived_columns
        .iter()
        .zip(&refs[src.numeric.len()..])
        .flat_map(|(d, r)| {
            r.iter()
                .map(move |to| PurposeEdge::new(&d.name, to, &spec.purpose_label))
        })
        .collect();

    DikwDataset::new(items, columns, purpose_edges, Some(&spec.class_column))
}

fn order_exprs<'a>(order: &'a [(usize, Expr)], spec: &GenSpec) -> Vec<&'a Expr> {
    (0..spec.derived_columns.len())
        .map(|i| &order.iter().find(|(k, _)| *k == i).expect("ordered").1)
        .collect()
}

/// Where items get a grid cell plus jitter, When items a uniform timestamp;
/// derived items take the mean position and latest time of what they reference.
fn attach_metadata<F: Scalar>(
    items: &mut [DikwItem<F>],
    source_count: usize,
    refs: &[Vec<String>],
    spec: &GenSpec,
) {
    let mut rng = stream(derive(spec.seed, &[hash_str("metadata")]));
    let mut cell = 0usize;
    for item in items[..source_count].iter_mut() {
        match item.category {
            Category::Where => {
                let base = [(cell % 2) as f64, (cell / 2) as f64];
                cell += 1;
                let mut jitter = || {
                    if spec.spatial_jitter > 0.0 {
                        rng.gen_range(-spec.spatial_jitter..=spec.spatial_jitter)
                    } else {
                        0.0
                    }
                };
                let p = [base[0] + jitter(), base[1] + jitter()];
                item.spatial = Some([F::lit(p[0]), F::lit(p[1])]);
            }
            Category::When => item.timestamp = Some(rng.gen_range(0..=spec.time_span)),
            _ => {}
        }
    }
    for k in source_count..items.len() {
        let sources: Vec<&DikwItem<F>> = refs[k]
            .iter()
            .filter_map(|id| items.iter().find(|i| &i.id == id))
            .collect();
        let located: Vec<[F; 2]> = sources.iter().filter_map(|i| i.spatial).collect();
        let spatial = (!located.is_empty()).then(|| {
            let m = F::from_count(located.len());
            let sx = located.iter().fold(F::zero(), |a, p| a + p[0]);
            let sy = located.iter().fold(F::zero(), |a, p| a + p[1]);
            [sx / m, sy / m]
        });
        let timestamp = sources.iter().filter_map(|i| i.timestamp).max();
        items[k].spatial = spatial;
        items[k].timestamp = timestamp;
    }
}

/// Findings of [`validate_generated`]; empty when the dataset is usable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural invariants plus: Data, Information and Knowledge each have
/// an item, and DDP, IDP and KDP each select something. Never fails.
pub fn validate_generated<F: Scalar>(parts: &DatasetParts<F>) -> ValidationReport {
    let mut violations = parts.violations();
    let label = parts.class_label.as_deref();
    let eligible = |i: &&DikwItem<F>| Some(i.id.as_str()) != label;
    for modal in [Modal::Data, Modal::Information, Modal::Knowledge] {
        if !parts
            .items
            .iter()
            .filter(eligible)
            .any(|i| i.modal == modal)
        {
            violations.push(Violation::EmptyModal(modal));
        }
    }
    for mode in [PrivacyMode::Ddp, PrivacyMode::Idp, PrivacyMode::Kdp] {
        let cats = mode.categories().expect("category mode");
        if !parts
            .items
            .iter()
            .filter(eligible)
            .any(|i| cats.contains(&i.category))
        {
            violations.push(Violation::EmptyModeSupport(mode));
        }
    }
    ValidationReport { violations }
}
