//! The DIKW data model: tagged items, purpose edges, column storage and masks.

mod io;
mod mode;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

pub use io::{load_dataset, parse_dataset, schema_to_string, to_csv_string, write_dataset};
pub use mode::{mode_mask, PrivacyMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modal {
    Data,
    Information,
    Knowledge,
    Purpose,
}

impl Modal {
    pub const ALL: [Modal; 4] = [
        Modal::Data,
        Modal::Information,
        Modal::Knowledge,
        Modal::Purpose,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Who,
    What,
    When,
    Where,
    Why,
    How,
    PurposeTag,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Who,
        Category::What,
        Category::When,
        Category::Where,
        Category::Why,
        Category::How,
        Category::PurposeTag,
    ];
}

macro_rules! str_enum {
    ($ty:ty { $($variant:path => $name:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),* })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)*
                    other => Err(Error::Schema(format!(
                        "unknown {} \"{other}\"",
                        stringify!($ty).to_ascii_lowercase()
                    ))),
                }
            }
        }
    };
}

str_enum!(Modal {
    Modal::Data => "data",
    Modal::Information => "information",
    Modal::Knowledge => "knowledge",
    Modal::Purpose => "purpose",
});

str_enum!(Category {
    Category::Who => "who",
    Category::What => "what",
    Category::When => "when",
    Category::Where => "where",
    Category::Why => "why",
    Category::How => "how",
    Category::PurposeTag => "purpose_tag",
});

/// Value domain of an item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Numeric,
    /// Declared finite label set; values are stored as indices into it.
    Categorical {
        labels: Vec<String>,
    },
}

impl ValueKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ValueKind::Numeric)
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            ValueKind::Numeric => None,
            ValueKind::Categorical { labels } => Some(labels),
        }
    }
}

/// One dataset column with its DIKW tags and optional spatial-temporal metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct DikwItem<F> {
    pub id: String,
    pub name: String,
    pub modal: Modal,
    pub category: Category,
    pub kind: ValueKind,
    /// Dimensionless planar coordinate.
    pub spatial: Option<[F; 2]>,
    /// Seconds since the Unix epoch.
    pub timestamp: Option<i64>,
}

impl<F> DikwItem<F> {
    pub fn numeric(id: &str, modal: Modal, category: Category) -> Self {
        Self {
            id: id.to_string(),
            name: id.to_string(),
            modal,
            category,
            kind: ValueKind::Numeric,
            spatial: None,
            timestamp: None,
        }
    }

    pub fn categorical(id: &str, modal: Modal, category: Category, labels: &[&str]) -> Self {
        Self {
            kind: ValueKind::Categorical {
                labels: labels.iter().map(|s| s.to_string()).collect(),
            },
            ..Self::numeric(id, modal, category)
        }
    }
}

/// Directed purpose relation between two items.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PurposeEdge {
    pub from: String,
    pub to: String,
    pub label: String,
}

impl PurposeEdge {
    pub fn new(from: &str, to: &str, label: &str) -> Self {
        Self {
            from: from.to_string(),
            to: to.to_string(),
            label: label.to_string(),
        }
    }
}

/// Column storage. Categorical values are label indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Column<F> {
    Numeric(Vec<F>),
    Categorical(Vec<usize>),
}

impl<F> Column<F> {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[F]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[usize]> {
        match self {
            Column::Numeric(_) => None,
            Column::Categorical(v) => Some(v),
        }
    }
}

/// A single cell value, as seen through a record view.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value<F> {
    Num(F),
    Label(usize),
}

/// A broken dataset invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateId(String),
    ColumnCount {
        items: usize,
        columns: usize,
    },
    RaggedColumn {
        item: String,
        expected: usize,
        found: usize,
    },
    KindMismatch(String),
    NonFinite {
        item: String,
        record: usize,
    },
    LabelOutOfRange {
        item: String,
        record: usize,
        label: usize,
    },
    EmptyLabelSet(String),
    DanglingEdge {
        from: String,
        to: String,
    },
    SelfLoop(String),
    UnknownClassLabel(String),
    NumericClassLabel(String),
    EmptyModal(Modal),
    EmptyModeSupport(PrivacyMode),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate item id \"{id}\""),
            Violation::ColumnCount { items, columns } => {
                write!(f, "{items} items but {columns} columns")
            }
            Violation::RaggedColumn {
                item,
                expected,
                found,
            } => write!(f, "item \"{item}\" has {found} values, expected {expected}"),
            Violation::KindMismatch(id) => {
                write!(
                    f,
                    "item \"{id}\" column storage does not match its value kind"
                )
            }
            Violation::NonFinite { item, record } => {
                write!(f, "item \"{item}\" record {record} is not finite")
            }
            Violation::LabelOutOfRange {
                item,
                record,
                label,
            } => write!(
                f,
                "item \"{item}\" record {record} has label index {label} outside its label set"
            ),
            Violation::EmptyLabelSet(id) => {
                write!(f, "categorical item \"{id}\" declares no labels")
            }
            Violation::DanglingEdge { from, to } => {
                write!(f, "purpose edge {from} -> {to} references a missing item")
            }
            Violation::SelfLoop(id) => write!(f, "purpose edge self-loop on \"{id}\""),
            Violation::UnknownClassLabel(id) => write!(f, "class label \"{id}\" is not an item"),
            Violation::NumericClassLabel(id) => {
                write!(f, "class label \"{id}\" must be categorical")
            }
            Violation::EmptyModal(m) => write!(f, "modal {m} has no items"),
            Violation::EmptyModeSupport(m) => write!(f, "mode {m} selects no items"),
        }
    }
}

/// Unvalidated dataset components.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetParts<F> {
    pub items: Vec<DikwItem<F>>,
    pub columns: Vec<Column<F>>,
    pub purpose_edges: Vec<PurposeEdge>,
    pub class_label: Option<String>,
}

impl<F: Scalar> DatasetParts<F> {
    /// Every structural invariant a [`DikwDataset`] must satisfy.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for item in &self.items {
            if !seen.insert(item.id.as_str()) {
                out.push(Violation::DuplicateId(item.id.clone()));
            }
        }
        if self.items.len() != self.columns.len() {
            out.push(Violation::ColumnCount {
                items: self.items.len(),
                columns: self.columns.len(),
            });
        }
        let n = self.columns.first().map_or(0, Column::len);
        for (item, col) in self.items.iter().zip(&self.columns) {
            if col.len() != n {
                out.push(Violation::RaggedColumn {
                    item: item.id.clone(),
                    expected: n,
                    found: col.len(),
                });
            }
            match (&item.kind, col) {
                (ValueKind::Numeric, Column::Numeric(v)) => {
                    if let Some(r) = v.iter().position(|x| !x.is_finite()) {
                        out.push(Violation::NonFinite {
                            item: item.id.clone(),
                            record: r,
                        });
                    }
                }
                (ValueKind::Categorical { labels }, Column::Categorical(v)) => {
                    if labels.is_empty() {
                        out.push(Violation::EmptyLabelSet(item.id.clone()));
                    }
                    if let Some(r) = v.iter().position(|&l| l >= labels.len()) {
                        out.push(Violation::LabelOutOfRange {
                            item: item.id.clone(),
                            record: r,
                            label: v[r],
                        });
                    }
                }
                _ => out.push(Violation::KindMismatch(item.id.clone())),
            }
        }
        for e in &self.purpose_edges {
            if !seen.contains(e.from.as_str()) || !seen.contains(e.to.as_str()) {
                out.push(Violation::DanglingEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                });
            } else if e.from == e.to {
                out.push(Violation::SelfLoop(e.from.clone()));
            }
        }
        if let Some(label) = &self.class_label {
            match self.items.iter().find(|i| &i.id == label) {
                None => out.push(Violation::UnknownClassLabel(label.clone())),
                Some(i) if i.kind.is_numeric() => {
                    out.push(Violation::NumericClassLabel(label.clone()))
                }
                Some(_) => {}
            }
        }
        out
    }
}

/// Validated, immutable DIKW dataset. Transformations return new values.
#[derive(Clone, Debug, PartialEq)]
pub struct DikwDataset<F> {
    parts: DatasetParts<F>,
    class_index: Option<usize>,
}

impl<F: Scalar> DikwDataset<F> {
    pub fn from_parts(parts: DatasetParts<F>) -> Result<Self> {
        let violations = parts.violations();
        if !violations.is_empty() {
            return Err(Error::InvalidDataset(violations));
        }
        let class_index = parts
            .class_label
            .as_ref()
            .and_then(|l| parts.items.iter().position(|i| &i.id == l));
        Ok(Self { parts, class_index })
    }

    pub fn new(
        items: Vec<DikwItem<F>>,
        columns: Vec<Column<F>>,
        purpose_edges: Vec<PurposeEdge>,
        class_label: Option<&str>,
    ) -> Result<Self> {
        Self::from_parts(DatasetParts {
            items,
            columns,
            purpose_edges,
            class_label: class_label.map(str::to_string),
        })
    }

    pub fn parts(&self) -> &DatasetParts<F> {
        &self.parts
    }

    pub fn into_parts(self) -> DatasetParts<F> {
        self.parts
    }

    pub fn items(&self) -> &[DikwItem<F>] {
        &self.parts.items
    }

    pub fn columns(&self) -> &[Column<F>] {
        &self.parts.columns
    }

    pub fn column(&self, index: usize) -> &Column<F> {
        &self.parts.columns[index]
    }

    pub fn purpose_edges(&self) -> &[PurposeEdge] {
        &self.parts.purpose_edges
    }

    pub fn class_label(&self) -> Option<&str> {
        self.parts.class_label.as_deref()
    }

    pub fn class_index(&self) -> Option<usize> {
        self.class_index
    }

    pub fn item_count(&self) -> usize {
        self.parts.items.len()
    }

    pub fn record_count(&self) -> usize {
        self.parts.columns.first().map_or(0, Column::len)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.parts.items.iter().position(|i| i.id == id)
    }

    pub fn value(&self, record: usize, item: usize) -> Value<F> {
        match &self.parts.columns[item] {
            Column::Numeric(v) => Value::Num(v[record]),
            Column::Categorical(v) => Value::Label(v[record]),
        }
    }

    pub fn record(&self, record: usize) -> Vec<Value<F>> {
        (0..self.item_count())
            .map(|j| self.value(record, j))
            .collect()
    }

    /// New dataset with the same schema and replaced column storage.
    pub fn with_columns(&self, columns: Vec<Column<F>>) -> Result<Self> {
        Self::from_parts(DatasetParts {
            columns,
            ..self.parts.clone()
        })
    }

    /// New dataset restricted to the given record indices, in order.
    pub fn subset(&self, records: &[usize]) -> Self {
        let columns = self
            .parts
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Column::Numeric(records.iter().map(|&r| v[r]).collect()),
                Column::Categorical(v) => {
                    Column::Categorical(records.iter().map(|&r| v[r]).collect())
                }
            })
            .collect();
        Self {
            parts: DatasetParts {
                columns,
                ..self.parts.clone()
            },
            class_index: self.class_index,
        }
    }

    /// Class label indices per record, when a class label is designated.
    pub fn class_values(&self) -> Option<&[usize]> {
        self.class_index
            .and_then(|j| self.parts.columns[j].as_categorical())
    }

    /// Validates that `mask` covers this dataset and leaves the class label alone.
    pub fn check_mask(&self, mask: &MaskPlan) -> Result<()> {
        if mask.len() != self.item_count() {
            return Err(Error::LengthMismatch {
                expected: self.item_count(),
                found: mask.len(),
            });
        }
        if let Some(j) = self.class_index {
            if mask.is_selected(j) {
                return Err(Error::InvalidParameter(format!(
                    "class label \"{}\" cannot be selected for noising",
                    self.parts.items[j].id
                )));
            }
        }
        Ok(())
    }

    /// Same items and edges; records may differ.
    pub fn same_schema(&self, other: &Self) -> bool {
        self.parts.items == other.parts.items
            && self.parts.purpose_edges == other.parts.purpose_edges
            && self.parts.class_label == other.parts.class_label
    }
}

/// Which items receive noise, aligned with a dataset's item order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaskPlan {
    selected: Vec<bool>,
}

impl MaskPlan {
    pub fn new(selected: Vec<bool>) -> Self {
        Self { selected }
    }

    pub fn none(len: usize) -> Self {
        Self::new(vec![false; len])
    }

    /// Mask selecting the given ids on `dataset`.
    pub fn from_ids<F: Scalar>(dataset: &DikwDataset<F>, ids: &[&str]) -> Result<Self> {
        let mut selected = vec![false; dataset.item_count()];
        for id in ids {
            let j = dataset
                .index_of(id)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown item id \"{id}\"")))?;
            selected[j] = true;
        }
        let mask = Self { selected };
        dataset.check_mask(&mask)?;
        Ok(mask)
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn is_selected(&self, index: usize) -> bool {
        self.selected[index]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.selected
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(
            self.selected
                .iter()
                .zip(&other.selected)
                .map(|(a, b)| *a || *b)
                .collect(),
        )
    }

    /// True when every item selected here is also selected in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.selected
            .iter()
            .zip(&other.selected)
            .all(|(a, b)| !a || *b)
    }

    pub fn ids<'a, F: Scalar>(&'a self, dataset: &'a DikwDataset<F>) -> Vec<&'a str> {
        self.indices()
            .map(|i| dataset.items()[i].id.as_str())
            .collect()
    }
}
