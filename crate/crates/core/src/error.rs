use thiserror::Error;

use crate::dikw::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("no schema entry for column \"{column}\"")]
    MissingSchemaEntry { column: String },
    #[error("row {row}: expected {expected} values, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column \"{column}\": cannot parse \"{value}\" as {expected}")]
    Parse {
        row: usize,
        column: String,
        value: String,
        expected: String,
    },
    #[error("duplicate item id \"{0}\"")]
    DuplicateId(String),
    #[error("unsupported format_version {found} in {what} (expected 1)")]
    FormatVersion { what: String, found: i64 },
    #[error("invalid dataset: {}", join_violations(.0))]
    InvalidDataset(Vec<Violation>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("entry {index} is {value}, expected -1 or +1")]
    NotASign { index: usize, value: i8 },
    #[error("no sensitivity configured for selected numeric item \"{0}\"")]
    MissingSensitivity(String),
    #[error("label {label} not in label set of size {size}")]
    UnknownLabel { label: usize, size: usize },
    #[error("mode {0} selects no items on this dataset")]
    EmptySupport(String),
    #[error("spatial-temporal weighting requested but no item carries {0} metadata")]
    MissingMetadata(&'static str),
    #[error("{0}")]
    Degenerate(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("formula error: {0}")]
    Formula(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
