//! Data file (comma-separated, header row) plus schema sidecar (TOML).
//!
//! Data files may begin with a `# format_version: 1` line. The schema
//! sidecar looks like:
//!
//! ```toml
//! format_version = 1
//! class_label = "species"
//!
//! [[column]]
//! name = "sepal_length"
//! modal = "data"
//! category = "where"
//! kind = "numeric"
//! spatial = [0.0, 1.0]
//!
//! [[column]]
//! name = "species"
//! modal = "information"
//! category = "what"
//! kind = "categorical"
//! labels = ["setosa", "versicolor", "virginica"]
//!
//! [[purpose_edge]]
//! from = "petal_ratio"
//! to = "petal_length"
//! label = "derived_from"
//! ```

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Category, Column, DatasetParts, DikwDataset, DikwItem, Modal, PurposeEdge, ValueKind};
use crate::{Error, Result, Scalar};

const FORMAT_VERSION: i64 = 1;
const VERSION_PREFIX: &str = "# format_version:";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    format_version: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_label: Option<String>,
    #[serde(default, rename = "column")]
    columns: Vec<ColumnSpec>,
    #[serde(default, rename = "purpose_edge")]
    purpose_edges: Vec<PurposeEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Numeric,
    Categorical,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnSpec {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    modal: Modal,
    category: Category,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spatial: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp: Option<i64>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads and validates a dataset from a data file and its schema sidecar.
pub fn load_dataset<F: Scalar>(data_file: &Path, schema_file: &Path) -> Result<DikwDataset<F>> {
    parse_dataset(&read(data_file)?, &read(schema_file)?)
}

/// Parses a dataset from in-memory data and schema text.
pub fn parse_dataset<F: Scalar>(data: &str, schema: &str) -> Result<DikwDataset<F>> {
    let schema: SchemaFile =
        toml::from_str(schema).map_err(|e| Error::Schema(e.message().to_string()))?;
    if schema.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            what: "schema file".into(),
            found: schema.format_version,
        });
    }

    let body = strip_version_line(data)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();

    let by_name: HashMap<&str, &ColumnSpec> = schema
        .columns
        .iter()
        .map(|c| (c.name.as_str(), c))
        .collect();
    let header_set: HashSet<&str> = header.iter().map(String::as_str).collect();
    if header_set.len() != header.len() {
        return Err(Error::Schema("duplicate column name in header".into()));
    }

    let mut items = Vec::with_capacity(header.len());
    let mut seen_ids = HashSet::new();
    for name in &header {
        let spec = by_name
            .get(name.as_str())
            .ok_or_else(|| Error::MissingSchemaEntry {
                column: name.clone(),
            })?;
        let id = spec.id.clone().unwrap_or_else(|| spec.name.clone());
        if !seen_ids.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        let kind = match spec.kind {
            KindTag::Numeric => ValueKind::Numeric,
            KindTag::Categorical => ValueKind::Categorical {
                labels: spec.labels.clone().ok_or_else(|| {
                    Error::Schema(format!("categorical column \"{name}\" declares no labels"))
                })?,
            },
        };
        items.push(DikwItem {
            id,
            name: spec.name.clone(),
            modal: spec.modal,
            category: spec.category,
            kind,
            spatial: spec.spatial.map(|[x, y]| [F::lit(x), F::lit(y)]),
            timestamp: spec.timestamp,
        });
    }

    if let Some(extra) = schema
        .columns
        .iter()
        .find(|c| !header_set.contains(c.name.as_str()))
    {
        return Err(Error::Schema(format!(
            "schema column \"{}\" is not present in the data header",
            extra.name
        )));
    }

    let lookups: Vec<Option<HashMap<&str, usize>>> = items
        .iter()
        .map(|i| {
            i.kind.labels().map(|ls| {
                ls.iter()
                    .enumerate()
                    .map(|(k, l)| (l.as_str(), k))
                    .collect()
            })
        })
        .collect();
    let mut columns: Vec<Column<F>> = items
        .iter()
        .map(|i| match i.kind {
            ValueKind::Numeric => Column::Numeric(Vec::new()),
            ValueKind::Categorical { .. } => Column::Categorical(Vec::new()),
        })
        .collect();

    let line_offset = usize::from(body.len() != data.len());
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema(format!("malformed data: {e}")))?;
        let row = record
            .position()
            .map_or(0, |p| p.line() as usize + line_offset);
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (j, raw) in record.iter().enumerate() {
            let parse_err = |expected: &str| Error::Parse {
                row,
                column: header[j].clone(),
                value: raw.to_string(),
                expected: expected.to_string(),
            };
            match (&mut columns[j], &lookups[j]) {
                (Column::Numeric(v), _) => {
                    let x: F = raw.parse().map_err(|_| parse_err("number"))?;
                    if !x.is_finite() {
                        return Err(parse_err("finite number"));
                    }
                    v.push(x);
                }
                (Column::Categorical(v), Some(lookup)) => {
                    let k = lookup.get(raw).ok_or_else(|| parse_err("declared label"))?;
                    v.push(*k);
                }
                (Column::Categorical(_), None) => unreachable!("categorical items carry labels"),
            }
        }
    }

    DikwDataset::from_parts(DatasetParts {
        items,
        columns,
        purpose_edges: schema.purpose_edges,
        class_label: schema.class_label,
    })
}

fn strip_version_line(data: &str) -> Result<&str> {
    let Some(first) = data.lines().next() else {
        return Ok(data);
    };
    let Some(rest) = first.trim().strip_prefix(VERSION_PREFIX) else {
        return Ok(data);
    };
    let found: i64 = rest
        .trim()
        .parse()
        .map_err(|_| Error::Schema(format!("bad data version line \"{first}\"")))?;
    if found != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            what: "data file".into(),
            found,
        });
    }
    Ok(data[first.len()..].trim_start_matches(['\r', '\n']))
}

/// Serializes records as a versioned comma-separated table.
pub fn to_csv_string<F: Scalar>(dataset: &DikwDataset<F>) -> String {
    let mut out = format!("{VERSION_PREFIX} {FORMAT_VERSION}\n");
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(dataset.items().iter().map(|i| i.name.as_str()))
        .expect("in-memory write");
    for r in 0..dataset.record_count() {
        let row: Vec<String> = dataset
            .items()
            .iter()
            .zip(dataset.columns())
            .map(|(item, col)| match col {
                Column::Numeric(v) => v[r].to_string(),
                Column::Categorical(v) => item.kind.labels().expect("categorical")[v[r]].clone(),
            })
            .collect();
        w.write_record(&row).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 input"));
    out
}

/// Serializes the schema sidecar for `dataset`.
pub fn schema_to_string<F: Scalar>(dataset: &DikwDataset<F>) -> String {
    let schema = SchemaFile {
        format_version: FORMAT_VERSION,
        class_label: dataset.class_label().map(str::to_string),
        columns: dataset
            .items()
            .iter()
            .map(|i| ColumnSpec {
                name: i.name.clone(),
                id: (i.id != i.name).then(|| i.id.clone()),
                modal: i.modal,
                category: i.category,
                kind: if i.kind.is_numeric() {
                    KindTag::Numeric
                } else {
                    KindTag::Categorical
                },
                labels: i.kind.labels().map(<[String]>::to_vec),
                spatial: i.spatial.map(|[x, y]| [x.as_f64(), y.as_f64()]),
                timestamp: i.timestamp,
            })
            .collect(),
        purpose_edges: dataset.purpose_edges().to_vec(),
    };
    toml::to_string(&schema).expect("schema is serializable")
}

/// Writes the data file and schema sidecar pair.
pub fn write_dataset<F: Scalar>(
    dataset: &DikwDataset<F>,
    data_file: &Path,
    schema_file: &Path,
) -> Result<()> {
    let write = |path: &Path, text: String| {
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write(data_file, to_csv_string(dataset))?;
    write(schema_file, schema_to_string(dataset))
}
