//! CSV ingestion and export.
//!
//! Format: header row, decimal feature columns, integer `label` and `group`
//! columns, comma-delimited UTF-8. Row numbers in errors count data rows from
//! 1 (the header is not counted).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, Sample};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub feature_columns: Vec<String>,
    #[serde(default = "default_label")]
    pub label_column: String,
    #[serde(default = "default_group")]
    pub group_column: String,
    pub num_groups: usize,
}

fn default_label() -> String {
    "label".into()
}

fn default_group() -> String {
    "group".into()
}

impl CsvSchema {
    /// Schema with features named `x0..x{d-1}` and the default label/group
    /// column names, as written by [`export_csv`].
    pub fn numbered(feature_dim: usize, num_groups: usize) -> Self {
        CsvSchema {
            feature_columns: (0..feature_dim).map(|i| format!("x{i}")).collect(),
            label_column: default_label(),
            group_column: default_group(),
            num_groups,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Ingest {
                row: 0,
                reason: format!("missing column `{name}`"),
            })
    };
    let feature_idx = schema
        .feature_columns
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>>>()?;
    let label_idx = column(&schema.label_column)?;
    let group_idx = column(&schema.group_column)?;

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Ingest {
            row,
            reason: e.to_string(),
        })?;
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();
        let features = feature_idx
            .iter()
            .zip(&schema.feature_columns)
            .map(|(&idx, name)| {
                let v: f64 = field(idx).parse().map_err(|_| Error::Ingest {
                    row,
                    reason: format!("non-numeric value `{}` in column `{name}`", field(idx)),
                })?;
                if !v.is_finite() {
                    return Err(Error::Ingest {
                        row,
                        reason: format!("non-finite value in column `{name}`"),
                    });
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        let label: i64 = field(label_idx).parse().map_err(|_| Error::Ingest {
            row,
            reason: format!("label `{}` is not an integer", field(label_idx)),
        })?;
        if label != 0 && label != 1 {
            return Err(Error::Ingest {
                row,
                reason: format!("label {label} is not in {{0, 1}}"),
            });
        }
        let group: i64 = field(group_idx).parse().map_err(|_| Error::Ingest {
            row,
            reason: format!("group `{}` is not an integer", field(group_idx)),
        })?;
        if group < 0 || group as usize >= schema.num_groups {
            return Err(Error::Ingest {
                row,
                reason: format!("group {group} outside 0..{}", schema.num_groups),
            });
        }
        samples.push(Sample {
            features,
            label: label as u8,
            group: group as usize,
        });
    }
    if samples.is_empty() {
        return Err(Error::Ingest {
            row: 0,
            reason: "file has no data rows".into(),
        });
    }
    Dataset::new(samples, schema.feature_columns.len(), schema.num_groups)
}

/// Writes `data` with the [`CsvSchema::numbered`] layout. Floats use the
/// shortest representation that parses back to the same value.
pub fn export_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let schema = CsvSchema::numbered(data.feature_dim(), data.num_groups());
    let mut writer = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
    let mut header = schema.feature_columns.clone();
    header.push(schema.label_column);
    header.push(schema.group_column);
    writer.write_record(&header).map_err(csv_err)?;
    for s in data.samples() {
        let mut record: Vec<String> = s.features.iter().map(|x| format!("{x:?}")).collect();
        record.push(s.label.to_string());
        record.push(s.group.to_string());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Ingest {
            row: 0,
            reason: format!("{other:?}"),
        },
    }
}
