//! Paired CSV loader and writer.
//!
//! Features and labels live in two UTF-8 CSV files with header rows and
//! "." as the decimal separator. The writer emits the shortest decimal
//! representation that round-trips each f64, so write-then-load is
//! bit-exact.

use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};

/// Load a dataset from a feature CSV and a binary label CSV with matching
/// row counts.
pub fn load_csv(features_path: &Path, labels_path: &Path) -> Result<MultiLabelDataset> {
    let (feature_names, feature_rows) = read_table(features_path, |cell, line| {
        let value: f64 = cell
            .parse()
            .map_err(|_| parse_err(features_path, line, format!("non-numeric feature '{cell}'")))?;
        if !value.is_finite() {
            return Err(parse_err(
                features_path,
                line,
                format!("non-finite feature '{cell}'"),
            ));
        }
        Ok(value)
    })?;
    let (label_names, label_rows) = read_table(labels_path, |cell, line| match cell {
        "0" => Ok(0u8),
        "1" => Ok(1u8),
        other => Err(parse_err(
            labels_path,
            line,
            format!("non-binary label '{other}'"),
        )),
    })?;
    if feature_rows.len() != label_rows.len() {
        return Err(Error::Shape(format!(
            "feature rows ({}) != label rows ({})",
            feature_rows.len(),
            label_rows.len()
        )));
    }
    if feature_rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = to_matrix(feature_rows, feature_names.len());
    let labels = to_matrix(label_rows, label_names.len());
    MultiLabelDataset::new(features, labels, feature_names, label_names)
}

/// Write a dataset back to paired feature/label CSV files.
pub fn write_csv(
    dataset: &MultiLabelDataset,
    features_path: &Path,
    labels_path: &Path,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(features_path)?;
    writer.write_record(dataset.feature_names())?;
    for row in dataset.features().rows() {
        // `{}` on f64 is the shortest representation that parses back to
        // the identical bits.
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: PathBuf::from(features_path),
        source,
    })?;

    let mut writer = csv::Writer::from_path(labels_path)?;
    writer.write_record(dataset.label_names())?;
    for row in dataset.labels().rows() {
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: PathBuf::from(labels_path),
        source,
    })
}

fn read_table<T, F>(path: &Path, mut parse: F) -> Result<(Vec<String>, Vec<Vec<T>>)>
where
    F: FnMut(&str, usize) -> Result<T>,
{
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: PathBuf::from(path),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Csv(e),
        })?;
    let names: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?; // ragged rows surface here
        let line = idx + 2; // 1-based, after the header
        let row: Vec<T> = record
            .iter()
            .map(|cell| parse(cell.trim(), line))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

fn to_matrix<T: Clone + Default>(rows: Vec<Vec<T>>, width: usize) -> Array2<T> {
    let n = rows.len();
    Array2::from_shape_vec((n, width), rows.into_iter().flatten().collect())
        .expect("csv reader enforces uniform widths")
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    }
}
