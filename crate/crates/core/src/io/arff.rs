//! ARFF loader for Mulan-style datasets: dense data rows, numeric feature
//! attributes and binary nominal label attributes named by a companion XML
//! file.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use regex::Regex;

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Attribute {
    name: String,
    kind: AttributeKind,
    line: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
    Other(String),
}

/// Load an ARFF dataset whose label columns are named by a Mulan label XML
/// file. Label attributes must be nominal over {0, 1}; every remaining
/// attribute must be numeric and becomes a feature.
pub fn load_mulan(arff_path: &Path, xml_path: &Path) -> Result<MultiLabelDataset> {
    let label_names = parse_label_xml(xml_path)?;
    let text = read(arff_path)?;

    let mut attributes: Vec<Attribute> = Vec::new();
    let mut data_start = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        }
        if lower.starts_with("@attribute") {
            attributes.push(parse_attribute(arff_path, idx + 1, line)?);
        } else if lower.starts_with("@data") {
            data_start = Some(idx + 1);
            break;
        } else {
            return Err(parse_err(arff_path, idx + 1, format!("unexpected header line: {line}")));
        }
    }
    let data_start = data_start
        .ok_or_else(|| parse_err(arff_path, 0, "missing @data section".into()))?;

    // Map XML label names onto header columns.
    let mut label_cols = Vec::with_capacity(label_names.len());
    for name in &label_names {
        let col = attributes
            .iter()
            .position(|a| a.name == *name)
            .ok_or_else(|| {
                parse_err(
                    arff_path,
                    0,
                    format!("label attribute '{name}' from XML absent from ARFF header"),
                )
            })?;
        validate_label_attribute(arff_path, &attributes[col])?;
        label_cols.push(col);
    }
    let feature_cols: Vec<usize> = (0..attributes.len())
        .filter(|c| !label_cols.contains(c))
        .collect();
    for &c in &feature_cols {
        if attributes[c].kind != AttributeKind::Numeric {
            return Err(parse_err(
                arff_path,
                attributes[c].line,
                format!("non-numeric feature attribute '{}'", attributes[c].name),
            ));
        }
    }

    let mut feature_rows: Vec<Vec<f64>> = Vec::new();
    let mut label_rows: Vec<Vec<u8>> = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(data_start) {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('{') {
            return Err(parse_err(
                arff_path,
                line_no,
                "sparse ARFF rows are not supported".into(),
            ));
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != attributes.len() {
            return Err(parse_err(
                arff_path,
                line_no,
                format!(
                    "row has {} values, header declares {} attributes",
                    cells.len(),
                    attributes.len()
                ),
            ));
        }
        let mut features = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let value: f64 = unquote(cells[c]).parse().map_err(|_| {
                parse_err(
                    arff_path,
                    line_no,
                    format!(
                        "non-numeric value '{}' for feature attribute '{}'",
                        cells[c], attributes[c].name
                    ),
                )
            })?;
            if !value.is_finite() {
                return Err(parse_err(
                    arff_path,
                    line_no,
                    format!("non-finite value for feature attribute '{}'", attributes[c].name),
                ));
            }
            features.push(value);
        }
        let mut labels = Vec::with_capacity(label_cols.len());
        for &c in &label_cols {
            labels.push(parse_label_bit(arff_path, line_no, &attributes[c].name, cells[c])?);
        }
        feature_rows.push(features);
        label_rows.push(labels);
    }
    if feature_rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let n = feature_rows.len();
    let features = Array2::from_shape_vec(
        (n, feature_cols.len()),
        feature_rows.into_iter().flatten().collect(),
    )
    .expect("row widths validated above");
    let labels = Array2::from_shape_vec(
        (n, label_cols.len()),
        label_rows.into_iter().flatten().collect(),
    )
    .expect("row widths validated above");
    let feature_names = feature_cols
        .iter()
        .map(|&c| attributes[c].name.clone())
        .collect();
    MultiLabelDataset::new(features, labels, feature_names, label_names)
}

fn parse_attribute(path: &Path, line: usize, text: &str) -> Result<Attribute> {
    let rest = text["@attribute".len()..].trim_start();
    let (name, remainder) = take_name(rest)
        .ok_or_else(|| parse_err(path, line, "malformed @attribute line".into()))?;
    let spec = remainder.trim();
    let kind = if spec.starts_with('{') {
        let inner = spec
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| parse_err(path, line, "unterminated nominal value list".into()))?;
        AttributeKind::Nominal(
            inner
                .split(',')
                .map(|v| unquote(v.trim()).to_string())
                .collect(),
        )
    } else {
        match spec.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => AttributeKind::Numeric,
            other => AttributeKind::Other(other.to_string()),
        }
    };
    Ok(Attribute {
        name: name.to_string(),
        kind,
        line,
    })
}

/// Attribute names may be quoted with single or double quotes.
fn take_name(text: &str) -> Option<(&str, &str)> {
    let mut chars = text.chars();
    match chars.next()? {
        quote @ ('\'' | '"') => {
            let rest = &text[1..];
            let end = rest.find(quote)?;
            Some((&rest[..end], &rest[end + 1..]))
        }
        _ => {
            let end = text.find(char::is_whitespace)?;
            Some((&text[..end], &text[end..]))
        }
    }
}

fn unquote(value: &str) -> &str {
    let v = value.trim();
    if v.len() >= 2
        && ((v.starts_with('\'') && v.ends_with('\'')) || (v.starts_with('"') && v.ends_with('"')))
    {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn validate_label_attribute(path: &Path, attribute: &Attribute) -> Result<()> {
    match &attribute.kind {
        AttributeKind::Nominal(values) => {
            let mut sorted: Vec<&str> = values.iter().map(String::as_str).collect();
            sorted.sort_unstable();
            if sorted == ["0", "1"] || sorted == ["0"] || sorted == ["1"] {
                Ok(())
            } else {
                Err(parse_err(
                    path,
                    attribute.line,
                    format!(
                        "label attribute '{}' must be nominal over {{0,1}}, got {{{}}}",
                        attribute.name,
                        values.join(",")
                    ),
                ))
            }
        }
        _ => Err(parse_err(
            path,
            attribute.line,
            format!("label attribute '{}' is not nominal", attribute.name),
        )),
    }
}

fn parse_label_bit(path: &Path, line: usize, attribute: &str, cell: &str) -> Result<u8> {
    match unquote(cell) {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(parse_err(
            path,
            line,
            format!("non-binary value '{other}' for label attribute '{attribute}'"),
        )),
    }
}

/// Extract label attribute names from a Mulan label XML file.
fn parse_label_xml(path: &Path) -> Result<Vec<String>> {
    let text = read(path)?;
    let pattern = Regex::new(r#"<label\s+name\s*=\s*(?:"([^"]*)"|'([^']*)')"#)
        .expect("static pattern");
    let names: Vec<String> = pattern
        .captures_iter(&text)
        .map(|cap| {
            let raw = cap.get(1).or_else(|| cap.get(2)).expect("alternation").as_str();
            xml_unescape(raw)
        })
        .collect();
    if names.is_empty() {
        return Err(parse_err(path, 0, "no <label name=...> entries found".into()));
    }
    Ok(names)
}

fn xml_unescape(text: &str) -> String {
    text.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    }
}
