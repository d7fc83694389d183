//! VPF-CSV: the text format for labeled feature vectors.
//!
//! ```text
//! name,layer,f0,f1,...,f{d-1}
//! S1-P2-M-14-1-N,fc6,0.25,1.5,...
//! ```
//!
//! UTF-8, LF line endings, no quoting. Every row carries the same layer tag.
//! Floats are written in their shortest round-trip decimal form, so a
//! save/load cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::{parse_sample_name, FeatureDataset, LayerTag, NameError};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("non-finite value at row {row}, column {col} (line {line})")]
    Value { row: usize, col: usize, line: usize },
    #[error("expected dimension {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("line {line}: {source}")]
    Name {
        line: usize,
        #[source]
        source: NameError,
    },
}

fn format_err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Format {
        line,
        message: message.into(),
    }
}

/// Loads a VPF-CSV file.
///
/// Rows are returned in file order. In [`LoadError::Value`], `row` is the
/// 1-based data row (the header is not counted) and `col` the 1-based
/// feature column; `line` is the physical line in the file.
pub fn load_features(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
) -> Result<FeatureDataset, LoadError> {
    let file = File::open(path)?;
    read_features(BufReader::new(file), expected_dim)
}

pub fn read_features<R: BufRead>(
    reader: R,
    expected_dim: Option<usize>,
) -> Result<FeatureDataset, LoadError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(format_err(1, "missing header")),
    };
    let dim = parse_header(&header)?;
    if let Some(expected) = expected_dim {
        if expected != dim {
            return Err(LoadError::DimMismatch {
                expected,
                found: dim,
            });
        }
    }

    let mut values = Vec::new();
    let mut meta = Vec::new();
    let mut layer: Option<LayerTag> = None;

    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let row = i + 1;
        let line = line?;
        let mut fields = line.split(',');

        let name = fields.next().unwrap_or_default();
        let sample = parse_sample_name(name).map_err(|source| LoadError::Name {
            line: line_no,
            source,
        })?;

        let tag_str = fields
            .next()
            .ok_or_else(|| format_err(line_no, "missing layer tag"))?;
        let tag: LayerTag = tag_str.parse().map_err(|e| format_err(line_no, e))?;
        match layer {
            None => layer = Some(tag),
            Some(l) if l != tag => {
                return Err(format_err(
                    line_no,
                    format!("layer tag {tag} differs from {l} on earlier rows"),
                ))
            }
            Some(_) => {}
        }

        let mut count = 0;
        for (j, tok) in fields.enumerate() {
            if j >= dim {
                return Err(format_err(
                    line_no,
                    format!("row has more than {dim} feature values"),
                ));
            }
            let v: f64 = tok.parse().map_err(|_| {
                format_err(line_no, format!("column {}: not a number: {tok:?}", j + 1))
            })?;
            if !v.is_finite() {
                return Err(LoadError::Value {
                    row,
                    col: j + 1,
                    line: line_no,
                });
            }
            values.push(v);
            count += 1;
        }
        if count != dim {
            return Err(format_err(
                line_no,
                format!("row has {count} feature values, header declares {dim}"),
            ));
        }
        meta.push(sample);
    }

    let layer = layer.ok_or_else(|| format_err(2, "no data rows"))?;
    let features = Array2::from_shape_vec((meta.len(), dim), values)
        .expect("row widths were checked while reading");
    FeatureDataset::new(features, meta, layer).map_err(|e| format_err(0, e.to_string()))
}

fn parse_header(header: &str) -> Result<usize, LoadError> {
    let mut cols = header.split(',');
    if cols.next() != Some("name") || cols.next() != Some("layer") {
        return Err(format_err(1, "header must start with `name,layer`"));
    }
    let mut dim = 0;
    for (j, col) in cols.enumerate() {
        if col != format!("f{j}") {
            return Err(format_err(
                1,
                format!("header column {} should be f{j}, found {col:?}", j + 3),
            ));
        }
        dim += 1;
    }
    if dim == 0 {
        return Err(format_err(1, "header declares no feature columns"));
    }
    Ok(dim)
}

/// Writes `ds` as VPF-CSV.
pub fn write_features<W: Write>(mut out: W, ds: &FeatureDataset) -> io::Result<()> {
    write!(out, "name,layer")?;
    for j in 0..ds.dim() {
        write!(out, ",f{j}")?;
    }
    writeln!(out)?;
    let tag = ds.layer().as_str();
    for (name, row) in ds.names().zip(ds.features().rows()) {
        write!(out, "{name},{tag}")?;
        for v in row {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Writes `ds` to `path` through a temporary file in the same directory,
/// renamed into place once complete.
pub fn save_features(path: impl AsRef<Path>, ds: &FeatureDataset) -> io::Result<()> {
    crate::io::write_atomic(path.as_ref(), |w| write_features(BufWriter::new(w), ds))
}
