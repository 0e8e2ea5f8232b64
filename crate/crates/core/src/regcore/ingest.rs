//! Loading datasets from delimiter-separated text files.
//!
//! The header row is optional; one column is designated as the response by
//! name or 1-based index and every other column becomes a regressor in file
//! order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regcore::Dataset;

/// A parsed dataset together with its column labels.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub regressor_names: Vec<String>,
    pub response_name: String,
}

/// Which file column holds the response.
#[derive(Debug, Clone)]
pub enum ResponseSelector {
    Name(String),
    /// 1-based position in the file's column order.
    Position(usize),
}

impl ResponseSelector {
    /// Accepts a plain integer as a position, anything else as a name.
    pub fn parse(raw: &str) -> ResponseSelector {
        match raw.trim().parse::<usize>() {
            Ok(ix) if ix >= 1 => ResponseSelector::Position(ix),
            _ => ResponseSelector::Name(raw.trim().to_string()),
        }
    }
}

fn split_line(line: &str, delim: Option<char>) -> Vec<String> {
    match delim {
        Some(d) => line.split(d).map(|s| s.trim().to_string()).collect(),
        None => line.split_whitespace().map(|s| s.to_string()).collect(),
    }
}

fn detect_delimiter(line: &str) -> Option<char> {
    [',', '\t', ';'].into_iter().find(|&d| line.contains(d))
}

/// Reads a delimiter-separated file into a dataset.
pub fn load_dataset(path: &Path, response: &ResponseSelector) -> Result<LoadedData> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_dataset(&text, response, path)
}

/// Parses file contents; `path` is only used in error messages.
pub fn parse_dataset(text: &str, response: &ResponseSelector, path: &Path) -> Result<LoadedData> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (first_no, first_line) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: "file contains no data".into(),
    })?;
    let delim = detect_delimiter(first_line);
    let first_fields = split_line(first_line, delim);
    let ncols = first_fields.len();
    if ncols < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: first_no,
            msg: "need at least a response and one regressor column".into(),
        });
    }

    let header_present = first_fields.iter().any(|f| f.parse::<f64>().is_err());
    let names: Vec<String> = if header_present {
        first_fields.clone()
    } else {
        (1..=ncols).map(|i| format!("x{i}")).collect()
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut parse_row = |fields: &[String], line_no: usize| -> Result<()> {
        if fields.len() != ncols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("expected {ncols} fields, found {}", fields.len()),
            });
        }
        let mut row = Vec::with_capacity(ncols);
        for f in fields {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("'{f}' is not a number"),
            })?;
            row.push(v);
        }
        rows.push(row);
        Ok(())
    };

    if !header_present {
        parse_row(&first_fields, first_no)?;
    }
    for (line_no, line) in lines {
        let fields = split_line(line, delim);
        parse_row(&fields, line_no)?;
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: first_no,
            msg: "no data rows".into(),
        });
    }

    let response_col = match response {
        ResponseSelector::Position(ix) => {
            if *ix < 1 || *ix > ncols {
                return Err(Error::Config(format!(
                    "response column {ix} out of range 1..={ncols}"
                )));
            }
            *ix - 1
        }
        ResponseSelector::Name(name) => {
            if !header_present {
                return Err(Error::Config(format!(
                    "response column '{name}' given by name but the file has no header"
                )));
            }
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Config(format!("no column named '{name}' in header")))?
        }
    };

    let n = rows.len();
    let response_vec: Vec<f64> = rows.iter().map(|r| r[response_col]).collect();
    let regressor_cols: Vec<usize> = (0..ncols).filter(|&c| c != response_col).collect();
    let design = Matrix::from_fn(n, regressor_cols.len(), |r, c| rows[r][regressor_cols[c]]);
    let dataset = Dataset::new(design, response_vec)?;
    Ok(LoadedData {
        dataset,
        regressor_names: regressor_cols.iter().map(|&c| names[c].clone()).collect(),
        response_name: names[response_col].clone(),
    })
}
