//! Dataset files: JSON carrying both data tables and, optionally, the
//! benefit vector.
//!
//! ```json
//! {
//!   "m": 2,
//!   "n": 3,
//!   "experimental": {"counts": [[52, 512, 36], [329, 58, 213]]},
//!   "observational": {"probs": [["14/1200", "0.7775", "6/1200"],
//!                               ["121/1200", "65/1200", "61/1200"]]},
//!   "benefit_vector": [0, 1, 1, -1, 0, 1, -1, -1, 0]
//! }
//! ```
//!
//! Tables are `m` rows (treatments) by `n` columns (outcomes). A table is
//! given either as nonnegative integer `counts` (experimental rows normalize
//! per row, observational cells by the grand total) or as exact `probs`.
//! Probabilities and benefit coefficients accept `p/q` strings, decimal
//! strings, and plain JSON numbers; all parse exactly, never through a
//! float.

use crate::model::{
    BenefitFunction, ExperimentalDistribution, ModelError, ObservationalDistribution,
};
use crate::rational::{parse_rational, Rational};
use serde_json::Value;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("{location}: {message}")]
    Schema { location: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn schema_error(location: impl Into<String>, message: impl Into<String>) -> DatasetError {
    DatasetError::Schema {
        location: location.into(),
        message: message.into(),
    }
}

/// A parsed dataset: both tables, plus the benefit function when the file
/// carries a vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub exp: ExperimentalDistribution,
    pub obs: ObservationalDistribution,
    pub benefit: Option<BenefitFunction>,
}

impl Dataset {
    /// The benefit function, or a schema error naming the missing field.
    pub fn benefit_function(&self) -> Result<&BenefitFunction, DatasetError> {
        self.benefit
            .as_ref()
            .ok_or_else(|| schema_error("benefit_vector", "field is required by this command"))
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_dataset(&text)
}

pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| DatasetError::Syntax(e.to_string()))?;
    let root = root
        .as_object()
        .ok_or_else(|| schema_error("$", "top level must be a JSON object"))?;

    let m = required_usize(root, "m")?;
    let n = required_usize(root, "n")?;

    let exp_value = root
        .get("experimental")
        .ok_or_else(|| schema_error("experimental", "missing table"))?;
    let exp = match parse_table(exp_value, "experimental", m, n)? {
        Table::Counts(counts) => ExperimentalDistribution::from_counts(&counts)?,
        Table::Probs(rows) => ExperimentalDistribution::new(rows)?,
    };

    let obs_value = root
        .get("observational")
        .ok_or_else(|| schema_error("observational", "missing table"))?;
    let obs = match parse_table(obs_value, "observational", m, n)? {
        Table::Counts(counts) => ObservationalDistribution::from_counts(&counts)?,
        Table::Probs(rows) => ObservationalDistribution::new(rows)?,
    };

    let benefit = match root.get("benefit_vector") {
        None | Some(Value::Null) => None,
        Some(value) => {
            let entries = value
                .as_array()
                .ok_or_else(|| schema_error("benefit_vector", "must be an array"))?;
            let coefficients = entries
                .iter()
                .enumerate()
                .map(|(k, v)| rational_value(v, &format!("benefit_vector[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Some(BenefitFunction::from_vector(m, n, coefficients)?)
        }
    };

    Ok(Dataset { exp, obs, benefit })
}

enum Table {
    Counts(Vec<Vec<u64>>),
    Probs(Vec<Vec<Rational>>),
}

fn parse_table(value: &Value, location: &str, m: usize, n: usize) -> Result<Table, DatasetError> {
    let object = value
        .as_object()
        .ok_or_else(|| schema_error(location, "must be an object"))?;
    match (object.get("counts"), object.get("probs")) {
        (Some(_), Some(_)) => Err(schema_error(
            location,
            "give either \"counts\" or \"probs\", not both",
        )),
        (None, None) => Err(schema_error(
            location,
            "needs a \"counts\" or \"probs\" grid",
        )),
        (Some(counts), None) => {
            let rows = grid(counts, &format!("{location}.counts"), m, n, |v, at| {
                count_value(v, at)
            })?;
            Ok(Table::Counts(rows))
        }
        (None, Some(probs)) => {
            let rows = grid(probs, &format!("{location}.probs"), m, n, |v, at| {
                rational_value(v, at)
            })?;
            Ok(Table::Probs(rows))
        }
    }
}

fn grid<T>(
    value: &Value,
    location: &str,
    m: usize,
    n: usize,
    parse: impl Fn(&Value, &str) -> Result<T, DatasetError>,
) -> Result<Vec<Vec<T>>, DatasetError> {
    let rows = value
        .as_array()
        .ok_or_else(|| schema_error(location, "must be an array of rows"))?;
    if rows.len() != m {
        return Err(schema_error(
            location,
            format!("expected {m} treatment rows, found {}", rows.len()),
        ));
    }
    rows.iter()
        .enumerate()
        .map(|(j, row)| {
            let at = format!("{location}[{j}]");
            let cells = row
                .as_array()
                .ok_or_else(|| schema_error(&at, "must be an array"))?;
            if cells.len() != n {
                return Err(schema_error(
                    &at,
                    format!("expected {n} outcome entries, found {}", cells.len()),
                ));
            }
            cells
                .iter()
                .enumerate()
                .map(|(i, cell)| parse(cell, &format!("{at}[{i}]")))
                .collect()
        })
        .collect()
}

fn required_usize(
    object: &serde_json::Map<String, Value>,
    key: &str,
) -> Result<usize, DatasetError> {
    let value = object
        .get(key)
        .ok_or_else(|| schema_error(key, "missing field"))?;
    value
        .as_u64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| schema_error(key, "must be a nonnegative integer"))
}

fn count_value(value: &Value, location: &str) -> Result<u64, DatasetError> {
    match value {
        Value::Number(number) => number
            .to_string()
            .parse::<u64>()
            .map_err(|_| schema_error(location, "counts must be nonnegative integers")),
        _ => Err(schema_error(location, "counts must be JSON integers")),
    }
}

fn rational_value(value: &Value, location: &str) -> Result<Rational, DatasetError> {
    let text = match value {
        Value::Number(number) => number.to_string(),
        Value::String(text) => text.clone(),
        _ => {
            return Err(schema_error(
                location,
                "must be a number or a rational string",
            ))
        }
    };
    parse_rational(&text).map_err(|e| schema_error(location, e.to_string()))
}
