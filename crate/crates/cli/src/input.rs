//! Parsing of operators, orders and vectors from command-line arguments.

use std::path::Path;

use fracpow::catalog;
use fracpow::operator::Entry;
use fracpow::{Error, FractionalOrder, Operator, OperatorSpec, Vector};
use num_complex::Complex64;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_numerical() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

pub fn parse_order(text: &str) -> Result<FractionalOrder, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let number = |s: &str| s.parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    let alpha = match parts.as_slice() {
        [re] => Complex64::new(number(re)?, 0.0),
        [re, im] => Complex64::new(number(re)?, number(im)?),
        _ => return Err("expected `re` or `re,im`".into()),
    };
    FractionalOrder::new(alpha).map_err(|e| e.to_string())
}

pub fn parse_positive(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// An operator file, or a catalog name when no such file exists.
pub fn load_operator(arg: &str) -> Result<Operator, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {arg}: {e}")))?;
        return Ok(OperatorSpec::from_json(&text)?.build()?);
    }
    catalog::shipped(arg).map_err(|_| {
        CliError::usage(format!(
            "'{arg}' is neither a readable file nor a built-in operator ({})",
            catalog::SHIPPED.join(", ")
        ))
    })
}

/// A vector from a file or inline text; all ones when absent.
pub fn load_vector(arg: Option<&str>, dim: usize) -> Result<Vector, CliError> {
    let Some(arg) = arg else {
        return Ok(Vector::from_element(dim, Complex64::new(1.0, 0.0)));
    };
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::usage(format!("cannot read {arg}: {e}")))?
    } else {
        arg.to_string()
    };
    let trimmed = text.trim();
    let json = if trimmed.starts_with('[') {
        trimmed.to_string()
    } else {
        format!("[{trimmed}]")
    };
    let entries: Vec<Entry> = serde_json::from_str(&json).map_err(|e| CliError::usage(format!("vector: {e}")))?;
    if entries.len() != dim {
        return Err(CliError::usage(format!(
            "vector has {} entries, operator has dimension {dim}",
            entries.len()
        )));
    }
    Ok(Vector::from_iterator(dim, entries.into_iter().map(Complex64::from)))
}
