//! JSON description of an operator.
//!
//! ```json
//! {"kind": "dense_matrix", "matrix": [[[2, 0], [1, 0]], [[0, 0], 3]]}
//! {"kind": "laplacian_1d", "n": 8, "h": 1.0}
//! {"kind": "multiplication", "symbol": [[1, 0], [0, 1]], "sector_angle": 1.5707963267948966}
//! ```
//!
//! Entries are `[re, im]` pairs or plain reals. Optional on every kind:
//! `"norm"` (`"euclidean"` or `"sup"`), `"m_estimate"` (a declared
//! non-negativity constant) and `"shift"` (ε >= 0, describing `A + ε`).

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Matrix, NormKind, Operator, OperatorKind, SymbolGrid};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

impl From<Complex64> for Entry {
    fn from(z: Complex64) -> Self {
        Entry::Pair([z.re, z.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    DenseMatrix {
        matrix: Vec<Vec<Entry>>,
    },
    #[serde(rename = "laplacian_1d")]
    Laplacian1d {
        n: usize,
        h: f64,
    },
    Multiplication {
        symbol: Vec<Entry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sector_angle: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(flatten)]
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl OperatorSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("operator spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("operator spec serializes")
    }

    pub fn build(&self) -> Result<Operator> {
        let mut op = match &self.payload {
            Payload::DenseMatrix { matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(invalid("dense matrix rows must all have length equal to the row count"));
                }
                Operator::dense(Matrix::from_fn(n, n, |i, j| matrix[i][j].into()))?
            }
            Payload::Laplacian1d { n, h } => Operator::laplacian_1d(*n, *h)?,
            Payload::Multiplication {
                symbol,
                points,
                sector_angle,
            } => {
                let values: Vec<Complex64> = symbol.iter().map(|&e| e.into()).collect();
                let points = points
                    .clone()
                    .unwrap_or_else(|| (0..values.len()).map(|i| i as f64).collect());
                let grid = match sector_angle {
                    Some(theta) => SymbolGrid::new(points, values, *theta)?,
                    None => {
                        let tight = SymbolGrid::from_values(values)?;
                        SymbolGrid::new(points, tight.values().to_vec(), tight.sector_angle())?
                    }
                };
                Operator::multiplication(grid)
            }
        };
        if let Some(norm) = self.norm {
            op = op.with_norm(norm);
        }
        if let Some(eps) = self.shift {
            op = op.shifted(eps)?;
        }
        if let Some(m) = self.m_estimate {
            op = op.with_nonneg_constant(m)?;
        }
        Ok(op)
    }

    pub fn describe(op: &Operator) -> Self {
        let payload = match op.kind() {
            OperatorKind::DenseMatrix(m) => Payload::DenseMatrix {
                matrix: m
                    .row_iter()
                    .map(|row| row.iter().map(|&z| z.into()).collect())
                    .collect(),
            },
            OperatorKind::Laplacian1d { n, h } => Payload::Laplacian1d { n: *n, h: *h },
            OperatorKind::Multiplication(sym) => Payload::Multiplication {
                symbol: sym.values().iter().map(|&z| z.into()).collect(),
                points: Some(sym.points().to_vec()),
                sector_angle: Some(sym.sector_angle().min(FRAC_PI_2)),
            },
        };
        Self {
            payload,
            norm: Some(op.norm_kind()),
            m_estimate: op.declared_nonneg_constant(),
            shift: (op.shift() != 0.0).then_some(op.shift()),
        }
    }
}
