use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{Matrix, NormKind, Operator, OperatorKind};
use crate::error::{invalid, Error, Result};

/// Sampled resolvent norms `‖λ(λ+A)^{-1}‖` over a λ-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub sampled_lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    /// Largest sampled norm.
    pub sampled_max: f64,
    /// `max(sampled_max, 1)`: the supremum over all λ > 0 is never below 1,
    /// because `λ(λ+A)^{-1} → I` as `λ → ∞`.
    pub m_estimate: f64,
    pub note: String,
}

/// 40 log-spaced points in `[1e-4, 1e4]`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..40).map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 39.0)).collect()
}

fn induced_norm(m: &Matrix, norm: NormKind) -> f64 {
    match norm {
        NormKind::Euclidean => m.clone().singular_values().max(),
        NormKind::Sup => m
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max),
    }
}

fn resolvent_norm(op: &Operator, lambda: f64) -> Result<f64> {
    let fail = Error::NonNegativity { lambda };
    if let OperatorKind::Multiplication(sym) = op.kind() {
        // diagonal: both induced norms reduce to the largest entry
        let mut worst = 0.0f64;
        for f in sym.values() {
            let d = lambda + op.shift() + f;
            if d.norm() == 0.0 {
                return Err(fail);
            }
            worst = worst.max(lambda / d.norm());
        }
        return Ok(worst);
    }
    let n = op.dim();
    let mut shifted = op.to_dense();
    for i in 0..n {
        shifted[(i, i)] += Complex64::new(lambda, 0.0);
    }
    let inv = shifted.lu().try_inverse().ok_or(fail.clone())?;
    let scaled: DMatrix<Complex64> = inv * Complex64::new(lambda, 0.0);
    let value = induced_norm(&scaled, op.norm_kind());
    if value.is_finite() {
        Ok(value)
    } else {
        Err(fail)
    }
}

/// Samples `‖λ(λ+A)^{-1}‖` on `lambda_grid`.
///
/// A failed resolvent at any λ is reported as [`Error::NonNegativity`].
pub fn validate_nonnegativity(op: &Operator, lambda_grid: &[f64]) -> Result<SectorReport> {
    if lambda_grid.is_empty() {
        return Err(invalid("lambda grid is empty"));
    }
    if lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(invalid("lambda grid must be strictly positive and finite"));
    }
    if op.dim() > 2000 {
        return Err(invalid(format!(
            "operator dimension {} exceeds the validation limit 2000",
            op.dim()
        )));
    }
    let norms = lambda_grid
        .par_iter()
        .map(|&l| resolvent_norm(op, l))
        .collect::<Result<Vec<f64>>>()?;
    let sampled_max = norms.iter().copied().fold(0.0, f64::max);
    let note = if sampled_max < 1.0 {
        "sampled maximum below 1; M=1 attained in the limit".to_string()
    } else {
        "sampled maximum over the lambda grid".to_string()
    };
    Ok(SectorReport {
        sampled_lambdas: lambda_grid.to_vec(),
        norms,
        sampled_max,
        m_estimate: sampled_max.max(1.0),
        note,
    })
}
