//! Finite-dimensional non-negative operators.
//!
//! Three realizations are provided: an explicit dense matrix, the 1D
//! Dirichlet Laplacian `tridiag(-1, 2, -1)/h²`, and the multiplication
//! operator `g ↦ f g` on a sampled grid. Every operator may carry a real
//! shift `ε >= 0`, in which case all actions refer to `A + ε`.
//!
//! A genuinely non-densely defined operator cannot live in finite
//! dimensions; the multiplication operator with large sampled symbol
//! values stands in for that situation.

mod expm;
mod sector;
mod spec;
mod spectral;
mod symbol;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use expm::expm;
pub use sector::{default_lambda_grid, validate_nonnegativity, SectorReport};
pub use spec::{Entry, OperatorSpec};
pub use spectral::{spectral_function_matrix, spectral_power_oracle, Eigenbasis, MAX_EIGEN_CONDITION};
pub use symbol::SymbolGrid;

pub type Vector = DVector<Complex64>;
pub type Matrix = DMatrix<Complex64>;

/// Which norm an operator's space carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Euclidean,
    /// Max norm, modelling `C_b(Ω)` on a sampled grid.
    Sup,
}

impl NormKind {
    pub fn norm(self, v: &Vector) -> f64 {
        match self {
            NormKind::Euclidean => v.norm(),
            NormKind::Sup => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    DenseMatrix(Matrix),
    Laplacian1d { n: usize, h: f64 },
    Multiplication(SymbolGrid),
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::DenseMatrix(_) => "dense_matrix",
            OperatorKind::Laplacian1d { .. } => "laplacian_1d",
            OperatorKind::Multiplication(_) => "multiplication",
        }
    }
}

/// An immutable non-negative operator.
#[derive(Debug, Clone)]
pub struct Operator {
    kind: OperatorKind,
    norm: NormKind,
    shift: f64,
    declared_m: Option<f64>,
    sampled_m: OnceLock<Option<f64>>,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.norm == other.norm
            && self.shift == other.shift
            && self.declared_m == other.declared_m
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Operator {
    fn from_kind(kind: OperatorKind, norm: NormKind) -> Self {
        Self {
            kind,
            norm,
            shift: 0.0,
            declared_m: None,
            sampled_m: OnceLock::new(),
        }
    }

    pub fn dense(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(invalid(format!(
                "dense operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("dense operator has non-finite entries"));
        }
        Ok(Self::from_kind(OperatorKind::DenseMatrix(matrix), NormKind::Euclidean))
    }

    pub fn dense_real(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(invalid("dense_real: entry count is not n*n"));
        }
        Self::dense(Matrix::from_row_iterator(n, n, row_major.iter().map(|&v| c(v))))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::dense(Matrix::identity(n, n))
    }

    pub fn laplacian_1d(n: usize, h: f64) -> Result<Self> {
        if n == 0 || !(h.is_finite() && h > 0.0) {
            return Err(invalid(format!(
                "laplacian_1d needs n >= 1 and h > 0, got n={n}, h={h}"
            )));
        }
        Ok(Self::from_kind(OperatorKind::Laplacian1d { n, h }, NormKind::Euclidean))
    }

    pub fn multiplication(symbol: SymbolGrid) -> Self {
        Self::from_kind(OperatorKind::Multiplication(symbol), NormKind::Sup)
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    /// Declares the non-negativity constant `M` instead of sampling it.
    pub fn with_nonneg_constant(mut self, m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 1.0) {
            return Err(invalid(format!("non-negativity constant must be >= 1, got {m}")));
        }
        self.declared_m = Some(m);
        self.sampled_m = OnceLock::new();
        Ok(self)
    }

    /// The operator `A + eps`.
    pub fn shifted(&self, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(invalid(format!("shift must be finite and >= 0, got {eps}")));
        }
        Ok(Self {
            kind: self.kind.clone(),
            norm: self.norm,
            shift: self.shift + eps,
            declared_m: None,
            sampled_m: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            OperatorKind::DenseMatrix(m) => m.nrows(),
            OperatorKind::Laplacian1d { n, .. } => *n,
            OperatorKind::Multiplication(sym) => sym.len(),
        }
    }

    pub fn declared_nonneg_constant(&self) -> Option<f64> {
        self.declared_m
    }

    pub fn norm_of(&self, v: &Vector) -> f64 {
        self.norm.norm(v)
    }

    /// The declared non-negativity constant, or one sampled on the default
    /// λ-grid (computed once per operator).
    pub fn nonneg_constant(&self) -> Result<f64> {
        if let Some(m) = self.declared_m {
            return Ok(m);
        }
        let sampled = self.sampled_m.get_or_init(|| {
            validate_nonnegativity(self, &default_lambda_grid())
                .ok()
                .map(|r| r.m_estimate)
        });
        sampled.ok_or(Error::NonNegativity { lambda: f64::NAN })
    }

    /// Symbol values including the shift, for the multiplication kind.
    pub fn shifted_symbol(&self) -> Option<Vec<Complex64>> {
        match &self.kind {
            OperatorKind::Multiplication(sym) => Some(sym.values().iter().map(|f| f + self.shift).collect()),
            _ => None,
        }
    }

    /// Dense matrix of `A + shift`.
    pub fn to_dense(&self) -> Matrix {
        let n = self.dim();
        let mut m = match &self.kind {
            OperatorKind::DenseMatrix(m) => m.clone(),
            OperatorKind::Laplacian1d { n, h } => {
                let inv_h2 = 1.0 / (h * h);
                let mut m = Matrix::zeros(*n, *n);
                for i in 0..*n {
                    m[(i, i)] = c(2.0 * inv_h2);
                    if i + 1 < *n {
                        m[(i, i + 1)] = c(-inv_h2);
                        m[(i + 1, i)] = c(-inv_h2);
                    }
                }
                m
            }
            OperatorKind::Multiplication(sym) => Matrix::from_diagonal(&Vector::from_row_slice(sym.values())),
        };
        if self.shift != 0.0 {
            for i in 0..n {
                m[(i, i)] += c(self.shift);
            }
        }
        m
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `A x`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        let mut y = match &self.kind {
            OperatorKind::DenseMatrix(m) => m * x,
            OperatorKind::Laplacian1d { n, h } => {
                let inv_h2 = 1.0 / (h * h);
                Vector::from_fn(*n, |i, _| {
                    let left = if i > 0 { x[i - 1] } else { c(0.0) };
                    let right = if i + 1 < *n { x[i + 1] } else { c(0.0) };
                    (2.0 * x[i] - left - right) * inv_h2
                })
            }
            OperatorKind::Multiplication(sym) => {
                Vector::from_iterator(x.len(), sym.values().iter().zip(x.iter()).map(|(f, g)| f * g))
            }
        };
        if self.shift != 0.0 {
            y.axpy(c(self.shift), x, c(1.0));
        }
        if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("apply"));
        }
        Ok(y)
    }

    /// Solves `(lambda + A) x = y`.
    pub fn resolve(&self, lambda: Complex64, y: &Vector) -> Result<Vector> {
        self.check_dim(y)?;
        let mu = lambda + self.shift;
        let x = match &self.kind {
            OperatorKind::Multiplication(sym) => {
                let mut x = y.clone();
                for (xi, f) in x.iter_mut().zip(sym.values()) {
                    let d = mu + f;
                    if d == c(0.0) {
                        return Err(Error::Singular { lambda });
                    }
                    *xi /= d;
                }
                x
            }
            OperatorKind::Laplacian1d { n, h } => thomas_laplacian(*n, *h, mu, y).ok_or(Error::Singular { lambda })?,
            OperatorKind::DenseMatrix(m) => {
                let mut shifted = m.clone();
                for i in 0..shifted.nrows() {
                    shifted[(i, i)] += mu;
                }
                dense_solve(&shifted, y).ok_or(Error::Singular { lambda })?
            }
        };
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Singular { lambda });
        }
        Ok(x)
    }

    /// `T(r) x = e^{-rA} x`.
    pub fn semigroup(&self, r: f64, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid(format!("semigroup time must be finite and >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(x.clone());
        }
        let y = match &self.kind {
            OperatorKind::Multiplication(sym) => Vector::from_iterator(
                x.len(),
                sym.values()
                    .iter()
                    .zip(x.iter())
                    .map(|(f, g)| (-(f + self.shift) * r).exp() * g),
            ),
            _ => self.semigroup_matrix(r) * x,
        };
        if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("semigroup"));
        }
        Ok(y)
    }

    /// `(T(r) - I) x`, computed without the cancellation of subtracting `x`
    /// when `r‖A‖` is small.
    pub fn semigroup_increment(&self, r: f64, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid(format!("semigroup time must be finite and >= 0, got {r}")));
        }
        let y = match &self.kind {
            OperatorKind::Multiplication(sym) => Vector::from_iterator(
                x.len(),
                sym.values()
                    .iter()
                    .zip(x.iter())
                    .map(|(f, g)| exp_m1(-(f + self.shift) * r) * g),
            ),
            _ => {
                let a = self.to_dense();
                let n = a.nrows();
                let size = r * a.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
                if size > 1.0 {
                    self.semigroup_matrix(r) * x - x
                } else {
                    // exp([[B, Bx], [0, 0]]) has (e^B - I)x in its last column
                    let b = &a * c(-r);
                    let mut aug = Matrix::zeros(n + 1, n + 1);
                    aug.view_mut((0, 0), (n, n)).copy_from(&b);
                    aug.view_mut((0, n), (n, 1)).copy_from(&(&b * x));
                    expm(&aug).column(n).rows(0, n).into_owned()
                }
            }
        };
        if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("semigroup"));
        }
        Ok(y)
    }

    /// `e^{-rA}` as a dense matrix.
    pub fn semigroup_matrix(&self, r: f64) -> Matrix {
        match &self.kind {
            OperatorKind::Multiplication(sym) => Matrix::from_diagonal(&Vector::from_iterator(
                sym.len(),
                sym.values().iter().map(|f| (-(f + self.shift) * r).exp()),
            )),
            OperatorKind::DenseMatrix(m) => expm(&(m * c(-r))) * c((-self.shift * r).exp()),
            OperatorKind::Laplacian1d { .. } => {
                let base = Operator::from_kind(self.kind.clone(), self.norm);
                expm(&(base.to_dense() * c(-r))) * c((-self.shift * r).exp())
            }
        }
    }
}

// e^w - 1 without cancellation for small |w|.
fn exp_m1(w: Complex64) -> Complex64 {
    if w.norm() > 0.5 {
        return w.exp() - 1.0;
    }
    let half_sin = (w.im / 2.0).sin();
    Complex64::new(
        w.re.exp_m1() * w.im.cos() - 2.0 * half_sin * half_sin,
        w.re.exp() * w.im.sin(),
    )
}

// Diagonally dominant for Re mu >= 0, so no pivoting is needed.
fn thomas_laplacian(n: usize, h: f64, mu: Complex64, y: &Vector) -> Option<Vector> {
    let inv_h2 = 1.0 / (h * h);
    let diag = mu + 2.0 * inv_h2;
    let off = c(-inv_h2);
    let mut c_prime = vec![c(0.0); n];
    let mut d_prime = vec![c(0.0); n];
    let mut denom = diag;
    if denom == c(0.0) {
        return None;
    }
    c_prime[0] = off / denom;
    d_prime[0] = y[0] / denom;
    for i in 1..n {
        denom = diag - off * c_prime[i - 1];
        if denom == c(0.0) {
            return None;
        }
        c_prime[i] = off / denom;
        d_prime[i] = (y[i] - off * d_prime[i - 1]) / denom;
    }
    let mut x = Vector::zeros(n);
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Some(x)
}

// LU solve with one step of iterative refinement when the residual exceeds
// 1e-10 ||y||.
fn dense_solve(m: &Matrix, y: &Vector) -> Option<Vector> {
    let lu = m.clone().lu();
    let mut x = lu.solve(y)?;
    let scale = y.norm();
    let residual = y - m * &x;
    if residual.norm() > 1e-10 * scale {
        x += lu.solve(&residual)?;
        if (y - m * &x).norm() > 1e-10 * scale {
            return None;
        }
    }
    Some(x)
}
