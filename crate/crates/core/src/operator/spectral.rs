//! Eigendecomposition-based oracle for functions of an operator.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{Matrix, Operator, OperatorKind, Vector};
use crate::error::{Error, Result};
use crate::order::FractionalOrder;
use crate::special::power_or_zero;

/// Eigenbases with a larger 2-norm condition number are refused.
pub const MAX_EIGEN_CONDITION: f64 = 1e6;

// Eigenvalues below this multiple of the spectral radius count as zero.
const ZERO_EIGENVALUE: f64 = 1e-13;

/// `A = V diag(λ) V^{-1}`.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    pub values: Vec<Complex64>,
    pub vectors: Matrix,
    pub inverse: Matrix,
    pub condition: f64,
}

impl Eigenbasis {
    pub fn of(op: &Operator) -> Result<Self> {
        let a = op.to_dense();
        let n = a.nrows();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let hermitian = (&a - a.adjoint()).iter().all(|z| z.norm() <= 1e-14 * scale);
        let (mut values, vectors) = if hermitian {
            let eig = a.symmetric_eigen();
            let values = eig.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect();
            (values, eig.eigenvectors)
        } else {
            schur_eigenvectors(a)?
        };
        let radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for v in values.iter_mut() {
            if v.norm() <= ZERO_EIGENVALUE * radius {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let sv = vectors.clone().singular_values();
        let condition = sv.max() / sv.min();
        if condition.is_nan() || condition > MAX_EIGEN_CONDITION {
            return Err(Error::IllConditioned { condition });
        }
        let inverse = if hermitian {
            vectors.adjoint()
        } else {
            vectors.clone().lu().try_inverse().ok_or(Error::IllConditioned {
                condition: f64::INFINITY,
            })?
        };
        debug_assert_eq!(inverse.nrows(), n);
        Ok(Self {
            values,
            vectors,
            inverse,
            condition,
        })
    }

    /// `V diag(f(λ)) V^{-1}`.
    pub fn apply_function(&self, f: impl Fn(Complex64) -> Result<Complex64>) -> Result<Matrix> {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l)?;
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        Ok(scaled * &self.inverse)
    }
}

// Eigenvectors of the Schur factor by back substitution. A repeated
// eigenvalue with a non-zero coupling means a Jordan block.
fn schur_eigenvectors(a: Matrix) -> Result<(Vec<Complex64>, Matrix)> {
    let n = a.nrows();
    let (q, t) = Schur::new(a).unpack();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = 1e-13 * scale;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut tri = Matrix::zeros(n, n);
    for k in 0..n {
        tri[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut numer = Complex64::new(0.0, 0.0);
            for l in j + 1..=k {
                numer += t[(j, l)] * tri[(l, k)];
            }
            let denom = values[j] - values[k];
            tri[(j, k)] = if denom.norm() > tiny {
                -numer / denom
            } else if numer.norm() <= tiny {
                Complex64::new(0.0, 0.0)
            } else {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                });
            };
        }
        let norm = tri.column(k).norm();
        tri.column_mut(k).iter_mut().for_each(|z| *z /= norm);
    }
    Ok((values, q * tri))
}

/// `f(A)` as a dense matrix through an eigenbasis, or pointwise for a
/// multiplication operator.
pub fn spectral_function_matrix(op: &Operator, f: impl Fn(Complex64) -> Result<Complex64>) -> Result<Matrix> {
    if let Some(symbol) = op.shifted_symbol() {
        let diag = symbol.into_iter().map(&f).collect::<Result<Vec<_>>>()?;
        return Ok(Matrix::from_diagonal(&Vector::from_vec(diag)));
    }
    Eigenbasis::of(op)?.apply_function(f)
}

/// `A^α x = V diag(λ^α) V^{-1} x`, with `0^α = 0`.
pub fn spectral_power_oracle(op: &Operator, ord: &FractionalOrder, x: &Vector) -> Result<Vector> {
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: x.len(),
        });
    }
    let alpha = ord.alpha();
    if let OperatorKind::Multiplication(_) = op.kind() {
        let symbol = op.shifted_symbol().unwrap_or_default();
        let values = symbol
            .iter()
            .zip(x.iter())
            .map(|(f, g)| Ok(power_or_zero(*f, alpha)? * g))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Vector::from_vec(values));
    }
    Ok(spectral_function_matrix(op, |l| power_or_zero(l, alpha))? * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SymbolGrid;
    use std::f64::consts::PI;

    fn v(re: &[f64]) -> Vector {
        Vector::from_iterator(re.len(), re.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    #[test]
    fn multiplication_square_roots() {
        let op = Operator::multiplication(SymbolGrid::from_real(&[1.0, 4.0, 9.0]).unwrap());
        let ord = FractionalOrder::real(0.5).unwrap();
        let y = spectral_power_oracle(&op, &ord, &v(&[1.0, 1.0, 1.0])).unwrap();
        assert!((y - v(&[1.0, 2.0, 3.0])).norm() < 1e-15);
    }

    #[test]
    fn identity_is_fixed() {
        let op = Operator::identity(3).unwrap();
        let ord = FractionalOrder::new(Complex64::new(0.3, 0.4)).unwrap();
        let x = v(&[1.0, -2.0, 0.5]);
        assert!((spectral_power_oracle(&op, &ord, &x).unwrap() - &x).norm() < 1e-14);
    }

    #[test]
    fn laplacian_three_point() {
        // eigenpairs λ_k = 2 - 2cos(kπ/4), v_k(j) = sin(jkπ/4)/sqrt(2)
        let op = Operator::laplacian_1d(3, 1.0).unwrap();
        let ord = FractionalOrder::real(0.5).unwrap();
        let got = spectral_power_oracle(&op, &ord, &v(&[1.0, 0.0, 0.0])).unwrap();
        let mut want = [0.0; 3];
        for k in 1..=3 {
            let lam = 2.0 - 2.0 * (k as f64 * PI / 4.0).cos();
            let coeff = (k as f64 * PI / 4.0).sin() / 2.0f64.sqrt();
            for (j, w) in want.iter_mut().enumerate() {
                *w += lam.sqrt() * coeff * ((j + 1) as f64 * k as f64 * PI / 4.0).sin() / 2.0f64.sqrt();
            }
        }
        assert!((got - v(&want)).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_diagonalizable() {
        // [[2, 1], [0, 1]]: A^{1/2} = [[√2, √2 - 1], [0, 1]]
        let op = Operator::dense_real(2, &[2.0, 1.0, 0.0, 1.0]).unwrap();
        let ord = FractionalOrder::real(0.5).unwrap();
        let y = spectral_power_oracle(&op, &ord, &v(&[0.0, 1.0])).unwrap();
        let s = 2f64.sqrt();
        assert!((y - v(&[s - 1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_is_refused() {
        let op = Operator::dense_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let ord = FractionalOrder::real(0.5).unwrap();
        assert!(matches!(
            spectral_power_oracle(&op, &ord, &v(&[0.0, 1.0])),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn zero_eigenvalue_maps_to_zero() {
        let op = Operator::multiplication(SymbolGrid::from_real(&[0.0, 1.0]).unwrap());
        let ord = FractionalOrder::real(0.5).unwrap();
        let y = spectral_power_oracle(&op, &ord, &v(&[1.0, 1.0])).unwrap();
        assert_eq!(y, v(&[0.0, 1.0]));

        let dense = Operator::dense(op.to_dense()).unwrap();
        let y = spectral_power_oracle(&dense, &ord, &v(&[1.0, 1.0])).unwrap();
        assert!((y - v(&[0.0, 1.0])).norm() < 1e-15);
    }
}
