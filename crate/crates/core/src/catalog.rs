//! The operators every suite and CLI self-check runs on.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::operator::{Matrix, Operator, SymbolGrid, Vector};

pub const SHIPPED: [&str; 6] = [
    "identity",
    "laplacian",
    "hpd_dense",
    "jordan",
    "multiplication",
    "sector_multiplication",
];

const HPD_SEED: u64 = 0x5eed_0008;

/// Builds a shipped operator by name.
pub fn shipped(name: &str) -> Result<Operator> {
    match name {
        "identity" => Operator::identity(3),
        "laplacian" => Operator::laplacian_1d(8, 1.0),
        "hpd_dense" => random_hpd(8, 0.25, 4.0, HPD_SEED),
        "jordan" => Operator::dense_real(2, &[1.0, 1.0, 0.0, 1.0]),
        "multiplication" => Ok(Operator::multiplication(SymbolGrid::from_real(&[0.0, 1.0, 4.0, 9.0])?)),
        "sector_multiplication" => Ok(Operator::multiplication(sector_symbol()?)),
        other => Err(invalid(format!(
            "unknown shipped operator '{other}', expected one of {}",
            SHIPPED.join(", ")
        ))),
    }
}

/// All shipped operators, in catalog order.
pub fn shipped_operators() -> Result<Vec<(&'static str, Operator)>> {
    SHIPPED.iter().map(|&name| Ok((name, shipped(name)?))).collect()
}

/// Whether the spectral oracle applies (the Jordan block is defective).
pub fn is_diagonalizable(name: &str) -> bool {
    name != "jordan"
}

// Values on rays up to |arg| = π/3.
fn sector_symbol() -> Result<SymbolGrid> {
    let values = [
        (0.5, PI / 3.0),
        (1.0, -PI / 4.0),
        (2.0, 0.0),
        (3.0, PI / 6.0),
        (5.0, -PI / 3.0),
        (8.0, PI / 8.0),
    ]
    .iter()
    .map(|&(r, th)| Complex64::from_polar(r, th))
    .collect();
    let points = (0..6).map(|i| i as f64 / 5.0).collect();
    SymbolGrid::new(points, values, PI / 3.0)
}

/// `Q diag(λ) Q^H` with a seeded unitary `Q` and log-uniform eigenvalues in
/// `[lo, hi]`.
pub fn random_hpd(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Operator> {
    if !(0.0 < lo && lo <= hi) {
        return Err(invalid("random_hpd needs 0 < lo <= hi"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let q = g.qr().q();
    let eig: Vec<f64> = (0..n)
        .map(|k| {
            let u = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
            lo * (hi / lo).powf(u)
        })
        .collect();
    let d = Matrix::from_diagonal(&DVector::from_iterator(n, eig.iter().map(|&l| Complex64::new(l, 0.0))));
    let a = &q * d * q.adjoint();
    // exact Hermitian symmetry
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    Operator::dense(a)
}

/// Seeded complex vector with entries uniform in the unit square.
pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{default_lambda_grid, validate_nonnegativity, Eigenbasis};

    #[test]
    fn catalog_builds() {
        let ops = shipped_operators().unwrap();
        assert_eq!(ops.len(), SHIPPED.len());
        for (name, op) in &ops {
            let rep = validate_nonnegativity(op, &default_lambda_grid()).unwrap();
            assert!(
                rep.m_estimate >= 1.0 && rep.m_estimate < 2.0,
                "{name}: {}",
                rep.m_estimate
            );
        }
        assert!(shipped("nope").is_err());
    }

    #[test]
    fn hpd_spectrum() {
        let op = shipped("hpd_dense").unwrap();
        let eig = Eigenbasis::of(&op).unwrap();
        let mut values: Vec<f64> = eig.values.iter().map(|z| z.re).collect();
        values.sort_by(f64::total_cmp);
        assert!((values[0] - 0.25).abs() < 1e-12);
        assert!((values[7] - 4.0).abs() < 1e-12);
        assert!(eig.condition < 1.0 + 1e-12);
    }
}
