//! Limits at `t -> 0+` from samples with a known expansion
//! `y(t) = L + Σ_m c_m t^{p_m}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::Vector;
use crate::special::principal_power;

/// Correction exponents `2-2α, 2, 4-2α, 4, ...` of `-t^{1-2α} U'(t)x`.
pub fn dtn_exponents(alpha: Complex64, terms: usize) -> Vec<Complex64> {
    interleaved(2.0 - 2.0 * alpha, 2.0, terms)
}

/// Correction exponents `2α, 2, 2+2α, 4, ...` of `U(t)x`.
pub fn boundary_exponents(alpha: Complex64, terms: usize) -> Vec<Complex64> {
    interleaved(2.0 * alpha, 2.0, terms)
}

fn interleaved(first: Complex64, period: f64, terms: usize) -> Vec<Complex64> {
    (0..terms)
        .map(|m| {
            let j = (m / 2) as f64;
            if m % 2 == 0 {
                first + period * j
            } else {
                Complex64::new(period * (j + 1.0), 0.0)
            }
        })
        .collect()
}

/// Least-squares estimate of `L`, componentwise, from samples `y(t_i)`.
pub fn fit_limit(t: &[f64], samples: &[Vector], exponents: &[Complex64]) -> Result<Vector> {
    let rows = t.len();
    let cols = exponents.len() + 1;
    if rows < cols || samples.len() != rows {
        return Err(Error::FitFailure(format!(
            "{} samples cannot determine {cols} coefficients",
            samples.len()
        )));
    }
    // columns in units of the largest t keep the system well scaled
    let t_max = t.iter().copied().fold(0.0, f64::max);
    let mut design = DMatrix::<Complex64>::zeros(rows, cols);
    for (i, &ti) in t.iter().enumerate() {
        design[(i, 0)] = Complex64::new(1.0, 0.0);
        for (m, &p) in exponents.iter().enumerate() {
            design[(i, m + 1)] = principal_power(Complex64::new(ti / t_max, 0.0), p)?;
        }
    }
    let dim = samples[0].len();
    let rhs = DMatrix::from_fn(rows, dim, |i, k| samples[i][k]);
    let solution = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    let limit = Vector::from_fn(dim, |k, _| solution[(0, k)]);
    if limit.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::FitFailure("non-finite extrapolated limit".into()));
    }
    Ok(limit)
}

/// Slope of `ln d` against `ln t` between two samples, `None` unless both
/// distances exceed `floor`.
pub fn log_slope(t_prev: f64, d_prev: f64, t_last: f64, d_last: f64, floor: f64) -> Option<f64> {
    (d_prev > floor && d_last > floor).then(|| (d_prev / d_last).ln() / (t_prev / t_last).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponent_sequences() {
        let a = c(0.25, 0.1);
        assert_eq!(
            dtn_exponents(a, 5),
            vec![c(1.5, -0.2), c(2.0, 0.0), c(3.5, -0.2), c(4.0, 0.0), c(5.5, -0.2)]
        );
        assert_eq!(boundary_exponents(a, 3), vec![c(0.5, 0.2), c(2.0, 0.0), c(2.5, 0.2)]);
    }

    #[test]
    fn recovers_exact_model() {
        let alpha = c(0.3, 0.2);
        let exps = dtn_exponents(alpha, 3);
        let coeffs = [c(1.0, -0.5), c(-2.0, 0.0), c(0.7, 0.1)];
        let limit = c(0.25, 1.5);
        let t: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
        let samples: Vec<Vector> = t
            .iter()
            .map(|&ti| {
                let mut y = limit;
                for (cm, &p) in coeffs.iter().zip(&exps) {
                    y += cm * principal_power(c(ti, 0.0), p).unwrap();
                }
                Vector::from_element(1, y)
            })
            .collect();
        let got = fit_limit(&t, &samples, &exps).unwrap();
        assert!((got[0] - limit).norm() < 1e-12);
        assert!(fit_limit(&t[..3], &samples[..3], &exps).is_err());
    }

    #[test]
    fn slope() {
        assert!((log_slope(1.0, 4.0, 0.5, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(log_slope(1.0, 4.0, 0.5, 1e-20, 1e-16), None);
    }
}
