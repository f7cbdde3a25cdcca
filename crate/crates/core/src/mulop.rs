//! Closed forms for the multiplication operator `g ↦ f g`.
//!
//! For a symbol value `f ≠ 0` and `w = t f^{1/2}` (principal root),
//!
//! * `u(t) = (2g/Γ(α)) (w/2)^α K_α(w)`
//! * `∂_t u(t) = -(2g/Γ(α)) 2^{-α} f^{1/2} w^α K_{1-α}(w)`, from
//!   `d/dw [w^α K_α(w)] = -w^α K_{α-1}(w)` and `K_{α-1} = K_{1-α}`
//! * `A^α g = f^α g`
//!
//! and `u ≡ g` where `f = 0`. All statements are pointwise on the sampled
//! grid; sup norms are maxima over the grid points.

use num_complex::Complex64;
use serde::Serialize;

use crate::balakrishnan::default_eps_sequence;
use crate::error::{invalid, Error, Result};
use crate::extrapolate::{boundary_exponents, dtn_exponents, fit_limit, log_slope};
use crate::operator::{SymbolGrid, Vector};
use crate::order::FractionalOrder;
use crate::special::{bessel_k, power_or_zero, principal_power};

fn check_len(sym: &SymbolGrid, g: &Vector) -> Result<()> {
    if sym.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: sym.len(),
            found: g.len(),
        });
    }
    Ok(())
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `u(t, x_i)` by the `K_α` formula.
pub fn closed_form_extension(sym: &SymbolGrid, ord: &FractionalOrder, g: &Vector, t: f64) -> Result<Vector> {
    check_len(sym, g)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("closed_form_extension needs t > 0, got {t}")));
    }
    let alpha = ord.alpha();
    let pre = 2.0 / ord.gamma_alpha();
    let values = sym
        .values()
        .iter()
        .zip(g.iter())
        .map(|(&f, &gi)| {
            if f == zero() {
                return Ok(gi);
            }
            let w = f.sqrt() * t;
            Ok(pre * gi * principal_power(w / 2.0, alpha)? * bessel_k(alpha, w)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Vector::from_vec(values))
}

/// `∂_t u(t, x_i)` by the Bessel derivative identity.
pub fn closed_form_derivative(sym: &SymbolGrid, ord: &FractionalOrder, g: &Vector, t: f64) -> Result<Vector> {
    check_len(sym, g)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("closed_form_derivative needs t > 0, got {t}")));
    }
    let alpha = ord.alpha();
    let pre = -2.0 / ord.gamma_alpha() * principal_power(Complex64::new(2.0, 0.0), -alpha)?;
    let values = sym
        .values()
        .iter()
        .zip(g.iter())
        .map(|(&f, &gi)| {
            if f == zero() {
                return Ok(zero());
            }
            let root = f.sqrt();
            let w = root * t;
            Ok(pre * gi * root * principal_power(w, alpha)? * bessel_k(1.0 - alpha, w)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Vector::from_vec(values))
}

/// `f^α g` pointwise, with `0^α = 0`.
pub fn closed_form_power(sym: &SymbolGrid, ord: &FractionalOrder, g: &Vector) -> Result<Vector> {
    check_len(sym, g)?;
    let values = sym
        .values()
        .iter()
        .zip(g.iter())
        .map(|(&f, &gi)| Ok(power_or_zero(f, ord.alpha())? * gi))
        .collect::<Result<Vec<_>>>()?;
    Ok(Vector::from_vec(values))
}

/// Pointwise small-t behaviour at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAsymptotics {
    pub point: f64,
    pub symbol: Complex64,
    pub boundary_limit: Complex64,
    pub boundary_target: Complex64,
    pub boundary_error: f64,
    /// Slope of `ln|u - g|` against `ln t`; about `2 Re α` when `f ≠ 0`.
    pub boundary_rate: Option<f64>,
    pub dtn_limit: Complex64,
    pub dtn_target: Complex64,
    pub dtn_error: f64,
    /// Slope of `ln|φ - L|`; about `2 - 2 Re α` when `f ≠ 0`.
    pub dtn_rate: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub t_grid: Vec<f64>,
    pub points: Vec<PointAsymptotics>,
    /// Pointwise relative tolerance, floored at `|g(x_i)|`.
    pub tol: f64,
    pub max_error: f64,
    pub pass: bool,
}

/// Default grid `0.5·2^{-k}`, `k = 0..8`.
pub fn default_small_t_grid() -> Vec<f64> {
    (0..8).map(|k| 0.5 * 0.5f64.powi(k)).collect()
}

pub const ASYMPTOTICS_TOL: f64 = 1e-5;

const FIT_TERMS: usize = 5;

/// Checks `u(t, x_i) → g(x_i)` and `-t^{1-2α} ∂_t u(t, x_i) → c_α f(x_i)^α g(x_i)`
/// by extrapolating the closed forms along `t_grid`.
pub fn small_t_asymptotics_check(
    sym: &SymbolGrid,
    ord: &FractionalOrder,
    g: &Vector,
    t_grid: &[f64],
) -> Result<AsymptoticsReport> {
    check_len(sym, g)?;
    if t_grid.len() < 4 {
        return Err(invalid("small-t check needs at least 4 grid points"));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || t_grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(invalid("small-t grid must be positive and strictly decreasing"));
    }
    let alpha = ord.alpha();
    let mut u_samples = Vec::with_capacity(t_grid.len());
    let mut phi_samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        u_samples.push(closed_form_extension(sym, ord, g, t)?);
        let factor = -principal_power(Complex64::new(t, 0.0), 1.0 - 2.0 * alpha)?;
        phi_samples.push(closed_form_derivative(sym, ord, g, t)? * factor);
    }
    let terms = FIT_TERMS.min(t_grid.len() - 1);
    let u_limit = fit_limit(t_grid, &u_samples, &boundary_exponents(alpha, terms))?;
    let phi_limit = fit_limit(t_grid, &phi_samples, &dtn_exponents(alpha, terms))?;
    let dtn_target = closed_form_power(sym, ord, g)? * ord.c_alpha();

    let n = t_grid.len();
    let (t_prev, t_last) = (t_grid[n - 2], t_grid[n - 1]);
    let mut points = Vec::with_capacity(sym.len());
    let mut max_error = 0.0f64;
    for i in 0..sym.len() {
        let scale = g[i].norm().max(f64::MIN_POSITIVE);
        let boundary_error = (u_limit[i] - g[i]).norm() / scale;
        let dtn_error = (phi_limit[i] - dtn_target[i]).norm() / dtn_target[i].norm().max(scale);
        let floor = 1e-13 * scale;
        let boundary_rate = log_slope(
            t_prev,
            (u_samples[n - 2][i] - g[i]).norm(),
            t_last,
            (u_samples[n - 1][i] - g[i]).norm(),
            floor,
        );
        let dtn_rate = log_slope(
            t_prev,
            (phi_samples[n - 2][i] - phi_limit[i]).norm(),
            t_last,
            (phi_samples[n - 1][i] - phi_limit[i]).norm(),
            floor,
        );
        max_error = max_error.max(boundary_error).max(dtn_error);
        points.push(PointAsymptotics {
            point: sym.points()[i],
            symbol: sym.values()[i],
            boundary_limit: u_limit[i],
            boundary_target: g[i],
            boundary_error,
            boundary_rate,
            dtn_limit: phi_limit[i],
            dtn_target: dtn_target[i],
            dtn_error,
            dtn_rate,
            pass: boundary_error <= ASYMPTOTICS_TOL && dtn_error <= ASYMPTOTICS_TOL,
        });
    }
    Ok(AsymptoticsReport {
        t_grid: t_grid.to_vec(),
        pass: points.iter().all(|p| p.pass),
        points,
        tol: ASYMPTOTICS_TOL,
        max_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftDecay {
    pub eps: Vec<f64>,
    /// `max_i |(f_i+ε)^α g_i - f_i^α g_i|`.
    pub sup_differences: Vec<f64>,
    /// Log-slope over the two smallest shifts.
    pub fitted_exponent: Option<f64>,
}

/// Decay of `‖(f+ε)^α g - f^α g‖` over the grid as `ε → 0`.
pub fn shift_decay(sym: &SymbolGrid, ord: &FractionalOrder, g: &Vector, eps: &[f64]) -> Result<ShiftDecay> {
    check_len(sym, g)?;
    if eps.len() < 2 || eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) || eps.windows(2).any(|w| w[0] <= w[1]) {
        return Err(invalid(
            "shift sequence must have two or more positive, decreasing entries",
        ));
    }
    let base = closed_form_power(sym, ord, g)?;
    let mut sup_differences = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut worst = 0.0f64;
        for (i, (&f, &gi)) in sym.values().iter().zip(g.iter()).enumerate() {
            let shifted = principal_power(f + e, ord.alpha())? * gi;
            worst = worst.max((shifted - base[i]).norm());
        }
        sup_differences.push(worst);
    }
    let n = eps.len();
    let fitted_exponent = log_slope(
        eps[n - 2],
        sup_differences[n - 2],
        eps[n - 1],
        sup_differences[n - 1],
        0.0,
    );
    Ok(ShiftDecay {
        eps: eps.to_vec(),
        sup_differences,
        fitted_exponent,
    })
}

/// [`shift_decay`] on the default sequence `2^{-2}, ..., 2^{-12}`.
pub fn shift_decay_default(sym: &SymbolGrid, ord: &FractionalOrder, g: &Vector) -> Result<ShiftDecay> {
    shift_decay(sym, ord, g, &default_eps_sequence())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{extension_derivative, extension_value};
    use crate::operator::Operator;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v(re: &[f64]) -> Vector {
        Vector::from_iterator(re.len(), re.iter().map(|&x| c(x, 0.0)))
    }

    #[test]
    fn extension_examples() {
        let half = FractionalOrder::real(0.5).unwrap();
        let sym = SymbolGrid::from_real(&[1.0, 0.0]).unwrap();
        let u = closed_form_extension(&sym, &half, &v(&[1.0, 3.0]), 1.0).unwrap();
        assert!((u[0] - (-1f64).exp()).norm() < 1e-14);
        assert_eq!(u[1], c(3.0, 0.0));

        let sym = SymbolGrid::from_real(&[4.0]).unwrap();
        let ord = FractionalOrder::real(0.3).unwrap();
        let g = v(&[1.0]);
        let closed = closed_form_extension(&sym, &ord, &g, 0.5).unwrap();
        let op = Operator::multiplication(sym.clone());
        let quad = extension_value(&op, &ord, &g, 0.5, 1e-12).unwrap();
        assert!((closed - quad).norm() < 1e-8);
    }

    #[test]
    fn derivative_matches_quadrature() {
        let sym = SymbolGrid::from_values(vec![c(2.0, 1.0), c(0.3, 0.0), c(0.0, 0.0)]).unwrap();
        let ord = FractionalOrder::new(c(0.3, 0.1)).unwrap();
        let g = v(&[1.0, -0.5, 2.0]);
        let op = Operator::multiplication(sym.clone());
        for t in [0.2, 1.0, 2.5] {
            let closed = closed_form_derivative(&sym, &ord, &g, t).unwrap();
            let quad = extension_derivative(&op, &ord, &g, t, 1e-12).unwrap();
            assert!((&closed - &quad.value).norm() < 1e-8 * closed.norm().max(1.0), "t={t}");
        }
    }

    #[test]
    fn power_examples() {
        let half = FractionalOrder::real(0.5).unwrap();
        let sym = SymbolGrid::from_real(&[1.0, 4.0, 9.0]).unwrap();
        let y = closed_form_power(&sym, &half, &v(&[1.0, 1.0, 1.0])).unwrap();
        assert!((y - v(&[1.0, 2.0, 3.0])).norm() < 1e-14);
        let sym = SymbolGrid::from_values(vec![c(0.0, 1.0)]).unwrap();
        let y = closed_form_power(&sym, &half, &v(&[1.0])).unwrap();
        assert!((y[0] - c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        let ord = FractionalOrder::new(c(0.3, 0.2)).unwrap();
        let sym = SymbolGrid::from_real(&[2.0]).unwrap();
        let y = closed_form_power(&sym, &ord, &v(&[1.0])).unwrap();
        assert_eq!(y[0], principal_power(c(2.0, 0.0), c(0.3, 0.2)).unwrap());
    }

    #[test]
    fn asymptotics_examples() {
        let grid = default_small_t_grid();
        let half = FractionalOrder::real(0.5).unwrap();
        let rep = small_t_asymptotics_check(&SymbolGrid::from_real(&[1.0]).unwrap(), &half, &v(&[1.0]), &grid).unwrap();
        assert!(rep.pass);
        assert!((rep.points[0].dtn_limit - 1.0).norm() < 1e-5);

        let ord = FractionalOrder::real(0.25).unwrap();
        let rep = small_t_asymptotics_check(&SymbolGrid::from_real(&[4.0]).unwrap(), &ord, &v(&[1.0]), &grid).unwrap();
        assert!(rep.pass, "{rep:?}");
        let want = ord.c_alpha() * 4f64.powf(0.25);
        assert!((rep.points[0].dtn_limit - want).norm() <= 1e-5 * want.norm());
        let rate = rep.points[0].dtn_rate.unwrap();
        assert!((rate - 1.5).abs() < 0.1, "{rate}");

        let ord = FractionalOrder::real(0.7).unwrap();
        let rep = small_t_asymptotics_check(
            &SymbolGrid::from_real(&[9.0, 0.0]).unwrap(),
            &ord,
            &v(&[2.0, 1.0]),
            &grid,
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.points[0].boundary_limit - 2.0).norm() < 2e-5);
        assert_eq!(rep.points[1].dtn_limit, c(0.0, 0.0));
    }

    #[test]
    fn shift_exponents() {
        let g = v(&[1.0, 1.0, 1.0]);
        for a in [0.3, 0.6] {
            let ord = FractionalOrder::real(a).unwrap();
            let smooth = shift_decay_default(&SymbolGrid::from_real(&[1.0, 4.0, 9.0]).unwrap(), &ord, &g).unwrap();
            assert!((smooth.fitted_exponent.unwrap() - 1.0).abs() < 0.01);
            let with_zero = shift_decay_default(&SymbolGrid::from_real(&[0.0, 1.0, 4.0]).unwrap(), &ord, &g).unwrap();
            assert!((with_zero.fitted_exponent.unwrap() - a).abs() < 1e-3);
        }
    }
}
