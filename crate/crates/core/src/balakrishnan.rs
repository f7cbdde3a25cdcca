//! Fractional powers by quadrature of
//! `J^α x = (sin απ / π) ∫_0^∞ t^{α-1} (t + A)^{-1} A x dt`.
//!
//! The integral is split at `t = 1`. The head behaves like `t^{Re α - 1}`
//! and the tail like `t^{Re α - 2}`, so each side gets its own truncation
//! point from the bounds `‖(t+A)^{-1}Ax‖ <= (1+M)‖x‖` (head) and
//! `<= M‖Ax‖/t` (tail). Inside the window the exponential-map trapezoid
//! rule of [`crate::quadrature`] is refined until successive values agree.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::extrapolate::fit_limit;
use crate::operator::{Operator, Vector};
use crate::order::FractionalOrder;
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, QuadratureRule, Transform, Window};
use crate::special::principal_power;

/// Which computation produced a fractional power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Balakrishnan,
    ShiftedLimit,
    SpectralOracle,
    Dtn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub value: Vector,
    pub est_error: f64,
    pub node_count_used: usize,
    pub route: Route,
}

// Truncation error budget relative to the requested tolerance.
const TRUNCATION_SHARE: f64 = 1e-2;

/// Window `[U-, U+]` in `u = ln t` such that each discarded end contributes
/// at most `eps·‖x‖`.
pub fn balakrishnan_window(re_alpha: f64, m: f64, x_norm: f64, ax_norm: f64, eps: f64) -> Result<Window> {
    let a = re_alpha;
    let lower = ((eps * a / (1.0 + m)).ln() / a).min(0.0);
    let upper = if ax_norm > 0.0 {
        ((eps * (1.0 - a) * x_norm / (m * ax_norm)).ln() / (a - 1.0)).max(0.0)
    } else {
        0.0
    };
    Window::new(lower, upper)
}

/// Fixed split-at-one rule: nodes `t_k = e^{kη}` on the window, weights
/// `η t_k^α`, so that `∫_0^∞ t^{α-1} h(t) dt ≈ Σ w_k h(t_k)`.
pub fn balakrishnan_rule(ord: &FractionalOrder, step: f64, window: Window) -> Result<QuadratureRule> {
    QuadratureRule::exp_map(ord.alpha(), step, window, false, Transform::SplitAtOne)
}

fn check_sector(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("scalar_balakrishnan argument"));
    }
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain { z });
    }
    Ok(())
}

/// `(sin απ/π) ∫ t^{α-1} z/(t+z) dt` with a fixed rule.
pub fn scalar_balakrishnan(z: Complex64, ord: &FractionalOrder, rule: &QuadratureRule) -> Result<Complex64> {
    check_sector(z)?;
    let sum = rule.integrate_scalar(|t| z / (t + z));
    Ok(ord.balakrishnan_prefactor() * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarValue {
    pub value: Complex64,
    pub est_error: f64,
    pub node_count: usize,
}

/// Adaptive version of [`scalar_balakrishnan`].
pub fn scalar_balakrishnan_adaptive(z: Complex64, ord: &FractionalOrder, tol: f64) -> Result<ScalarValue> {
    check_sector(z)?;
    let theta = z.arg().abs();
    // sup_λ |λ/(λ+z)|
    let m = if theta <= PI / 2.0 { 1.0 } else { 1.0 / theta.sin() };
    let window = balakrishnan_window(ord.re(), m, 1.0, z.norm(), TRUNCATION_SHARE * tol)?;
    let alpha = ord.alpha();
    let out = integrate_adaptive(
        "scalar Balakrishnan quadrature",
        window,
        &AdaptiveConfig::new(tol),
        |u| {
            let t = u.exp();
            Ok(Vector::from_element(1, (alpha * u).exp() * z / (t + z)))
        },
    )?;
    let pre = ord.balakrishnan_prefactor();
    Ok(ScalarValue {
        value: pre * out.value[0],
        est_error: pre.norm() * out.est_error,
        node_count: out.node_count,
    })
}

/// `J^α x` by adaptive quadrature; `tol` is the relative successive-difference
/// threshold.
pub fn balakrishnan_power(op: &Operator, ord: &FractionalOrder, x: &Vector, tol: f64) -> Result<PowerResult> {
    balakrishnan_power_with(op, ord, x, &AdaptiveConfig::new(tol))
}

pub fn balakrishnan_power_with(
    op: &Operator,
    ord: &FractionalOrder,
    x: &Vector,
    cfg: &AdaptiveConfig,
) -> Result<PowerResult> {
    let ax = op.apply(x)?;
    let pre = ord.balakrishnan_prefactor();
    let (x_norm, ax_norm) = (x.norm(), ax.norm());
    if ax_norm == 0.0 {
        return Ok(PowerResult {
            value: Vector::zeros(x.len()),
            est_error: 0.0,
            node_count_used: 0,
            route: Route::Balakrishnan,
        });
    }
    let m = op.nonneg_constant()?;
    let window = balakrishnan_window(ord.re(), m, x_norm, ax_norm, TRUNCATION_SHARE * cfg.tol)?;
    let alpha = ord.alpha();
    let out = integrate_adaptive("Balakrishnan quadrature", window, cfg, |u| {
        let t = u.exp();
        let r = op.resolve(Complex64::new(t, 0.0), &ax)?;
        Ok(r * (alpha * u).exp())
    })?;
    Ok(PowerResult {
        value: out.value * pre,
        est_error: pre.norm() * out.est_error,
        node_count_used: out.node_count,
        route: Route::Balakrishnan,
    })
}

/// `ε_j = 2^{-j}` for `j = 2..=12`.
pub fn default_eps_sequence() -> Vec<f64> {
    eps_sequence(12)
}

/// `ε_j = 2^{-j}` for `j = 2..=last`.
pub fn eps_sequence(last: i32) -> Vec<f64> {
    (2..=last).map(|j| 2f64.powi(-j)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedPower {
    pub result: PowerResult,
    pub eps: Vec<f64>,
    /// `(A+ε_j)^α x` for every ε in the sequence.
    pub samples: Vec<Vector>,
    /// Extrapolated limit after each additional sample.
    pub estimates: Vec<Vector>,
    /// Slope of `ln‖(A+ε)^α x - limit‖` against `ln ε` over the two smallest
    /// shifts; `None` when the differences are at rounding level.
    pub fitted_exponent: Option<f64>,
}

// Correction terms in the extrapolation model L + Σ c_m ε^{q_m}.
const SHIFT_TERMS: usize = 4;

/// `lim_{ε→0+} (A+ε)^α x` from the shifted operators `A + ε_j`.
///
/// Each sample is fitted to `L + c_0 ε^α + c_1 ε + c_2 ε² + ...`: a zero
/// eigenvalue contributes exactly `ε^α`, a non-zero one a power series in ε.
/// The limit is declared when the last two extrapolated values differ by at
/// most `tol` relative to the limit.
pub fn shifted_power(
    op: &Operator,
    ord: &FractionalOrder,
    x: &Vector,
    eps_sequence: &[f64],
    tol: f64,
) -> Result<ShiftedPower> {
    if eps_sequence.len() < 3 {
        return Err(invalid("shifted_power needs at least three shifts"));
    }
    if eps_sequence.iter().any(|e| !(e.is_finite() && *e > 0.0)) || eps_sequence.windows(2).any(|w| w[0] <= w[1]) {
        return Err(invalid("shift sequence must be positive and strictly decreasing"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let inner = AdaptiveConfig::new(TRUNCATION_SHARE * tol);
    let mut samples = Vec::with_capacity(eps_sequence.len());
    let mut nodes = 0;
    let mut quad_error = 0.0f64;
    for &eps in eps_sequence {
        let shifted = op.shifted(eps)?;
        let p = balakrishnan_power_with(&shifted, ord, x, &inner)?;
        nodes += p.node_count_used;
        quad_error = quad_error.max(p.est_error);
        samples.push(p.value);
    }
    let mut exponents = vec![ord.alpha()];
    exponents.extend((1..SHIFT_TERMS).map(|k| Complex64::new(k as f64, 0.0)));

    let mut estimates: Vec<Vector> = Vec::with_capacity(samples.len());
    for j in 0..samples.len() {
        let terms = j.min(SHIFT_TERMS);
        let first = j - terms;
        estimates.push(fit_limit(
            &eps_sequence[first..=j],
            &samples[first..=j],
            &exponents[..terms],
        )?);
    }
    let last = estimates.len() - 1;
    let limit = estimates[last].clone();
    let change = (&estimates[last] - &estimates[last - 1]).norm();
    let scale = limit.norm().max(1e-8 * x.norm());
    if change.is_nan() || change > tol * scale {
        return Err(Error::NonConvergence {
            what: "shifted-power limit",
            evaluations: samples.len(),
            last_change: change / scale.max(f64::MIN_POSITIVE),
        });
    }

    let d_prev = (&samples[last - 1] - &limit).norm();
    let d_last = (&samples[last] - &limit).norm();
    let floor = 10.0 * (quad_error + f64::EPSILON * limit.norm().max(x.norm()));
    let fitted_exponent = (d_last > floor && d_prev > floor)
        .then(|| (d_prev / d_last).ln() / (eps_sequence[last - 1] / eps_sequence[last]).ln());

    Ok(ShiftedPower {
        result: PowerResult {
            value: limit,
            est_error: change.max(quad_error),
            node_count_used: nodes,
            route: Route::ShiftedLimit,
        },
        eps: eps_sequence.to_vec(),
        samples,
        estimates,
        fitted_exponent,
    })
}

/// `z^α` for comparison with [`scalar_balakrishnan`].
pub fn scalar_power(z: Complex64, ord: &FractionalOrder) -> Result<Complex64> {
    principal_power(z, ord.alpha())
}
