//! The extension `U(t)x = (1/Γ(α)) ∫_0^∞ s^{α-1} e^{-s} T(t²/4s) x ds`
//! and its Dirichlet-to-Neumann limit `-lim t^{1-2α} U'(t)x = c_α A^α x`.
//!
//! Everything is expressed through the subtracted moments
//!
//! `Ĩ_k(t) = (1/Γ(α)) ∫_0^∞ s^{α-1+k} e^{-s} (T(t²/4s) - I) x ds`,
//!
//! which vanish when `T ≡ I` and so carry no cancellation against `x`:
//!
//! * `U = x + Ĩ_0`
//! * `U' = (2/t)(α Ĩ_0 - Ĩ_1)`
//! * `U'' = ((4α² - 2α) Ĩ_0 - (8α + 2) Ĩ_1 + 4 Ĩ_2) / t²`
//!
//! The derivative formulas come from differentiating the kernel in the
//! `r = t²/4s` form, `(t²/4)^α r^{-α-1} e^{-t²/4r}`, and using that the
//! moments `∫ s^{α-1} e^{-s} (α - s) ds` and
//! `∫ s^{α-1} e^{-s} (α² - (2α+1)s + s²) ds` are zero.
//!
//! The moments are integrated with the exponential-map rule in `v = ln s`.
//! Once `‖T(r)x‖` has decayed below rounding, `(T(r) - I)x` is replaced by
//! `-x`, which saves the matrix exponentials at small `s`.

use num_complex::Complex64;

use crate::balakrishnan::{balakrishnan_power_with, PowerResult};
use crate::error::{invalid, Error, Result};
use crate::extrapolate::{dtn_exponents, fit_limit};
use crate::operator::{Operator, Vector};
use crate::order::FractionalOrder;
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, Window};
use crate::special::principal_power;

// ln 80: e^{(α+2)v - e^v} is below 1e-30 beyond it.
const UPPER_LOG_S: f64 = 4.382_026_634_673_881;
const TRUNCATION_SHARE: f64 = 1e-2;
// ‖T(r)x‖ <= DECAY_FLOOR·‖x‖ is treated as zero.
const DECAY_FLOOR: f64 = 1e-17;

/// Precomputed data for repeated evaluations of `U(t)x` with fixed `x`.
#[derive(Debug, Clone)]
pub struct Extension<'a> {
    op: &'a Operator,
    ord: FractionalOrder,
    x: Vector,
    m: f64,
    /// `r*` with `‖T(r)x‖ <= DECAY_FLOOR ‖x‖` for all `r >= r*`.
    cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub values: Vec<Vector>,
    /// Absolute error estimate for the stacked moments.
    pub est_error: f64,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Vector,
    pub est_error: f64,
    pub node_count: usize,
}

impl<'a> Extension<'a> {
    pub fn new(op: &'a Operator, ord: &FractionalOrder, x: &Vector) -> Result<Self> {
        if x.len() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: x.len(),
            });
        }
        let m = op.nonneg_constant()?;
        let x_norm = x.norm();
        let mut cutoff = None;
        if x_norm > 0.0 {
            // ‖T(r')x‖ <= M ‖T(r)x‖ for r' >= r
            for k in -4..=60 {
                let r = 2f64.powi(k);
                if op.semigroup(r, x)?.norm() * m <= DECAY_FLOOR * x_norm {
                    cutoff = Some(r);
                    break;
                }
            }
        }
        Ok(Self {
            op,
            ord: *ord,
            x: x.clone(),
            m,
            cutoff,
        })
    }

    pub fn order(&self) -> &FractionalOrder {
        &self.ord
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    /// `Ĩ_0, ..., Ĩ_{count-1}` at `t > 0`.
    pub fn moments(&self, t: f64, count: usize, tol: f64) -> Result<Moments> {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("extension needs t > 0, got {t}")));
        }
        let n = self.x.len();
        if self.x.norm() == 0.0 {
            return Ok(Moments {
                values: vec![Vector::zeros(n); count],
                est_error: 0.0,
                node_count: 0,
            });
        }
        let alpha = self.ord.alpha();
        let a = alpha.re;
        let rgamma = self.ord.gamma_alpha().inv();
        let t2 = t * t / 4.0;

        // The integrand tends to -x s^{α-1+k} as s -> 0, so the window must
        // reach far enough left for ∫_{s < e^V} s^{a-1} (M+1)‖x‖ ds to drop
        // below eps ‖x‖ |Γ(α)|, with eps scaled like the moments (~ t^{2a}).
        let eps = TRUNCATION_SHARE * tol * t.powf(2.0 * a).min(1.0);
        let lower = ((eps * a * self.ord.gamma_alpha().norm() / (self.m + 1.0)).ln() / a).min(0.0);
        let window = Window::new(lower, UPPER_LOG_S)?;
        let cutoff = self.cutoff.unwrap_or(f64::INFINITY);
        let x = &self.x;
        let op = self.op;
        let out = integrate_adaptive("extension quadrature", window, &AdaptiveConfig::new(tol), |v| {
            let s = v.exp();
            let r = t2 / s;
            let inc = if r >= cutoff {
                -x.clone()
            } else {
                op.semigroup_increment(r, x)?
            };
            let base = (alpha * v).exp() * (-s).exp() * rgamma;
            let mut stacked = Vector::zeros(n * count);
            let mut w = base;
            for k in 0..count {
                stacked.rows_mut(k * n, n).copy_from(&(&inc * w));
                w *= s;
            }
            Ok(stacked)
        })?;
        let values = (0..count).map(|k| out.value.rows(k * n, n).into_owned()).collect();
        Ok(Moments {
            values,
            est_error: out.est_error,
            node_count: out.node_count,
        })
    }

    pub fn value(&self, t: f64, tol: f64) -> Result<Evaluation> {
        if t == 0.0 {
            return Ok(Evaluation {
                value: self.x.clone(),
                est_error: 0.0,
                node_count: 0,
            });
        }
        let mom = self.moments(t, 1, tol)?;
        Ok(Evaluation {
            value: &self.x + &mom.values[0],
            est_error: mom.est_error,
            node_count: mom.node_count,
        })
    }

    /// `U'(t)x` from the moments, without the finite-difference check.
    pub fn derivative_unchecked(&self, t: f64, tol: f64) -> Result<Evaluation> {
        let mom = self.moments(t, 2, tol)?;
        Ok(Evaluation {
            value: derivative_from(&mom.values, self.ord.alpha(), t),
            est_error: 2.0 / t * (self.ord.alpha().norm() + 1.0) * mom.est_error,
            node_count: mom.node_count,
        })
    }

    /// `U'(t)x`, cross-checked against a central difference of `U` with step
    /// `t·1e-4`. The discrepancy is added to `est_error`.
    pub fn derivative(&self, t: f64, tol: f64) -> Result<CheckedDerivative> {
        let analytic = self.derivative_unchecked(t, tol)?;
        let h = t * 1e-4;
        let plus = self.value(t + h, tol)?;
        let minus = self.value(t - h, tol)?;
        let fd = (&plus.value - &minus.value) / Complex64::new(2.0 * h, 0.0);
        let discrepancy = (&fd - &analytic.value).norm();
        // O(h²) truncation plus quadrature noise amplified by 1/h
        let scale = analytic.value.norm().max(self.x.norm() / t);
        let allowed = fd_allowance(tol) * scale + (plus.est_error + minus.est_error) / h;
        if discrepancy > allowed {
            return Err(Error::CrossCheck { discrepancy, allowed });
        }
        Ok(CheckedDerivative {
            value: analytic.value,
            est_error: analytic.est_error + discrepancy,
            fd_discrepancy: discrepancy,
            node_count: analytic.node_count + plus.node_count + minus.node_count,
        })
    }

    /// `U, U', U''` at `t`.
    pub fn jet(&self, t: f64, tol: f64) -> Result<(Vector, Vector, Vector, f64)> {
        let mom = self.moments(t, 3, tol)?;
        let alpha = self.ord.alpha();
        let u = &self.x + &mom.values[0];
        let du = derivative_from(&mom.values, alpha, t);
        let c0 = 4.0 * alpha * alpha - 2.0 * alpha;
        let c1 = -(8.0 * alpha + 2.0);
        let d2u = (&mom.values[0] * c0 + &mom.values[1] * c1 + &mom.values[2] * Complex64::new(4.0, 0.0))
            / Complex64::new(t * t, 0.0);
        Ok((u, du, d2u, mom.est_error))
    }

    /// `φ(t) = -t^{1-2α} U'(t)x`.
    pub fn neumann_quotient(&self, t: f64, tol: f64) -> Result<Evaluation> {
        let du = self.derivative_unchecked(t, tol)?;
        let factor = -principal_power(Complex64::new(t, 0.0), 1.0 - 2.0 * self.ord.alpha())?;
        Ok(Evaluation {
            value: du.value * factor,
            est_error: du.est_error * factor.norm(),
            node_count: du.node_count,
        })
    }
}

/// Allowed relative disagreement between the analytic derivative and the
/// central difference.
pub fn fd_allowance(tol: f64) -> f64 {
    (100.0 * tol).max(1e-6)
}

fn derivative_from(moments: &[Vector], alpha: Complex64, t: f64) -> Vector {
    (&moments[0] * alpha - &moments[1]) * Complex64::new(2.0 / t, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedDerivative {
    pub value: Vector,
    pub est_error: f64,
    pub fd_discrepancy: f64,
    pub node_count: usize,
}

/// `U(t)x`; `U(0)x = x`.
pub fn extension_value(op: &Operator, ord: &FractionalOrder, x: &Vector, t: f64, tol: f64) -> Result<Vector> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("extension needs t >= 0, got {t}")));
    }
    Ok(Extension::new(op, ord, x)?.value(t, tol)?.value)
}

/// `U'(t)x` with the finite-difference cross-check.
pub fn extension_derivative(
    op: &Operator,
    ord: &FractionalOrder,
    x: &Vector,
    t: f64,
    tol: f64,
) -> Result<CheckedDerivative> {
    Extension::new(op, ord, x)?.derivative(t, tol)
}

/// Quadrature tolerance used by [`ode_residual`].
pub const ODE_RESIDUAL_TOL: f64 = 1e-11;

/// `‖U'' + ((1-2α)/t) U' - A U‖ / max(‖AU‖, ‖x‖)` at `t > 0`.
pub fn ode_residual(op: &Operator, ord: &FractionalOrder, x: &Vector, t: f64) -> Result<f64> {
    let ext = Extension::new(op, ord, x)?;
    let (u, du, d2u, _) = ext.jet(t, ODE_RESIDUAL_TOL)?;
    let au = op.apply(&u)?;
    let residual = d2u + du * ((1.0 - 2.0 * ord.alpha()) / t) - &au;
    let scale = op.norm_of(&au).max(op.norm_of(x));
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(op.norm_of(&residual) / scale)
}

/// Samples of `U(t)x` and `U'(t)x` on a decreasing geometric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionTrace {
    pub t_grid: Vec<f64>,
    pub u_values: Vec<Vector>,
    pub du_values: Vec<Vector>,
    pub quad_errors: Vec<f64>,
}

/// `t_k = t0·ratio^k` for `k < steps`.
pub fn geometric_grid(t0: f64, ratio: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(invalid(format!("t0 must be positive, got {t0}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(invalid(format!("ratio must lie in (0, 1), got {ratio}")));
    }
    Ok((0..steps).map(|k| t0 * ratio.powi(k as i32)).collect())
}

/// Evaluates the trace; with `cross_check` every derivative is compared with
/// a central difference and the discrepancy is folded into `quad_errors`.
pub fn extension_trace(ext: &Extension<'_>, t_grid: &[f64], tol: f64, cross_check: bool) -> Result<ExtensionTrace> {
    if t_grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(invalid("t grid must be strictly decreasing"));
    }
    let mut trace = ExtensionTrace {
        t_grid: t_grid.to_vec(),
        u_values: Vec::with_capacity(t_grid.len()),
        du_values: Vec::with_capacity(t_grid.len()),
        quad_errors: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let mom = ext.moments(t, 2, tol)?;
        let u = ext.x() + &mom.values[0];
        let du = derivative_from(&mom.values, ext.order().alpha(), t);
        let mut err = 2.0 / t * (ext.order().alpha().norm() + 1.0) * mom.est_error;
        if cross_check {
            err += ext.derivative(t, tol)?.fd_discrepancy;
        }
        trace.u_values.push(u);
        trace.du_values.push(du);
        trace.quad_errors.push(err);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnConfig {
    pub t0: f64,
    pub ratio: f64,
    pub steps: usize,
    /// Largest admissible `Re α`.
    pub alpha_guard: f64,
    /// Quadrature tolerance for every sample and for the reference.
    pub tol: f64,
    /// `pass` requires `rel_error <= pass_tol`.
    pub pass_tol: f64,
    /// Upper bound on the number of correction terms in the fit.
    pub max_terms: usize,
    pub cross_check: bool,
}

impl Default for DtnConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            ratio: 0.5,
            steps: 8,
            alpha_guard: 0.9,
            tol: 1e-10,
            pass_tol: 1e-4,
            max_terms: 5,
            cross_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtnReport {
    pub extrapolated_limit: Vector,
    /// `c_α J^α x` by the Balakrishnan route.
    pub reference: Vector,
    pub reference_power: PowerResult,
    pub fitted_exponent: f64,
    pub rel_error: f64,
    pub pass: bool,
    pub pass_tol: f64,
    pub trace: ExtensionTrace,
    /// `φ(t_k) = -t_k^{1-2α} U'(t_k)x`.
    pub phi: Vec<Vector>,
    /// Exponents of the correction terms in the fit.
    pub fit_exponents: Vec<Complex64>,
    pub fit_samples: usize,
    pub phi_spread: f64,
    pub max_sample_error: f64,
}

/// [`dtn_extract_with`] with the default quadrature tolerance and fit.
pub fn dtn_extract(
    op: &Operator,
    ord: &FractionalOrder,
    x: &Vector,
    t0: f64,
    ratio: f64,
    steps: usize,
) -> Result<DtnReport> {
    dtn_extract_with(
        op,
        ord,
        x,
        &DtnConfig {
            t0,
            ratio,
            steps,
            ..DtnConfig::default()
        },
    )
}

/// Extrapolates `φ(t) = -t^{1-2α} U'(t)x` to `t = 0`.
///
/// `φ` expands as `L + Σ_j (a_j t^{2j-2α} + b_j t^{2j})`, which follows from
/// the series of `I_{±α}` in the scalar case. The limit `L` is fitted by
/// least squares on the last `max(4, steps-2)` samples, using the leading
/// correction `t^{2-2α}` and as many further terms of the expansion as the
/// sample count allows, up to `max_terms`.
pub fn dtn_extract_with(op: &Operator, ord: &FractionalOrder, x: &Vector, cfg: &DtnConfig) -> Result<DtnReport> {
    if ord.re() > cfg.alpha_guard {
        return Err(Error::AlphaGuard {
            re_alpha: ord.re(),
            guard: cfg.alpha_guard,
        });
    }
    if cfg.steps < 4 {
        return Err(invalid(format!(
            "dtn extraction needs at least 4 steps, got {}",
            cfg.steps
        )));
    }
    if cfg.max_terms == 0 {
        return Err(invalid("dtn extraction needs at least one correction term"));
    }
    let grid = geometric_grid(cfg.t0, cfg.ratio, cfg.steps)?;
    let ext = Extension::new(op, ord, x)?;
    let trace = extension_trace(&ext, &grid, cfg.tol, cfg.cross_check)?;
    let alpha = ord.alpha();
    let phi: Vec<Vector> = trace
        .t_grid
        .iter()
        .zip(&trace.du_values)
        .map(|(&t, du)| Ok(du * -principal_power(Complex64::new(t, 0.0), 1.0 - 2.0 * alpha)?))
        .collect::<Result<_>>()?;
    let phi_errors: Vec<f64> = trace
        .t_grid
        .iter()
        .zip(&trace.quad_errors)
        .map(|(&t, e)| e * t.powf(1.0 - 2.0 * alpha.re))
        .collect();

    let n_fit = 4.max(cfg.steps - 2).min(cfg.steps);
    let first = cfg.steps - n_fit;
    let fit_t = &trace.t_grid[first..];
    let fit_phi = &phi[first..];
    let mut spread = 0.0f64;
    for i in 0..fit_phi.len() {
        for j in i + 1..fit_phi.len() {
            spread = spread.max((&fit_phi[i] - &fit_phi[j]).norm());
        }
    }
    let max_sample_error = phi_errors[first..].iter().copied().fold(0.0, f64::max);
    if max_sample_error > 0.1 * spread {
        return Err(Error::FitFailure(format!(
            "samples are quadrature-noise dominated: error {max_sample_error:e} vs spread {spread:e}"
        )));
    }

    let terms = cfg.max_terms.min(n_fit - 1);
    let exponents = dtn_exponents(alpha, terms);
    let limit = fit_limit(fit_t, fit_phi, &exponents)?;

    let last = cfg.steps - 1;
    let d_prev = (&phi[last - 1] - &limit).norm();
    let d_last = (&phi[last] - &limit).norm();
    let fitted_exponent = (d_prev / d_last).ln() / (1.0 / cfg.ratio).ln();

    let reference_power = balakrishnan_power_with(op, ord, x, &AdaptiveConfig::new(cfg.tol))?;
    let reference = &reference_power.value * ord.c_alpha();
    let diff = (&limit - &reference).norm();
    let ref_norm = reference.norm();
    let rel_error = if ref_norm > 0.0 { diff / ref_norm } else { diff };
    Ok(DtnReport {
        extrapolated_limit: limit,
        reference,
        reference_power,
        fitted_exponent,
        rel_error,
        pass: rel_error <= cfg.pass_tol,
        pass_tol: cfg.pass_tol,
        trace,
        phi,
        fit_exponents: exponents,
        fit_samples: n_fit,
        phi_spread: spread,
        max_sample_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SymbolGrid;
    use crate::special::{bessel_k, gamma};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v(re: &[f64]) -> Vector {
        Vector::from_iterator(re.len(), re.iter().map(|&x| c(x, 0.0)))
    }

    fn mul(f: &[f64]) -> Operator {
        Operator::multiplication(SymbolGrid::from_real(f).unwrap())
    }

    #[test]
    fn boundary_and_zero_operator() {
        let ord = FractionalOrder::real(0.3).unwrap();
        let op = mul(&[0.0, 0.0]);
        let x = v(&[1.0, -2.0]);
        assert_eq!(extension_value(&op, &ord, &x, 0.0, 1e-10).unwrap(), x);
        let u = extension_value(&op, &ord, &x, 1.5, 1e-10).unwrap();
        assert!((u - &x).norm() < 1e-14);
        let du = extension_derivative(&op, &ord, &x, 1.5, 1e-10).unwrap();
        assert!(du.value.norm() < 1e-14);
        assert!(ode_residual(&op, &ord, &x, 0.7).unwrap() < 1e-12);
    }

    #[test]
    fn scalar_closed_form() {
        // (2/Γ(α)) (t√c/2)^α K_α(t√c)
        let ord = FractionalOrder::real(0.3).unwrap();
        let op = mul(&[1.0]);
        let u = extension_value(&op, &ord, &v(&[1.0]), 1.0, 1e-12).unwrap();
        let want = 2.0 / gamma(c(0.3, 0.0)).unwrap() * 0.5f64.powf(0.3) * bessel_k(c(0.3, 0.0), c(1.0, 0.0)).unwrap();
        assert!((u[0] - want).norm() < 1e-11, "{} vs {}", u[0], want);
    }

    #[test]
    fn half_order_is_exponential() {
        let ord = FractionalOrder::real(0.5).unwrap();
        let op = mul(&[1.0]);
        let du = extension_derivative(&op, &ord, &v(&[1.0]), 1.0, 1e-10).unwrap();
        assert!((du.value[0] + (-1f64).exp()).norm() < 1e-9);
        let op = mul(&[1.0, 4.0]);
        assert!(ode_residual(&op, &ord, &v(&[1.0, 1.0]), 1.0).unwrap() <= 1e-6);
    }

    #[test]
    fn laplacian_residual() {
        let op = Operator::laplacian_1d(8, 1.0).unwrap();
        let ord = FractionalOrder::real(0.3).unwrap();
        let mut x = Vector::zeros(8);
        x[0] = c(1.0, 0.0);
        assert!(ode_residual(&op, &ord, &x, 0.5).unwrap() <= 1e-5);
    }

    #[test]
    fn dtn_scalar_limits() {
        let op = mul(&[1.0]);
        for a in [0.25, 0.5, 0.75] {
            let ord = FractionalOrder::real(a).unwrap();
            let rep = dtn_extract(&op, &ord, &v(&[1.0]), 1.0, 0.5, 8).unwrap();
            assert!(
                (rep.extrapolated_limit[0] - ord.c_alpha()).norm() <= 1e-6,
                "{a}: {}",
                rep.extrapolated_limit[0]
            );
            assert!(rep.pass);
        }
        let op = mul(&[1.0, 4.0, 9.0]);
        let ord = FractionalOrder::real(0.5).unwrap();
        let rep = dtn_extract(&op, &ord, &v(&[1.0, 1.0, 1.0]), 1.0, 0.5, 8).unwrap();
        assert!((&rep.extrapolated_limit - v(&[1.0, 2.0, 3.0])).norm() <= 1e-5);
    }

    #[test]
    fn dtn_guards() {
        let op = mul(&[1.0]);
        let x = v(&[1.0]);
        let ord = FractionalOrder::real(0.95).unwrap();
        assert!(matches!(
            dtn_extract(&op, &ord, &x, 1.0, 0.5, 8),
            Err(Error::AlphaGuard { .. })
        ));
        let ord = FractionalOrder::real(0.5).unwrap();
        assert!(dtn_extract(&op, &ord, &x, 1.0, 0.5, 3).is_err());
        assert!(dtn_extract(&op, &ord, &x, 1.0, 1.5, 8).is_err());
        // far below the quadrature noise floor the fit refuses
        let cfg = DtnConfig {
            t0: 1e-7,
            ratio: 0.99,
            steps: 6,
            tol: 1e-4,
            ..DtnConfig::default()
        };
        assert!(matches!(
            dtn_extract_with(&op, &ord, &x, &cfg),
            Err(Error::FitFailure(_))
        ));
    }
}
