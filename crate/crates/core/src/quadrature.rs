//! Exponential-map trapezoid rules on `(0, ∞)`.
//!
//! With `x = e^u`, integrals `∫_0^∞ x^{p-1} h(x) dx` become
//! `∫_ℝ e^{pu} h(e^u) du`. When the transformed integrand is analytic in a
//! strip `|Im u| < d` and decays at both ends, the trapezoid rule with step
//! `η` converges like `exp(-2πd/η)`, independently of the endpoint
//! singularity `x^{p-1}`. Complex `p` only adds the factor `e^{i Im p u}`,
//! which is entire, so the weight carries the full complex exponent.
//!
//! The adaptive driver halves the step on a fixed window, reusing every
//! earlier node: `S(η/2) = S(η)/2 + (η/2)·Σ_{new nodes}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::operator::Vector;

/// How the nodes of a rule were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// `t = e^u` with the window split at `t = 1` into a head and a tail
    /// segment, each with its own truncation and node budget.
    SplitAtOne,
    /// `s = e^v` with the weight `s^p e^{-s}` built in.
    LaguerreWeighted,
    None,
}

/// A fixed rule `∫_0^∞ (...) ≈ Σ w_j h(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
    transform: Transform,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<Complex64>, transform: Transform) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(invalid("quadrature rule needs one weight per node"));
        }
        if nodes.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("quadrature nodes must be positive and finite"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("quadrature nodes must be strictly increasing"));
        }
        Ok(Self {
            nodes,
            weights,
            transform,
        })
    }

    /// Trapezoid rule in `u = ln x` on the nodes `kη ∈ [lower, upper]` for
    /// `∫_0^∞ x^{exponent-1} h(x) dx`, optionally with `e^{-x}` in the weight.
    pub fn exp_map(exponent: Complex64, step: f64, window: Window, damped: bool, transform: Transform) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("quadrature step must be positive"));
        }
        let (lo, hi) = window.index_range(step);
        let mut nodes = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for k in lo..=hi {
            let u = k as f64 * step;
            let x = u.exp();
            let mut w = (exponent * u).exp() * step;
            if damped {
                w *= (-x).exp();
            }
            nodes.push(x);
            weights.push(w);
        }
        Self::new(nodes, weights, transform)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate_scalar(&self, h: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (&x, &w)| acc + w * h(x))
    }
}

/// Truncation window `[lower, upper]` in the log variable, with `lower <= 0
/// <= upper` so that the split point is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
}

impl Window {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= 0.0 && upper >= 0.0) {
            return Err(invalid(format!("bad quadrature window [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    fn index_range(&self, step: f64) -> (i64, i64) {
        ((self.lower / step).ceil() as i64, (self.upper / step).floor() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    /// Stop once `‖S(η/2) - S(η)‖ <= tol·‖S(η/2)‖`.
    pub tol: f64,
    pub initial_step: f64,
    /// Node budget for each of the two segments `u < 0` and `u >= 0`.
    pub max_nodes_per_segment: usize,
    /// Halvings performed before the stopping test is trusted.
    pub min_halvings: usize,
}

impl AdaptiveConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            initial_step: 1.0,
            max_nodes_per_segment: 1 << 14,
            min_halvings: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrated {
    pub value: Vector,
    /// Norm of the last successive difference.
    pub est_error: f64,
    pub node_count: usize,
    pub step: f64,
}

/// Adaptive trapezoid rule for `∫_window F(u) du`, where `integrand(u)`
/// returns the already-weighted, vector-valued `F(u)`.
///
/// Nodes of one level are evaluated in parallel and summed sequentially in
/// node order, so results do not depend on thread scheduling.
pub fn integrate_adaptive<F>(
    what: &'static str,
    window: Window,
    cfg: &AdaptiveConfig,
    integrand: F,
) -> Result<Integrated>
where
    F: Fn(f64) -> Result<Vector> + Sync,
{
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let mut step = cfg.initial_step;
    let (lo, hi) = window.index_range(step);
    let level0: Vec<f64> = (lo..=hi).map(|k| k as f64 * step).collect();
    let (mut head, mut tail) = count_segments(&level0);
    check_budget(what, head, tail, cfg, f64::INFINITY)?;
    let mut sum = ordered_sum(&level0, &integrand)?;
    let mut value = &sum * Complex64::new(step, 0.0);
    let mut halvings = 0;
    loop {
        let half = step / 2.0;
        // odd multiples of the new step inside the window
        let (lo, hi) = window.index_range(half);
        let first = if lo.rem_euclid(2) == 1 { lo } else { lo + 1 };
        let fresh: Vec<f64> = (first..=hi).step_by(2).map(|k| k as f64 * half).collect();
        let (fresh_head, fresh_tail) = count_segments(&fresh);
        let last_change = if halvings == 0 { f64::INFINITY } else { f64::NAN };
        check_budget(what, head + fresh_head, tail + fresh_tail, cfg, last_change)?;
        sum += ordered_sum(&fresh, &integrand)?;
        head += fresh_head;
        tail += fresh_tail;
        step = half;
        halvings += 1;
        let refined = &sum * Complex64::new(step, 0.0);
        let change = (&refined - &value).norm();
        value = refined;
        if halvings >= cfg.min_halvings && change <= cfg.tol * value.norm() {
            return Ok(Integrated {
                value,
                est_error: change,
                node_count: head + tail,
                step,
            });
        }
        if head + fresh_head.max(1) * 2 > cfg.max_nodes_per_segment
            || tail + fresh_tail.max(1) * 2 > cfg.max_nodes_per_segment
        {
            return Err(Error::NonConvergence {
                what,
                evaluations: head + tail,
                last_change: change / value.norm().max(f64::MIN_POSITIVE),
            });
        }
    }
}

fn count_segments(us: &[f64]) -> (usize, usize) {
    let head = us.iter().filter(|&&u| u < 0.0).count();
    (head, us.len() - head)
}

fn check_budget(what: &'static str, head: usize, tail: usize, cfg: &AdaptiveConfig, last: f64) -> Result<()> {
    if head > cfg.max_nodes_per_segment || tail > cfg.max_nodes_per_segment {
        return Err(Error::NonConvergence {
            what,
            evaluations: head + tail,
            last_change: last,
        });
    }
    Ok(())
}

fn ordered_sum<F>(us: &[f64], integrand: &F) -> Result<Vector>
where
    F: Fn(f64) -> Result<Vector> + Sync,
{
    let terms = us.par_iter().map(|&u| integrand(u)).collect::<Result<Vec<Vector>>>()?;
    let mut iter = terms.into_iter();
    let mut acc = match iter.next() {
        Some(first) => first,
        None => return Err(invalid("quadrature window contains no nodes")),
    };
    for term in iter {
        acc += term;
    }
    if acc.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("quadrature"));
    }
    Ok(acc)
}

/// `K_ν(z) = ½(z/2)^ν ∫_0^∞ r^{-ν-1} e^{-r - z²/(4r)} dr`, valid for
/// `|arg z| < π/4`, by the adaptive rule in `u = ln r`. An independent route
/// to the series in [`crate::special::bessel_k`].
pub fn bessel_k_quadrature(order: Complex64, z: Complex64, tol: f64) -> Result<Integrated> {
    let z2 = z * z;
    if !(z2.re > 0.0 && z2.re.is_finite() && z2.im.is_finite()) {
        return Err(invalid(format!("integral form of K needs |arg z| < π/4, got z = {z}")));
    }
    let window = Window::new((z2.re / 400.0).ln().min(-1.0), 100f64.max(4.0 * order.norm()).ln())?;
    let quarter = z2 / 4.0;
    let mut out = integrate_adaptive("bessel_k", window, &AdaptiveConfig::new(tol), |u| {
        let r = u.exp();
        Ok(Vector::from_element(1, (-order * u - r - quarter / r).exp()))
    })?;
    let pre = 0.5 * crate::special::principal_power(z / 2.0, order)?;
    out.value *= pre;
    out.est_error *= pre.norm();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn scalar(z: Complex64) -> Vector {
        Vector::from_element(1, z)
    }

    #[test]
    fn gamma_moment_by_laguerre_rule() {
        // ∫_0^∞ s^{p-1} e^{-s} ds = Γ(p)
        for p in [
            Complex64::new(0.3, 0.0),
            Complex64::new(0.7, 0.5),
            Complex64::new(2.5, 0.0),
        ] {
            let window = Window::new(-140.0, 4.5).unwrap();
            let rule = QuadratureRule::exp_map(p, 0.1, window, true, Transform::LaguerreWeighted).unwrap();
            let got = rule.integrate_scalar(|_| Complex64::new(1.0, 0.0));
            let want = gamma(p).unwrap();
            assert!((got - want).norm() <= 1e-12 * want.norm(), "{p}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_reuses_nodes_and_converges() {
        // ∫_0^∞ t^{-1/2}/(1+t) dt = π
        let window = Window::new(-80.0, 80.0).unwrap();
        let cfg = AdaptiveConfig::new(1e-12);
        let out = integrate_adaptive("test", window, &cfg, |u| {
            let t = u.exp();
            Ok(scalar(Complex64::new((0.5 * u).exp() / (1.0 + t), 0.0)))
        })
        .unwrap();
        assert!((out.value[0].re - std::f64::consts::PI).abs() < 1e-12);
        assert!(out.est_error < 1e-11);

        // node reuse: the adaptive value equals the fixed rule at the final step
        let rule =
            QuadratureRule::exp_map(Complex64::new(0.5, 0.0), out.step, window, false, Transform::SplitAtOne).unwrap();
        assert_eq!(rule.node_count(), out.node_count);
        let fixed = rule.integrate_scalar(|t| Complex64::new(1.0 / (1.0 + t), 0.0));
        assert!((fixed - out.value[0]).norm() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let window = Window::new(-10.0, 10.0).unwrap();
        let mut cfg = AdaptiveConfig::new(1e-14);
        cfg.max_nodes_per_segment = 64;
        // a kink defeats the exponential convergence of the trapezoid rule
        let res = integrate_adaptive("test", window, &cfg, |u| {
            Ok(scalar(Complex64::new((u - 0.1).abs().sqrt() * (-u * u).exp(), 0.0)))
        });
        assert!(
            matches!(res, Err(Error::NonConvergence { what: "test", .. })),
            "{res:?}"
        );
    }

    #[test]
    fn bessel_k_two_ways() {
        use crate::special::bessel_k;
        for (nu, z) in [
            (Complex64::new(0.3, 0.0), Complex64::new(1.0, 0.0)),
            (Complex64::new(0.7, 0.4), Complex64::new(2.0, 0.5)),
            (Complex64::new(0.5, 0.0), Complex64::new(0.2, -0.1)),
            (Complex64::new(0.25, -0.3), Complex64::new(4.0, 1.0)),
        ] {
            let quad = bessel_k_quadrature(nu, z, 1e-13).unwrap().value[0];
            let series = bessel_k(nu, z).unwrap();
            assert!(
                (quad - series).norm() <= 1e-10 * series.norm(),
                "{nu}, {z}: {quad} vs {series}"
            );
        }
        // K_{1/2}(x) = sqrt(π/2x) e^{-x}
        let quad = bessel_k_quadrature(Complex64::new(0.5, 0.0), Complex64::new(3.0, 0.0), 1e-13)
            .unwrap()
            .value[0];
        let exact = (std::f64::consts::PI / 6.0).sqrt() * (-3f64).exp();
        assert!((quad.re - exact).abs() < 1e-13 * exact);
        assert!(bessel_k_quadrature(Complex64::new(0.5, 0.0), Complex64::new(1.0, 1.5), 1e-10).is_err());
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::new(vec![1.0, 0.5], vec![Complex64::new(1.0, 0.0); 2], Transform::None).is_err());
        assert!(QuadratureRule::new(vec![0.0], vec![Complex64::new(1.0, 0.0)], Transform::None).is_err());
        assert!(QuadratureRule::new(vec![1.0], vec![], Transform::None).is_err());
        assert!(Window::new(1.0, 2.0).is_err());
    }
}
