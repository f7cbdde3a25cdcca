//! Modified Bessel functions of complex order by power series.
//!
//! `I_ν(z) = Σ (z/2)^{2k+ν} / (k! Γ(k+ν+1))` and, for non-integer ν, the
//! connection formula `K_ν(z) = π / (2 sin νπ) · (I_{-ν}(z) - I_ν(z))`.
//! The difference cancels like `e^{2|z|}`, so K loses roughly
//! `2|z|/ln 10` digits; callers keep `|z|` moderate.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::rgamma;
use super::principal_power;
use crate::error::{Error, Result};

/// Truncation controls for the I series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Largest admissible `|z|`.
    pub radius: f64,
    pub max_terms: usize,
    /// Stop once `|term| < rel_tol * |partial sum|`.
    pub rel_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            radius: 30.0,
            max_terms: 400,
            rel_tol: 1e-16,
        }
    }
}

fn integer_order(order: Complex64) -> Option<i64> {
    (order.im == 0.0 && order.re.fract() == 0.0).then_some(order.re as i64)
}

pub fn bessel_i(order: Complex64, z: Complex64) -> Result<Complex64> {
    bessel_i_with(order, z, &SeriesConfig::default())
}

pub fn bessel_i_with(order: Complex64, z: Complex64, cfg: &SeriesConfig) -> Result<Complex64> {
    let modulus = z.norm();
    if !modulus.is_finite() || !(order.re.is_finite() && order.im.is_finite()) {
        return Err(Error::NonFinite("bessel_i argument"));
    }
    if modulus > cfg.radius {
        return Err(Error::SeriesRadius {
            modulus,
            radius: cfg.radius,
        });
    }
    // I_{-n} = I_n for integer n.
    let order = match integer_order(order) {
        Some(n) if n < 0 => Complex64::new(-(n as f64), 0.0),
        _ => order,
    };
    let half = z * 0.5;
    let leading_power = if modulus == 0.0 {
        if order == Complex64::new(0.0, 0.0) {
            Complex64::new(1.0, 0.0)
        } else if order.re > 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        } else {
            return Err(Error::Domain { z });
        }
    } else if let Some(n) = integer_order(order) {
        half.powi(n as i32)
    } else {
        principal_power(half, order)?
    };

    let mut term = leading_power * rgamma(order + 1.0)?;
    let quarter_sq = half * half;
    let mut sum = term;
    for k in 0..cfg.max_terms {
        let kf = k as f64 + 1.0;
        term = term * quarter_sq / (kf * (order + kf));
        sum += term;
        if term.norm() < cfg.rel_tol * sum.norm() || term.norm() == 0.0 {
            return if sum.re.is_finite() && sum.im.is_finite() {
                Ok(sum)
            } else {
                Err(Error::NonFinite("bessel_i"))
            };
        }
    }
    Err(Error::NonConvergence {
        what: "bessel_i series",
        evaluations: cfg.max_terms,
        last_change: term.norm() / sum.norm(),
    })
}

pub fn bessel_k(order: Complex64, z: Complex64) -> Result<Complex64> {
    bessel_k_with(order, z, &SeriesConfig::default())
}

pub fn bessel_k_with(order: Complex64, z: Complex64, cfg: &SeriesConfig) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain { z });
    }
    let sin = (order * PI).sin();
    if sin.norm() < 1e-8 {
        return Err(Error::DegenerateOrder { order });
    }
    let minus = bessel_i_with(-order, z, cfg)?;
    let plus = bessel_i_with(order, z, cfg)?;
    Ok(PI / (2.0 * sin) * (minus - plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn i_at_origin() {
        assert_eq!(bessel_i(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(bessel_i(c(0.4, 0.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(bessel_i(c(-0.4, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn half_order_closed_forms() {
        // I_{1/2}(z) = sqrt(2/(πz)) sinh z, K_{1/2}(z) = sqrt(π/(2z)) e^{-z}
        let i = bessel_i(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert!(rel(i, c((2.0 / PI).sqrt() * 1f64.sinh(), 0.0)) < 1e-14);
        assert!((i.re - 0.937_674_888_3).abs() < 1e-10);

        let k1 = bessel_k(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert!(rel(k1, c((PI / 2.0).sqrt() * (-1f64).exp(), 0.0)) < 1e-14);
        assert!((k1.re - 0.461_068_504_4).abs() < 1e-10);

        let k2 = bessel_k(c(0.5, 0.0), c(2.0, 0.0)).unwrap();
        assert!((k2.re - 0.119_937_771_9).abs() < 1e-10);
    }

    // mpmath, 50 digits.
    #[test]
    fn matches_arbitrary_precision_oracle() {
        let i = bessel_i(c(0.3, 0.0), c(2.0, 0.0)).unwrap();
        assert!(rel(i, c(2.177_637_989_553_738, 0.0)) < 1e-14);

        let k = bessel_k(c(0.3, 0.0), c(1.0, 0.0)).unwrap();
        assert!(rel(k, c(0.435_076_024_208_802_02, 0.0)) < 1e-13);

        let (order, z) = (c(0.3, 0.2), c(1.5, 0.7));
        let i = bessel_i(order, z).unwrap();
        assert!(rel(i, c(1.310_696_798_567_243, 0.587_570_425_750_645_7)) < 1e-14);
        let k = bessel_k(order, z).unwrap();
        assert!(rel(k, c(0.134_745_172_849_462_08, -0.160_849_876_119_381_6)) < 1e-12);

        let big = bessel_i(c(0.7, 0.0), c(25.0, 0.0)).unwrap();
        assert!(rel(big, c(5_717_077_800.685_541, 0.0)) < 1e-13);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            bessel_i(c(0.3, 0.0), c(31.0, 0.0)),
            Err(Error::SeriesRadius { .. })
        ));
        assert!(matches!(
            bessel_k(c(1.0, 0.0), c(1.0, 0.0)),
            Err(Error::DegenerateOrder { .. })
        ));
        assert!(matches!(bessel_k(c(0.3, 0.0), c(-1.0, 0.0)), Err(Error::Domain { .. })));
        let cfg = SeriesConfig {
            max_terms: 3,
            ..SeriesConfig::default()
        };
        assert!(matches!(
            bessel_i_with(c(0.3, 0.0), c(10.0, 0.0), &cfg),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn negative_integer_order_reflects() {
        let a = bessel_i(c(-2.0, 0.0), c(1.3, 0.2)).unwrap();
        let b = bessel_i(c(2.0, 0.0), c(1.3, 0.2)).unwrap();
        assert!(rel(a, b) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn k_is_even_in_order(
            re in -0.9f64..0.9, im in -0.5f64..0.5,
            zr in 0.1f64..6.0, zi in -3.0f64..3.0,
        ) {
            let order = c(re, im);
            prop_assume!((order * PI).sin().norm() > 1e-3);
            let z = c(zr, zi);
            let a = bessel_k(order, z).unwrap();
            let b = bessel_k(-order, z).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }
}
