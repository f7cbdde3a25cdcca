use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, principal_power};

/// A fractional exponent α with `0 < Re α < 1`, together with the
/// constants every route needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct FractionalOrder {
    alpha: Complex64,
    sin_pi_alpha: Complex64,
    c_alpha: Complex64,
    gamma_alpha: Complex64,
}

impl FractionalOrder {
    pub fn new(alpha: Complex64) -> Result<Self> {
        if !(alpha.re > 0.0 && alpha.re < 1.0 && alpha.im.is_finite()) {
            return Err(Error::InvalidOrder { alpha });
        }
        let gamma_alpha = gamma(alpha)?;
        Ok(Self {
            alpha,
            sin_pi_alpha: (alpha * PI).sin(),
            c_alpha: dtn_constant(alpha)?,
            gamma_alpha,
        })
    }

    pub fn real(alpha: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0))
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn re(&self) -> f64 {
        self.alpha.re
    }

    pub fn sin_pi_alpha(&self) -> Complex64 {
        self.sin_pi_alpha
    }

    /// `c_α = Γ(1-α) / (2^{2α-1} Γ(α))`, the constant linking the
    /// Dirichlet-to-Neumann limit to `A^α`.
    pub fn c_alpha(&self) -> Complex64 {
        self.c_alpha
    }

    pub fn gamma_alpha(&self) -> Complex64 {
        self.gamma_alpha
    }

    /// `sin(απ)/π`, the prefactor of the Balakrishnan integral.
    pub fn balakrishnan_prefactor(&self) -> Complex64 {
        self.sin_pi_alpha / PI
    }
}

fn dtn_constant(alpha: Complex64) -> Result<Complex64> {
    let two_pow = principal_power(Complex64::new(2.0, 0.0), 2.0 * alpha - 1.0)?;
    Ok(gamma(1.0 - alpha)? / (two_pow * gamma(alpha)?))
}

impl TryFrom<Complex64> for FractionalOrder {
    type Error = Error;

    fn try_from(alpha: Complex64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<FractionalOrder> for Complex64 {
    fn from(ord: FractionalOrder) -> Self {
        ord.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_half_is_one() {
        let ord = FractionalOrder::real(0.5).unwrap();
        assert!((ord.c_alpha() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn c_alpha_recomputes() {
        for alpha in [
            Complex64::new(0.25, 0.0),
            Complex64::new(0.4, 0.2),
            Complex64::new(0.9, -0.3),
        ] {
            let ord = FractionalOrder::new(alpha).unwrap();
            let direct = gamma(1.0 - alpha).unwrap()
                / (Complex64::new(2.0, 0.0).powc(2.0 * alpha - 1.0) * gamma(alpha).unwrap());
            assert!((ord.c_alpha() - direct).norm() <= 1e-12 * direct.norm());
        }
        // c_{1/4} = Γ(3/4) / (2^{-1/2} Γ(1/4)), 30-digit value
        let ord = FractionalOrder::real(0.25).unwrap();
        assert!((ord.c_alpha().re - 0.477_988_797_486_124_96).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_strip() {
        for a in [0.0, 1.0, -0.2, 1.5] {
            assert!(matches!(FractionalOrder::real(a), Err(Error::InvalidOrder { .. })));
        }
    }
}
