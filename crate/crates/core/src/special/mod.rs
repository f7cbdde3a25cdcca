//! Complex special functions: principal power, Γ, and modified Bessel
//! functions of complex order.

mod bessel;
mod gamma;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use bessel::{bessel_i, bessel_i_with, bessel_k, bessel_k_with, SeriesConfig};
pub use gamma::{gamma, rgamma};

/// `z^a = exp(a (ln|z| + i arg z))` with `arg z ∈ (-π, π)`.
///
/// The closed negative real axis, including zero, is rejected.
pub fn principal_power(z: Complex64, a: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain { z });
    }
    let log = Complex64::new(z.norm().ln(), z.im.atan2(z.re));
    let value = (a * log).exp();
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("principal_power"))
    }
}

/// Principal power extended by `0^a = 0`, the convention used for
/// spectral values at the origin when `Re a > 0`.
pub fn power_or_zero(z: Complex64, a: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) && a.re > 0.0 {
        Ok(z)
    } else {
        principal_power(z, a)
    }
}
