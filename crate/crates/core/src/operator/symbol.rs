use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Sampled symbol `f(x_i)` of a multiplication operator `g ↦ f g`.
///
/// Every value lies in the closed sector `{|arg z| <= θ} ∪ {0}` with
/// `θ ∈ [0, π/2]`. The grid is a finite sample of the underlying domain,
/// so sup norms over it are maxima over the sampled points only.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    points: Vec<f64>,
    values: Vec<Complex64>,
    sector_angle: f64,
}

// Slack for values computed as r·e^{iθ}, whose argument rounds past θ.
const SECTOR_SLACK: f64 = 1e-12;

impl SymbolGrid {
    /// Builds a grid, checking the sector condition against `sector_angle`.
    pub fn new(points: Vec<f64>, values: Vec<Complex64>, sector_angle: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("symbol grid must have at least one value"));
        }
        if points.len() != values.len() {
            return Err(invalid(format!(
                "symbol grid has {} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&sector_angle) {
            return Err(invalid(format!("sector angle {sector_angle} outside [0, pi/2]")));
        }
        for (i, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(invalid(format!("symbol value {i} is not finite")));
            }
            if *v != Complex64::new(0.0, 0.0) && v.arg().abs() > sector_angle + SECTOR_SLACK {
                return Err(invalid(format!(
                    "symbol value {i} = {v} lies outside the sector |arg z| <= {sector_angle}"
                )));
            }
        }
        Ok(Self {
            points,
            values,
            sector_angle,
        })
    }

    /// Grid with points `0, 1, 2, ...` and the tightest admissible sector.
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        let theta = values
            .iter()
            .filter(|v| v.norm() > 0.0)
            .map(|v| v.arg().abs())
            .fold(0.0, f64::max);
        let points = (0..values.len()).map(|i| i as f64).collect();
        Self::new(points, values, theta.min(FRAC_PI_2))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_values(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` at the given points.
    pub fn sample(points: Vec<f64>, f: impl Fn(f64) -> Complex64, sector_angle: f64) -> Result<Self> {
        let values = points.iter().map(|&x| f(x)).collect();
        Self::new(points, values, sector_angle)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sector_angle(&self) -> f64 {
        self.sector_angle
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_is_enforced() {
        let ok = SymbolGrid::from_values(vec![Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)]).unwrap();
        assert!((ok.sector_angle() - FRAC_PI_2).abs() < 1e-15);

        let bad = SymbolGrid::new(vec![0.0], vec![Complex64::new(-1.0, 0.1)], FRAC_PI_2);
        assert!(bad.is_err());
        let narrow = SymbolGrid::new(vec![0.0], vec![Complex64::new(1.0, 1.0)], 0.5);
        assert!(narrow.is_err());
        let zero = SymbolGrid::new(vec![0.0], vec![Complex64::new(0.0, 0.0)], 0.0);
        assert!(zero.is_ok());
    }

    #[test]
    fn shape_errors() {
        assert!(SymbolGrid::new(vec![], vec![], 0.0).is_err());
        assert!(SymbolGrid::new(vec![0.0, 1.0], vec![Complex64::new(1.0, 0.0)], 0.0).is_err());
        assert!(SymbolGrid::from_real(&[1.0, f64::INFINITY]).is_err());
    }
}
