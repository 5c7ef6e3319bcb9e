//! Gutenberg-Richter seismogenic-index quantities.
//!
//! With `log10 N≥M(t) = log10 V_I(t) + Σ - bM`, the factor `10^(Σ - bM)` is
//! the expected number of events of magnitude at least `M` per unit injected
//! volume. Adding a tectonic background rate gives the affine form
//! `N≥M(t) = 10^(a_tec - bM) + V_I(t)·10^(Σ - bM)`.
//!
//! Volumes are in whatever unit `Σ` was calibrated for (the published
//! Oklahoma indices are per million cubic metres); nothing here converts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrParams {
    /// Seismogenic index `Σ`.
    pub sigma: f64,
    /// Gutenberg-Richter slope.
    pub b: f64,
    /// Magnitude of completeness.
    pub magnitude: f64,
    pub a_tec: Option<f64>,
}

impl GrParams {
    pub fn new(sigma: f64, b: f64, magnitude: f64) -> Self {
        Self {
            sigma,
            b,
            magnitude,
            a_tec: None,
        }
    }

    pub fn with_a_tec(mut self, a_tec: f64) -> Self {
        self.a_tec = Some(a_tec);
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || !self.b.is_finite() || !self.magnitude.is_finite() {
            return Err(Error::Domain("GR parameters must be finite".into()));
        }
        Ok(())
    }
}

fn pow10(exponent: f64, what: &str) -> Result<f64> {
    let v = 10f64.powf(exponent);
    if !v.is_finite() {
        return Err(Error::Domain(format!("{what} overflows: 10^{exponent}")));
    }
    Ok(v)
}

/// `10^(Σ - bM)`.
pub fn gr_rate_factor(p: &GrParams) -> Result<f64> {
    p.validate()?;
    pow10(p.sigma - p.b * p.magnitude, "rate factor")
}

/// `10^(a_tec - bM) + volume·10^(Σ - bM)`.
pub fn gr_expected_count(p: &GrParams, volume: f64) -> Result<f64> {
    let a_tec = p
        .a_tec
        .ok_or_else(|| Error::Domain("expected count needs a tectonic term a_tec".into()))?;
    if !a_tec.is_finite() || !volume.is_finite() {
        return Err(Error::Domain("a_tec and volume must be finite".into()));
    }
    let background = pow10(a_tec - p.b * p.magnitude, "background rate")?;
    Ok(background + volume * gr_rate_factor(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn published_oklahoma_factors() {
        let central = gr_rate_factor(&GrParams::new(-0.47, 1.41, 3.0)).unwrap();
        let west = gr_rate_factor(&GrParams::new(-0.63, 1.33, 3.0)).unwrap();
        assert_eq!(format!("{central:.3e}"), "1.995e-5");
        assert_eq!(format!("{west:.3e}"), "2.399e-5");
        assert_eq!(gr_rate_factor(&GrParams::new(0.0, 0.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn expected_count_cases() {
        let p = GrParams::new(-0.47, 1.41, 3.0).with_a_tec(0.0);
        assert_relative_eq!(
            gr_expected_count(&p, 0.0).unwrap(),
            10f64.powf(-4.23),
            max_relative = 1e-14
        );
        let full = gr_expected_count(&p, 1e6).unwrap();
        assert_relative_eq!(
            full,
            10f64.powf(-4.23) + 10f64.powf(-4.70) * 1e6,
            max_relative = 1e-12
        );
        assert!((gr_rate_factor(&p).unwrap() * 1e6 - 19.95).abs() < 0.005);

        let vanishing = p.with_a_tec(-100.0);
        let expected = gr_rate_factor(&p).unwrap() * 1234.5;
        assert!((gr_expected_count(&vanishing, 1234.5).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(gr_expected_count(&GrParams::new(0.0, 1.0, 3.0), 1.0).is_err());
        assert!(gr_rate_factor(&GrParams::new(400.0, 0.0, 0.0)).is_err());
        assert!(gr_rate_factor(&GrParams::new(f64::NAN, 1.0, 3.0)).is_err());
    }
}
