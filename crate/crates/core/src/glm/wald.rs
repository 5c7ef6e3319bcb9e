use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTest {
    pub z: f64,
    /// Two-sided tail probability under the standard normal.
    pub p: f64,
}

pub fn wald_test(beta: f64, se: f64) -> Result<WaldTest> {
    if !(se > 0.0) || !se.is_finite() {
        return Err(Error::Domain(format!("Wald test needs se > 0, got {se}")));
    }
    let z = beta / se;
    let p = erfc(z.abs() / std::f64::consts::SQRT_2);
    Ok(WaldTest { z, p })
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}
