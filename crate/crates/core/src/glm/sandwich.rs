use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FitResult;
use crate::error::{Error, Result};

/// Heteroskedasticity-consistent covariance flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HcType {
    #[default]
    HC0,
    /// HC0 scaled by `n / (n - p)`.
    HC1,
}

impl std::str::FromStr for HcType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "HC0" => Ok(HcType::HC0),
            "HC1" => Ok(HcType::HC1),
            other => Err(format!(
                "unknown sandwich type `{other}` (expected HC0 or HC1)"
            )),
        }
    }
}

impl std::fmt::Display for HcType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HcType::HC0 => "HC0",
            HcType::HC1 => "HC1",
        })
    }
}

/// Bread-meat-bread covariance `B⁻¹ M B⁻¹`.
///
/// The bread is the weighted Fisher information `Σ w_i V(μ_i) x_i x_iᵀ` and
/// the meat is `Σ (w_i (y_i - μ_i))² x_i x_iᵀ`, the outer product of the
/// per-observation scores of the canonical-link likelihood. For the Gaussian
/// family the residual scale cancels between the two.
pub fn sandwich_cov(
    fit: &FitResult,
    design: &DMatrix<f64>,
    response: &[f64],
    weights: Option<&[f64]>,
    hc: HcType,
) -> Result<DMatrix<f64>> {
    if !fit.converged {
        return Err(Error::Domain(
            "sandwich covariance needs a converged fit".into(),
        ));
    }
    let (n, p) = design.shape();
    if response.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::LengthMismatch(
            "design, response and weights must share the row count".into(),
        ));
    }
    if fit.coefficients.len() != p {
        return Err(Error::LengthMismatch(format!(
            "fit has {} coefficients but design has {p} columns",
            fit.coefficients.len()
        )));
    }

    let mut bread = DMatrix::<f64>::zeros(p, p);
    let mut meat = DMatrix::<f64>::zeros(p, p);
    for i in 0..n {
        let w = weights.map_or(1.0, |w| w[i]);
        if w == 0.0 {
            continue;
        }
        let row: Vec<f64> = design.row(i).iter().copied().collect();
        let mu = fit.predict_mean(&row);
        let v = fit.family.variance(mu);
        let score = w * (response[i] - mu);
        for a in 0..p {
            for b in 0..p {
                let xx = row[a] * row[b];
                bread[(a, b)] += w * v * xx;
                meat[(a, b)] += score * score * xx;
            }
        }
    }

    let bread_inv = bread
        .cholesky()
        .ok_or_else(|| {
            Error::SingularDesign("sandwich bread matrix is not positive definite".into())
        })?
        .inverse();
    let mut cov: DMatrix<f64> = &bread_inv * meat * &bread_inv;
    if hc == HcType::HC1 {
        if n <= p {
            return Err(Error::Domain(format!("HC1 needs n > p, got n={n}, p={p}")));
        }
        cov *= n as f64 / (n - p) as f64;
    }
    Ok((&cov + cov.transpose()) * 0.5)
}
