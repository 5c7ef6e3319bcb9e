//! Generalized linear models fit by iteratively reweighted least squares.
//!
//! Three families are supported, each with its canonical link: Gaussian
//! (identity), Bernoulli (logit) and Poisson (log). Observation weights are
//! prior weights in the likelihood, `Σ w_i ℓ_i(β)`, which is how inverse
//! probability weights enter the marginal structural model fit.

mod sandwich;
mod wald;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

pub use sandwich::{sandwich_cov, HcType};
pub use wald::{normal_cdf, wald_test, WaldTest};

use crate::error::{Error, Result};

/// Cap on the linear predictor of the log link to keep `exp` finite.
const MAX_LOG_MEAN: f64 = 700.0;
/// Fitted probabilities this close to 0 or 1 indicate separation.
const SEPARATION_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Logistic,
    Poisson,
}

impl Family {
    fn inverse_link(self, eta: f64) -> f64 {
        match self {
            Family::Linear => eta,
            Family::Logistic => 1.0 / (1.0 + (-eta).exp()),
            Family::Poisson => eta.min(MAX_LOG_MEAN).exp(),
        }
    }

    fn link(self, mu: f64) -> f64 {
        match self {
            Family::Linear => mu,
            Family::Logistic => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
        }
    }

    /// Variance function `V(μ)`; also `dμ/dη` for canonical links.
    fn variance(self, mu: f64) -> f64 {
        match self {
            Family::Linear => 1.0,
            Family::Logistic => mu * (1.0 - mu),
            Family::Poisson => mu,
        }
    }

    fn unit_deviance(self, y: f64, mu: f64) -> f64 {
        match self {
            Family::Linear => (y - mu).powi(2),
            Family::Logistic => -2.0 * (xlogy(y, mu) + xlogy(1.0 - y, 1.0 - mu)),
            Family::Poisson => 2.0 * (xlogy(y, y) - xlogy(y, mu) - (y - mu)),
        }
    }

    fn starting_mean(self, y: f64) -> f64 {
        match self {
            Family::Linear => y,
            Family::Logistic => (y + 0.5) / 2.0,
            Family::Poisson => y + 0.1,
        }
    }
}

/// `x·ln(y)` with the convention `0·ln(0) = 0`.
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Divisor used for the Gaussian residual scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ResidualScale {
    /// `Σ w r² / n`, the maximum-likelihood estimate.
    #[default]
    MaximumLikelihood,
    /// `Σ w r² / (n - p)`.
    Unbiased,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmOptions {
    /// Relative deviance change that stops IRLS.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative pivot threshold of the rank check.
    pub pivot_tolerance: f64,
    pub residual_scale: ResidualScale,
    /// Populate [`FitResult::robust_cov`] with this sandwich flavour.
    pub robust: Option<HcType>,
}

impl Default for GlmOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            pivot_tolerance: 1e-12,
            residual_scale: ResidualScale::MaximumLikelihood,
            robust: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: DVector<f64>,
    pub model_cov: DMatrix<f64>,
    pub robust_cov: Option<DMatrix<f64>>,
    pub family: Family,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub deviance: f64,
    /// Gaussian residual scale; `None` for the other families.
    pub residual_sd: Option<f64>,
    /// Fitted means `μ̂`.
    pub fitted: DVector<f64>,
}

impl FitResult {
    pub fn model_se(&self, j: usize) -> f64 {
        self.model_cov[(j, j)].max(0.0).sqrt()
    }

    pub fn robust_se(&self, j: usize) -> Option<f64> {
        self.robust_cov.as_ref().map(|c| c[(j, j)].max(0.0).sqrt())
    }

    /// Linear predictor for a single covariate row.
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(self.coefficients.iter())
            .map(|(x, b)| x * b)
            .sum()
    }

    pub fn predict_mean(&self, row: &[f64]) -> f64 {
        self.family.inverse_link(self.linear_predictor(row))
    }
}

/// Fits `family` with default [`GlmOptions`].
pub fn fit_glm(
    design: &DMatrix<f64>,
    response: &[f64],
    family: Family,
    weights: Option<&[f64]>,
) -> Result<FitResult> {
    fit_glm_with(design, response, family, weights, &GlmOptions::default())
}

pub fn fit_glm_with(
    design: &DMatrix<f64>,
    response: &[f64],
    family: Family,
    weights: Option<&[f64]>,
    options: &GlmOptions,
) -> Result<FitResult> {
    let p = design.ncols();
    let weights: Vec<f64> = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; design.nrows()],
    };
    validate(design, response, family, &weights)?;
    check_rank(design, &weights, options.pivot_tolerance)?;

    let y = response;
    let (beta, iterations, mut converged) = match family {
        Family::Linear => {
            let sol = weighted_least_squares(design, &weights, y)?;
            (sol, 1, true)
        }
        Family::Logistic | Family::Poisson => irls(design, y, family, &weights, options)?,
    };

    let eta = design * &beta;
    let mu = eta.map(|e| family.inverse_link(e));
    let deviance = total_deviance(family, y, mu.as_slice(), &weights);

    if family == Family::Logistic
        && mu
            .iter()
            .zip(&weights)
            .any(|(&m, &w)| w > 0.0 && !(SEPARATION_EPS..=1.0 - SEPARATION_EPS).contains(&m))
    {
        converged = false;
    }

    let n_eff = weights.iter().filter(|&&w| w > 0.0).count();
    let residual_sd = (family == Family::Linear).then(|| {
        let rss: f64 = y
            .iter()
            .zip(mu.iter())
            .zip(&weights)
            .map(|((yi, mi), wi)| wi * (yi - mi).powi(2))
            .sum();
        let denom = match options.residual_scale {
            ResidualScale::MaximumLikelihood => n_eff as f64,
            ResidualScale::Unbiased => (n_eff as f64 - p as f64).max(1.0),
        };
        (rss / denom).sqrt()
    });

    let working: Vec<f64> = mu
        .iter()
        .zip(&weights)
        .map(|(&m, &w)| w * family.variance(m))
        .collect();
    let mut model_cov = inverse_information(design, &working)?;
    if let Some(sd) = residual_sd {
        model_cov *= sd * sd;
    }

    let log_likelihood = log_likelihood(family, y, mu.as_slice(), &weights, residual_sd);

    let mut fit = FitResult {
        coefficients: beta,
        model_cov,
        robust_cov: None,
        family,
        converged,
        iterations,
        log_likelihood,
        deviance,
        residual_sd,
        fitted: mu,
    };
    if let Some(hc) = options.robust {
        if fit.converged {
            fit.robust_cov = Some(sandwich_cov(&fit, design, response, Some(&weights), hc)?);
        }
    }
    Ok(fit)
}

fn validate(design: &DMatrix<f64>, y: &[f64], family: Family, w: &[f64]) -> Result<()> {
    let (n, p) = design.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch(format!(
            "design has {n} rows but response has {} entries",
            y.len()
        )));
    }
    if w.len() != n {
        return Err(Error::LengthMismatch(format!(
            "design has {n} rows but weights have {} entries",
            w.len()
        )));
    }
    if p == 0 {
        return Err(Error::Domain("design has no columns".into()));
    }
    if n < p {
        return Err(Error::Domain(format!("need n >= p, got n={n}, p={p}")));
    }
    if design.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("design contains non-finite entries".into()));
    }
    if let Some(i) = w.iter().position(|&wi| !(wi >= 0.0) || !wi.is_finite()) {
        return Err(Error::Domain(format!(
            "weight {i} is {} (must be finite, >= 0)",
            w[i]
        )));
    }
    for (i, &yi) in y.iter().enumerate() {
        let ok = yi.is_finite()
            && match family {
                Family::Linear => true,
                Family::Logistic => yi == 0.0 || yi == 1.0,
                Family::Poisson => yi >= 0.0,
            };
        if !ok {
            return Err(Error::Domain(format!(
                "response {i} = {yi} outside the {family:?} support"
            )));
        }
    }
    Ok(())
}

/// Rank check by column-pivoted Gram-Schmidt on the weighted, column-normalised design.
fn check_rank(design: &DMatrix<f64>, w: &[f64], tol: f64) -> Result<()> {
    let (n, p) = design.shape();
    let mut cols: Vec<DVector<f64>> = (0..p)
        .map(|j| DVector::from_iterator(n, (0..n).map(|i| design[(i, j)] * w[i].sqrt())))
        .collect();
    for (j, c) in cols.iter_mut().enumerate() {
        let norm = c.norm();
        if norm == 0.0 {
            return Err(Error::SingularDesign(format!(
                "column {j} is identically zero"
            )));
        }
        *c /= norm;
    }
    let mut remaining: Vec<usize> = (0..p).collect();
    let mut first_pivot = None;
    while !remaining.is_empty() {
        let (pos, norm) = remaining
            .iter()
            .enumerate()
            .map(|(k, &j)| (k, cols[j].norm()))
            .fold(
                (0, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        let first = *first_pivot.get_or_insert(norm);
        if norm <= tol * first {
            return Err(Error::SingularDesign(format!(
                "column {} is collinear with the others",
                remaining[pos]
            )));
        }
        let j = remaining.swap_remove(pos);
        let q = &cols[j] / norm;
        for &k in &remaining {
            let proj = q.dot(&cols[k]);
            cols[k] -= &q * proj;
        }
    }
    Ok(())
}

fn weighted_least_squares(x: &DMatrix<f64>, w: &[f64], z: &[f64]) -> Result<DVector<f64>> {
    let (n, p) = x.shape();
    let mut xs = x.clone();
    let mut zs = DVector::zeros(n);
    for i in 0..n {
        let s = w[i].sqrt();
        for j in 0..p {
            xs[(i, j)] *= s;
        }
        zs[i] = z[i] * s;
    }
    let qr = xs.qr();
    let qtz = qr.q().transpose() * zs;
    qr.r()
        .solve_upper_triangular(&qtz)
        .ok_or_else(|| Error::SingularDesign("weighted design lost rank during IRLS".into()))
}

/// `(Xᵀ W X)⁻¹` through the QR factor of `√W X`.
fn inverse_information(x: &DMatrix<f64>, w: &[f64]) -> Result<DMatrix<f64>> {
    let (n, p) = x.shape();
    let mut xs = x.clone();
    for i in 0..n {
        let s = w[i].sqrt();
        for j in 0..p {
            xs[(i, j)] *= s;
        }
    }
    let r = xs.qr().r();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::SingularDesign("information matrix is singular".into()))?;
    let cov = &r_inv * r_inv.transpose();
    Ok((&cov + cov.transpose()) * 0.5)
}

fn total_deviance(family: Family, y: &[f64], mu: &[f64], w: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .zip(w)
        .map(|((&yi, &mi), &wi)| {
            if wi > 0.0 {
                wi * family.unit_deviance(yi, mi)
            } else {
                0.0
            }
        })
        .sum()
}

fn log_likelihood(family: Family, y: &[f64], mu: &[f64], w: &[f64], sd: Option<f64>) -> f64 {
    if family == Family::Linear && sd == Some(0.0) {
        return f64::INFINITY;
    }
    let mut ll = 0.0;
    for ((&yi, &mi), &wi) in y.iter().zip(mu).zip(w) {
        if wi == 0.0 {
            continue;
        }
        ll += match family {
            Family::Poisson => wi * (xlogy(yi, mi) - mi - ln_gamma(yi + 1.0)),
            Family::Logistic => wi * (xlogy(yi, mi) + xlogy(1.0 - yi, 1.0 - mi)),
            Family::Linear => {
                let s2 = sd.unwrap_or(0.0).powi(2);
                0.5 * wi.ln()
                    - 0.5 * (2.0 * std::f64::consts::PI * s2).ln()
                    - wi * (yi - mi).powi(2) / (2.0 * s2)
            }
        };
    }
    ll
}

fn irls(
    x: &DMatrix<f64>,
    y: &[f64],
    family: Family,
    w: &[f64],
    options: &GlmOptions,
) -> Result<(DVector<f64>, usize, bool)> {
    let n = y.len();
    let mut mu: Vec<f64> = y.iter().map(|&yi| family.starting_mean(yi)).collect();
    let mut eta: Vec<f64> = mu.iter().map(|&m| family.link(m)).collect();
    let mut dev_old = total_deviance(family, y, &mu, w);
    let mut beta_old: Option<DVector<f64>> = None;
    let mut beta = DVector::zeros(x.ncols());
    let mut working_w = vec![0.0; n];
    let mut z = vec![0.0; n];

    for iter in 1..=options.max_iterations {
        for i in 0..n {
            let v = family.variance(mu[i]).max(f64::MIN_POSITIVE);
            working_w[i] = w[i] * v;
            z[i] = eta[i] + (y[i] - mu[i]) / v;
        }
        beta = weighted_least_squares(x, &working_w, &z)?;

        let mut dev_new = f64::NAN;
        for _halving in 0..30 {
            let eta_new = x * &beta;
            let mu_new: Vec<f64> = eta_new.iter().map(|&e| family.inverse_link(e)).collect();
            dev_new = total_deviance(family, y, &mu_new, w);
            let worse = !dev_new.is_finite() || dev_new > dev_old * (1.0 + 1e-12) + 1e-12;
            match (&beta_old, worse) {
                (Some(prev), true) => beta = (&beta + prev) * 0.5,
                _ => {
                    eta = eta_new.iter().copied().collect();
                    mu = mu_new;
                    break;
                }
            }
        }

        let rel = (dev_new - dev_old).abs() / (dev_new.abs() + 0.1);
        dev_old = dev_new;
        beta_old = Some(beta.clone());
        if rel < options.tolerance {
            return Ok((beta, iter, true));
        }
    }
    Ok((beta, options.max_iterations, false))
}
