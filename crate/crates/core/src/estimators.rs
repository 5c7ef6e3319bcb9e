//! The three competing outcome regressions for the effect of cumulative
//! volume on a cumulative count:
//!
//! | estimator  | model                                   | weights   | SE          |
//! |------------|-----------------------------------------|-----------|-------------|
//! | `naive`    | `log E[Y] = η0 + η1 cum(ā)`             | none      | model-based |
//! | `adjusted` | `log E[Y] = γ0 + γ1 cum(ā) + γ2 cum(l̄)` | none      | model-based |
//! | `msm`      | `log E[Y^ā] = β0 + β1 cum(ā)`           | `SW_i(K)` | sandwich    |
//!
//! All coefficients are per bbl; reports also carry the relative risk for a
//! 1 MMbbl increase, `exp(β1 · 1e6)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::glm::{fit_glm, sandwich_cov, wald_test, Family, FitResult, HcType};
use crate::iptw::{compute_stabilized_weights, Truncation, WeightSet};
use crate::panel::PanelDataset;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;
/// One million barrels.
pub const MMBBL: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Naive,
    Adjusted,
    Msm,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::Naive,
        EstimatorKind::Adjusted,
        EstimatorKind::Msm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Naive => "naive",
            EstimatorKind::Adjusted => "adjusted",
            EstimatorKind::Msm => "msm",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(EstimatorKind::Naive),
            "adjusted" => Ok(EstimatorKind::Adjusted),
            "msm" => Ok(EstimatorKind::Msm),
            other => Err(Error::Domain(format!("unknown estimator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeKind {
    Model,
    Robust(HcType),
}

impl fmt::Display for SeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeKind::Model => f.write_str("model"),
            SeKind::Robust(hc) => write!(f, "{hc}"),
        }
    }
}

impl FromStr for SeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "model" {
            return Ok(SeKind::Model);
        }
        s.parse::<HcType>()
            .map(SeKind::Robust)
            .map_err(Error::Domain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub estimator: EstimatorKind,
    /// Coefficient on `cum(ā)`, per bbl.
    pub beta1_hat: f64,
    pub se: f64,
    pub se_kind: SeKind,
    pub ci95: (f64, f64),
    pub relative_risk_per_mmbbl: f64,
    pub z: f64,
    pub p: f64,
}

impl EstimatorReport {
    pub fn new(estimator: EstimatorKind, beta1_hat: f64, se: f64, se_kind: SeKind) -> Result<Self> {
        let wald = wald_test(beta1_hat, se)?;
        Ok(Self {
            estimator,
            beta1_hat,
            se,
            se_kind,
            ci95: (beta1_hat - Z_95 * se, beta1_hat + Z_95 * se),
            relative_risk_per_mmbbl: (beta1_hat * MMBBL).exp(),
            z: wald.z,
            p: wald.p,
        })
    }

    pub fn covers(&self, truth: f64) -> bool {
        self.ci95.0 <= truth && truth <= self.ci95.1
    }

    pub const CSV_HEADER: &'static str =
        "estimator,beta1_hat,se,se_type,ci_lo,ci_hi,rr_per_mmbbl,z,p";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.estimator,
            fmt_f64(self.beta1_hat),
            fmt_f64(self.se),
            self.se_kind,
            fmt_f64(self.ci95.0),
            fmt_f64(self.ci95.1),
            fmt_f64(self.relative_risk_per_mmbbl),
            fmt_f64(self.z),
            fmt_f64(self.p)
        )
    }

    /// `key = value` lines, one report per block.
    pub fn to_kv(&self) -> String {
        format!(
            "[{}]\nbeta1_hat = {}\nse = {}\nse_type = {}\nci_lo = {}\nci_hi = {}\nrr_per_mmbbl = {}\nz = {}\np = {}\n",
            self.estimator,
            fmt_f64(self.beta1_hat),
            fmt_f64(self.se),
            self.se_kind,
            fmt_f64(self.ci95.0),
            fmt_f64(self.ci95.1),
            fmt_f64(self.relative_risk_per_mmbbl),
            fmt_f64(self.z),
            fmt_f64(self.p)
        )
    }
}

/// Parses the block format written by [`EstimatorReport::to_kv`].
pub fn parse_kv_reports(text: &str) -> Result<Vec<EstimatorReport>> {
    let mut blocks: Vec<(EstimatorKind, BTreeMap<String, String>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            blocks.push((name.trim().parse()?, BTreeMap::new()));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Domain(format!("line {}: expected `key = value`", lineno + 1)))?;
        let Some((_, map)) = blocks.last_mut() else {
            return Err(Error::Domain(format!(
                "line {}: value before any [estimator] header",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    blocks
        .into_iter()
        .map(|(kind, map)| {
            let num = |k: &str| -> Result<f64> {
                map.get(k)
                    .ok_or_else(|| Error::Domain(format!("[{kind}] missing `{k}`")))?
                    .parse()
                    .map_err(|_| Error::Domain(format!("[{kind}] `{k}` is not a number")))
            };
            let se_kind = map
                .get("se_type")
                .ok_or_else(|| Error::Domain(format!("[{kind}] missing `se_type`")))?
                .parse()?;
            Ok(EstimatorReport {
                estimator: kind,
                beta1_hat: num("beta1_hat")?,
                se: num("se")?,
                se_kind,
                ci95: (num("ci_lo")?, num("ci_hi")?),
                relative_risk_per_mmbbl: num("rr_per_mmbbl")?,
                z: num("z")?,
                p: num("p")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Report sandwich SEs for the naive and adjusted models too.
    pub robust_all: bool,
    /// Sandwich flavour for every robust SE (the MSM always uses one).
    pub hc: HcType,
    pub truncation: Option<Truncation>,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            robust_all: false,
            hc: HcType::HC0,
            truncation: None,
        }
    }
}

fn design(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns[0].len();
    DMatrix::from_fn(n, columns.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            columns[j - 1][i]
        }
    })
}

fn require_units(data: &PanelDataset) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::Domain(format!(
            "outcome regressions need at least 2 units, got {}",
            data.len()
        )));
    }
    Ok(())
}

fn report_from_fit(
    kind: EstimatorKind,
    fit: &FitResult,
    x: &DMatrix<f64>,
    y: &[f64],
    weights: Option<&[f64]>,
    robust: Option<HcType>,
) -> Result<EstimatorReport> {
    if !fit.converged {
        return Err(Error::Domain(format!(
            "{kind} Poisson fit did not converge"
        )));
    }
    let beta1 = fit.coefficients[1];
    let (se, se_kind) = match robust {
        Some(hc) => {
            let cov = sandwich_cov(fit, x, y, weights, hc)?;
            (cov[(1, 1)].max(0.0).sqrt(), SeKind::Robust(hc))
        }
        None => (fit.model_se(1), SeKind::Model),
    };
    EstimatorReport::new(kind, beta1, se, se_kind)
}

/// Unweighted Poisson regression of `Y` on `cum(ā)`.
pub fn naive_poisson(data: &PanelDataset, options: &EstimatorOptions) -> Result<EstimatorReport> {
    require_units(data)?;
    let x = design(&[&data.cum_treatments()]);
    let y = data.outcomes();
    let fit = fit_glm(&x, &y, Family::Poisson, None)?;
    let robust = options.robust_all.then_some(options.hc);
    report_from_fit(EstimatorKind::Naive, &fit, &x, &y, None, robust)
}

/// Unweighted Poisson regression of `Y` on `cum(ā)` and `cum(l̄)`.
///
/// When `cum(l̄)` is the same for every unit the column is absorbed by the
/// intercept and the fit reduces to the naive model.
pub fn adjusted_poisson(
    data: &PanelDataset,
    options: &EstimatorOptions,
) -> Result<EstimatorReport> {
    require_units(data)?;
    let cum_a = data.cum_treatments();
    let cum_l = data.cum_confounders();
    let x = if cum_l.iter().all(|&l| l == cum_l[0]) {
        design(&[&cum_a])
    } else {
        design(&[&cum_a, &cum_l])
    };
    let y = data.outcomes();
    let fit = fit_glm(&x, &y, Family::Poisson, None)?;
    let robust = options.robust_all.then_some(options.hc);
    report_from_fit(EstimatorKind::Adjusted, &fit, &x, &y, None, robust)
}

/// Weighted Poisson regression of `Y` on `cum(ā)` with given unit weights and
/// sandwich SE.
pub fn msm_with_weights(
    data: &PanelDataset,
    weights: &[f64],
    hc: HcType,
) -> Result<EstimatorReport> {
    require_units(data)?;
    if weights.len() != data.len() {
        return Err(Error::LengthMismatch(format!(
            "{} weights for {} units",
            weights.len(),
            data.len()
        )));
    }
    let x = design(&[&data.cum_treatments()]);
    let y = data.outcomes();
    let fit = fit_glm(&x, &y, Family::Poisson, Some(weights))?;
    report_from_fit(EstimatorKind::Msm, &fit, &x, &y, Some(weights), Some(hc))
}

/// MSM fit by stabilized IPTW; also returns the weights used.
pub fn fit_msm(
    data: &PanelDataset,
    options: &EstimatorOptions,
) -> Result<(EstimatorReport, WeightSet)> {
    require_units(data)?;
    let weights = compute_stabilized_weights(data, options.truncation)?;
    let report = msm_with_weights(data, &weights.per_unit_weights, options.hc)?;
    Ok((report, weights))
}

pub fn msm_iptw(data: &PanelDataset, options: &EstimatorOptions) -> Result<EstimatorReport> {
    fit_msm(data, options).map(|(r, _)| r)
}

/// Runs all three estimators in the order naive, adjusted, MSM.
pub fn estimate_all(
    data: &PanelDataset,
    options: &EstimatorOptions,
) -> Result<(Vec<EstimatorReport>, WeightSet)> {
    let naive = naive_poisson(data, options)?;
    let adjusted = adjusted_poisson(data, options)?;
    let (msm, weights) = fit_msm(data, options)?;
    Ok((vec![naive, adjusted, msm], weights))
}

/// `exp(β1 · scale)`, e.g. the relative risk for a 1 MMbbl increase.
pub fn relative_risk(beta1: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "relative risk scale must be positive, got {scale}"
        )));
    }
    let rr = (beta1 * scale).exp();
    if !rr.is_finite() {
        return Err(Error::Domain(format!(
            "relative risk overflows for beta1={beta1}, scale={scale}"
        )));
    }
    Ok(rr)
}
