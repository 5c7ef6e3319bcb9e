//! Inverse probability of treatment weighting.
//!
//! Two weight constructions live here:
//!
//! * stabilized weights for a continuous, time-varying treatment,
//!   `SW_i(K) = Π_t f[A(t) | A(t-1)] / f[A(t) | A(t-1), L(t-1)]`, where both
//!   conditional densities come from pooled Gaussian linear regressions on
//!   the previous period only;
//! * the time-fixed propensity weights `1/ê` and `1/(1-ê)` for a dichotomised
//!   cumulative treatment, with `ê` from a logistic regression.
//!
//! When the panels carry baselines `A(0)`, `L(0)` the weight product runs
//! over `t = 1..K`. Without baselines the first observed period has no
//! predecessor, so it is treated as a baseline covariate and the product
//! runs over `t = 2..K` (its factor is recorded as `1`).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::glm::{fit_glm, Family, FitResult};
use crate::panel::{binarize_treatment, PanelDataset};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Propensities closer than this to 0 or 1 violate positivity.
const POSITIVITY_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentModels {
    /// `A(t) ~ 1 + A(t-1)`.
    pub numerator: FitResult,
    /// `A(t) ~ 1 + A(t-1) + L(t-1)`, or the numerator design when `L(t-1)`
    /// is constant in the pooled data.
    pub denominator: FitResult,
    /// First period whose density ratio enters the product.
    pub first_period: usize,
    pub confounder_dropped: bool,
}

struct PooledRows {
    /// (unit index, t)
    index: Vec<(usize, usize)>,
    current: Vec<f64>,
    prev_treatment: Vec<f64>,
    prev_confounder: Vec<f64>,
}

fn pooled_rows(data: &PanelDataset) -> Result<(PooledRows, usize)> {
    let first_period = if data.has_baselines() { 1 } else { 2 };
    let k = data.horizon();
    let cap = data.len() * (k + 1 - first_period.min(k + 1));
    let mut rows = PooledRows {
        index: Vec::with_capacity(cap),
        current: Vec::with_capacity(cap),
        prev_treatment: Vec::with_capacity(cap),
        prev_confounder: Vec::with_capacity(cap),
    };
    for (i, panel) in data.iter().enumerate() {
        for t in first_period..=k {
            // both lookups succeed: t - 1 >= 0 is a baseline only when present
            let (Some(a), Some(a_prev), Some(l_prev)) = (
                panel.treatment_at(t),
                panel.treatment_at(t - 1),
                panel.confounder_at(t - 1),
            ) else {
                continue;
            };
            rows.index.push((i, t));
            rows.current.push(a);
            rows.prev_treatment.push(a_prev);
            rows.prev_confounder.push(f64::from(l_prev));
        }
    }
    Ok((rows, first_period))
}

/// Fits the pooled numerator and denominator treatment-density models.
pub fn fit_treatment_models(data: &PanelDataset) -> Result<TreatmentModels> {
    let (rows, first_period) = pooled_rows(data)?;
    let n = rows.current.len();
    if n < 5 {
        return Err(Error::Domain(format!(
            "treatment models need at least 5 pooled (unit, period) observations, got {n}"
        )));
    }

    let numerator_design = DMatrix::from_fn(n, 2, |i, j| match j {
        0 => 1.0,
        _ => rows.prev_treatment[i],
    });
    let numerator = fit_glm(&numerator_design, &rows.current, Family::Linear, None)?;

    let first_l = rows.prev_confounder[0];
    let confounder_dropped = rows.prev_confounder.iter().all(|&l| l == first_l);
    let denominator = if confounder_dropped {
        numerator.clone()
    } else {
        let design = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => rows.prev_treatment[i],
            _ => rows.prev_confounder[i],
        });
        fit_glm(&design, &rows.current, Family::Linear, None)?
    };

    Ok(TreatmentModels {
        numerator,
        denominator,
        first_period,
        confounder_dropped,
    })
}

/// Gaussian log-density `ln φ(x; mean, sd)`.
pub fn normal_log_density(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -LN_SQRT_2PI - sd.ln() - 0.5 * z * z
}

/// One per-period factor: numerator density over denominator density.
pub fn weight_factor(
    treatment: f64,
    num_mean: f64,
    num_sd: f64,
    den_mean: f64,
    den_sd: f64,
) -> f64 {
    (normal_log_density(treatment, num_mean, num_sd)
        - normal_log_density(treatment, den_mean, den_sd))
    .exp()
}

/// Symmetric percentile truncation of the unit weights, e.g. `[1, 99]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub lower_percentile: f64,
    pub upper_percentile: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            lower_percentile: 1.0,
            upper_percentile: 99.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedTruncation {
    pub bounds: Truncation,
    pub lower_value: f64,
    pub upper_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub unit_ids: Vec<String>,
    /// `SW_i(K)`, after truncation when it is enabled.
    pub per_unit_weights: Vec<f64>,
    /// `[N × K]` density ratios; column `t-1` holds period `t`.
    pub per_time_factors: DMatrix<f64>,
    pub models: TreatmentModels,
    pub truncation: Option<AppliedTruncation>,
}

impl WeightSet {
    pub fn mean(&self) -> f64 {
        self.per_unit_weights.iter().sum::<f64>() / self.per_unit_weights.len() as f64
    }

    /// Product of the per-time factors, i.e. the weights before truncation.
    pub fn untruncated_weights(&self) -> Vec<f64> {
        self.per_time_factors
            .row_iter()
            .map(|r| r.iter().map(|f| f.ln()).sum::<f64>().exp())
            .collect()
    }

    /// Writes `unit_id,t,factor,cumulative_weight` rows.
    pub fn write_diagnostics_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        writeln!(out, "unit_id,t,factor,cumulative_weight")?;
        for (i, unit) in self.unit_ids.iter().enumerate() {
            let mut log_cum = 0.0;
            for t in 0..self.per_time_factors.ncols() {
                let f = self.per_time_factors[(i, t)];
                log_cum += f.ln();
                writeln!(
                    out,
                    "{unit},{},{},{}",
                    t + 1,
                    fmt_f64(f),
                    fmt_f64(log_cum.exp())
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Evaluates `SW_i(K)` for every unit under fitted treatment models.
pub fn stabilized_weights(
    data: &PanelDataset,
    models: &TreatmentModels,
    truncation: Option<Truncation>,
) -> Result<WeightSet> {
    let num_sd = models.numerator.residual_sd.unwrap_or(0.0);
    let den_sd = models.denominator.residual_sd.unwrap_or(0.0);
    if !(num_sd > 0.0) || !(den_sd > 0.0) {
        return Err(Error::DegenerateVariance(format!(
            "treatment model residual sd is zero (numerator {num_sd}, denominator {den_sd})"
        )));
    }

    let k = data.horizon();
    let mut factors = DMatrix::from_element(data.len(), k, 1.0);
    let mut weights = Vec::with_capacity(data.len());
    for (i, panel) in data.iter().enumerate() {
        let mut log_sw = 0.0;
        for t in models.first_period..=k {
            let (Some(a), Some(a_prev), Some(l_prev)) = (
                panel.treatment_at(t),
                panel.treatment_at(t - 1),
                panel.confounder_at(t - 1),
            ) else {
                return Err(Error::Domain(format!(
                    "unit {} lacks the period {} history the weight model needs",
                    panel.unit_id(),
                    t - 1
                )));
            };
            let num_mean = models.numerator.linear_predictor(&[1.0, a_prev]);
            let den_mean = if models.confounder_dropped {
                models.denominator.linear_predictor(&[1.0, a_prev])
            } else {
                models
                    .denominator
                    .linear_predictor(&[1.0, a_prev, f64::from(l_prev)])
            };
            let log_factor =
                normal_log_density(a, num_mean, num_sd) - normal_log_density(a, den_mean, den_sd);
            let factor = log_factor.exp();
            if !factor.is_finite() || factor <= 0.0 {
                return Err(Error::NonFiniteWeight {
                    unit: panel.unit_id().to_string(),
                    t,
                });
            }
            factors[(i, t - 1)] = factor;
            log_sw += log_factor;
        }
        let sw = log_sw.exp();
        if !sw.is_finite() || sw <= 0.0 {
            return Err(Error::NonFiniteWeight {
                unit: panel.unit_id().to_string(),
                t: k,
            });
        }
        weights.push(sw);
    }

    let applied = match truncation {
        Some(bounds) => Some(truncate(&mut weights, bounds)?),
        None => None,
    };

    Ok(WeightSet {
        unit_ids: data.iter().map(|p| p.unit_id().to_string()).collect(),
        per_unit_weights: weights,
        per_time_factors: factors,
        models: models.clone(),
        truncation: applied,
    })
}

/// Fits the treatment models and evaluates the stabilized weights.
pub fn compute_stabilized_weights(
    data: &PanelDataset,
    truncation: Option<Truncation>,
) -> Result<WeightSet> {
    let models = fit_treatment_models(data)?;
    stabilized_weights(data, &models, truncation)
}

fn truncate(weights: &mut [f64], bounds: Truncation) -> Result<AppliedTruncation> {
    let Truncation {
        lower_percentile: lo,
        upper_percentile: hi,
    } = bounds;
    if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo > hi {
        return Err(Error::Domain(format!(
            "invalid truncation percentiles [{lo}, {hi}]"
        )));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lower_value = percentile(&sorted, lo);
    let upper_value = percentile(&sorted, hi);
    for w in weights.iter_mut() {
        *w = w.clamp(lower_value, upper_value);
    }
    Ok(AppliedTruncation {
        bounds,
        lower_value,
        upper_value,
    })
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * pct / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// How the binary IPTW contrast normalises each arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IptwForm {
    /// Self-normalised within arm: `Σ w Y / Σ w`.
    #[default]
    Hajek,
    /// Arm size as denominator: `(1/N_a) Σ w Y`.
    ArmSize,
}

/// Covariates of the propensity model; an intercept is always included.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PropensityModel {
    #[default]
    InterceptOnly,
    /// The panels' time-fixed covariates `X`.
    PanelCovariates,
    /// Explicit `[N × q]` covariate matrix in dataset order.
    Columns(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryAte {
    pub ate: f64,
    pub treated_mean: f64,
    pub control_mean: f64,
    pub n_treated: usize,
    pub n_control: usize,
    pub propensities: Vec<f64>,
}

/// ATE of the dichotomised cumulative treatment (`cum(ā) >= threshold`).
pub fn ate_iptw_binary(
    data: &PanelDataset,
    threshold: f64,
    propensity: &PropensityModel,
    form: IptwForm,
) -> Result<BinaryAte> {
    let treated: Vec<bool> = data
        .iter()
        .map(|p| binarize_treatment(p, threshold))
        .collect::<Result<_>>()?;
    check_arms(&treated)?;

    let n = data.len();
    let covariates: DMatrix<f64> = match propensity {
        PropensityModel::InterceptOnly => DMatrix::zeros(n, 0),
        PropensityModel::PanelCovariates => {
            let q = data.panels()[0].covariates().len();
            if let Some(p) = data.iter().find(|p| p.covariates().len() != q) {
                return Err(Error::LengthMismatch(format!(
                    "unit {} has {} covariates, expected {q}",
                    p.unit_id(),
                    p.covariates().len()
                )));
            }
            DMatrix::from_fn(n, q, |i, j| data.panels()[i].covariates()[j])
        }
        PropensityModel::Columns(m) => {
            if m.nrows() != n {
                return Err(Error::LengthMismatch(format!(
                    "propensity covariates have {} rows for {n} units",
                    m.nrows()
                )));
            }
            m.clone()
        }
    };
    let design = DMatrix::from_fn(n, covariates.ncols() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            covariates[(i, j - 1)]
        }
    });
    let response: Vec<f64> = treated.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let fit = fit_glm(&design, &response, Family::Logistic, None)?;
    let scores: Vec<f64> = fit.fitted.iter().copied().collect();

    let ids: Vec<&str> = data.iter().map(|p| p.unit_id()).collect();
    check_positivity(&ids, &scores)?;
    if !fit.converged {
        return Err(Error::Domain("propensity model did not converge".into()));
    }
    ate_from_propensities(&ids, &treated, &data.outcomes(), &scores, form)
}

fn check_arms(treated: &[bool]) -> Result<()> {
    if !treated.iter().any(|&t| t) {
        return Err(Error::EmptyArm { arm: 1 });
    }
    if treated.iter().all(|&t| t) {
        return Err(Error::EmptyArm { arm: 0 });
    }
    Ok(())
}

fn check_positivity(ids: &[&str], scores: &[f64]) -> Result<()> {
    for (id, &e) in ids.iter().zip(scores) {
        if !(e > POSITIVITY_EPS && e < 1.0 - POSITIVITY_EPS) {
            return Err(Error::Positivity {
                unit: id.to_string(),
                score: e,
            });
        }
    }
    Ok(())
}

/// Weighted arm contrast given known propensity scores.
pub fn ate_from_propensities(
    unit_ids: &[&str],
    treated: &[bool],
    outcomes: &[f64],
    propensities: &[f64],
    form: IptwForm,
) -> Result<BinaryAte> {
    let n = treated.len();
    if outcomes.len() != n || propensities.len() != n || unit_ids.len() != n {
        return Err(Error::LengthMismatch(
            "treatment, outcome, propensity and id vectors must align".into(),
        ));
    }
    check_arms(treated)?;
    check_positivity(unit_ids, propensities)?;

    let (mut sw1, mut swy1, mut n1) = (0.0, 0.0, 0usize);
    let (mut sw0, mut swy0, mut n0) = (0.0, 0.0, 0usize);
    for i in 0..n {
        if treated[i] {
            let w = 1.0 / propensities[i];
            sw1 += w;
            swy1 += w * outcomes[i];
            n1 += 1;
        } else {
            let w = 1.0 / (1.0 - propensities[i]);
            sw0 += w;
            swy0 += w * outcomes[i];
            n0 += 1;
        }
    }
    let (treated_mean, control_mean) = match form {
        IptwForm::Hajek => (swy1 / sw1, swy0 / sw0),
        IptwForm::ArmSize => (swy1 / n1 as f64, swy0 / n0 as f64),
    };
    Ok(BinaryAte {
        ate: treated_mean - control_mean,
        treated_mean,
        control_mean,
        n_treated: n1,
        n_control: n0,
        propensities: propensities.to_vec(),
    })
}
