//! Longitudinal data generation with treatment-confounder feedback.
//!
//! For each unit:
//!
//! ```text
//! U ~ Uniform{u_min..u_max}                     latent seismic risk, discarded
//! p(a) = logistic(cU·U + cA·1[a > threshold])   no intercept
//! A(0) ~ Normal(a0_mean, a0_sd),  L(0) ~ Bern(p(A(0)))
//! for t = 1..K:
//!     A(t) ~ Normal(A(t-1) + penalty·L(t-1) + drift, a_sd)
//!     L(t) ~ Bern(p(A(t)))
//! Y ~ Poisson(exp(causal_effect·cum(ā) + confounding·U))
//! ```
//!
//! Draws are taken unit by unit in exactly this order. Negative volumes are
//! possible in principle and are kept.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::rng::replicate_rng;
use crate::error::{Error, Result};
use crate::panel::{ClusterPanel, PanelDataset};

/// Largest admissible Poisson log-mean.
const MAX_LOG_MEAN: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpParams {
    pub u_min: i32,
    pub u_max: i32,
    pub l_logit_u_coef: f64,
    pub l_logit_a_coef: f64,
    pub a_threshold: f64,
    pub a0_mean: f64,
    pub a0_sd: f64,
    pub a_drift: f64,
    /// Added to the next period's mean when `L(t-1) = 1`.
    pub a_l_penalty: f64,
    pub a_sd: f64,
}

impl Default for DgpParams {
    fn default() -> Self {
        Self {
            u_min: 1,
            u_max: 10,
            l_logit_u_coef: 0.14,
            l_logit_a_coef: 1.1,
            a_threshold: 1000.0,
            a0_mean: 1000.0,
            a0_sd: 60.0,
            a_drift: 15.0,
            a_l_penalty: -55.0,
            a_sd: 60.0,
        }
    }
}

impl DgpParams {
    fn confounder_probability(&self, u: f64, a: f64) -> f64 {
        let above = if a > self.a_threshold { 1.0 } else { 0.0 };
        let logit = self.l_logit_u_coef * u + self.l_logit_a_coef * above;
        1.0 / (1.0 + (-logit).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// True `β1`, per bbl.
    pub causal_effect: f64,
    /// Coefficient of `U` in the outcome log-mean.
    pub confounding: f64,
    pub n_units: usize,
    pub horizon: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub dgp: DgpParams,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            causal_effect: 0.001,
            confounding: 0.1,
            n_units: 50,
            horizon: 8,
            replicates: 2000,
            master_seed: 0,
            dgp: DgpParams::default(),
        }
    }
}

impl SimulationConfig {
    /// The 600-unit sample-size variant.
    pub fn large_sample() -> Self {
        Self {
            n_units: 600,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.dgp;
        let problems = [
            (self.n_units < 2, "n_units must be >= 2"),
            (self.horizon < 1, "horizon must be >= 1"),
            (self.replicates < 1, "replicates must be >= 1"),
            (
                !(d.a0_sd > 0.0) || !(d.a_sd > 0.0),
                "sd parameters must be > 0",
            ),
            (d.u_min > d.u_max, "u_min must not exceed u_max"),
            (
                ![
                    self.causal_effect,
                    self.confounding,
                    d.l_logit_u_coef,
                    d.l_logit_a_coef,
                    d.a_threshold,
                    d.a0_mean,
                    d.a_drift,
                    d.a_l_penalty,
                ]
                .iter()
                .all(|x| x.is_finite()),
                "parameters must be finite",
            ),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::Domain(format!("invalid simulation config: {msg}"))),
            None => Ok(()),
        }
    }
}

/// Generates replicate `replicate` of `config` from its dedicated stream.
pub fn generate_dataset(config: &SimulationConfig, replicate: u64) -> Result<PanelDataset> {
    let mut rng = replicate_rng(config.master_seed, replicate);
    generate_with_rng(config, &mut rng)
}

pub fn generate_with_rng<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<PanelDataset> {
    config.validate()?;
    let d = &config.dgp;
    let baseline = Normal::new(d.a0_mean, d.a0_sd).map_err(|e| Error::Domain(e.to_string()))?;
    let innovation = Normal::new(0.0, d.a_sd).map_err(|e| Error::Domain(e.to_string()))?;
    let k = config.horizon;

    let mut panels = Vec::with_capacity(config.n_units);
    for i in 0..config.n_units {
        let u = f64::from(rng.random_range(d.u_min..=d.u_max));
        let a0 = baseline.sample(rng);
        let l0 = u8::from(rng.random::<f64>() < d.confounder_probability(u, a0));

        let mut a = Vec::with_capacity(k);
        let mut l = Vec::with_capacity(k);
        let (mut a_prev, mut l_prev) = (a0, l0);
        for _ in 0..k {
            let mean = a_prev + d.a_l_penalty * f64::from(l_prev) + d.a_drift;
            let a_t = mean + innovation.sample(rng);
            let l_t = u8::from(rng.random::<f64>() < d.confounder_probability(u, a_t));
            a.push(a_t);
            l.push(l_t);
            (a_prev, l_prev) = (a_t, l_t);
        }

        let cum_a: f64 = a.iter().sum();
        let log_mean = config.causal_effect * cum_a + config.confounding * u;
        if !(log_mean <= MAX_LOG_MEAN) {
            return Err(Error::PoissonOverflow { unit: i, log_mean });
        }
        let y = Poisson::new(log_mean.exp())
            .map_err(|e| Error::Domain(format!("poisson mean {}: {e}", log_mean.exp())))?
            .sample(rng) as u64;

        panels.push(ClusterPanel::new(format!("u{i:04}"), a, l, y)?.with_baseline(a0, l0)?);
    }
    PanelDataset::new(panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimulationConfig {
        SimulationConfig {
            n_units: 20,
            horizon: 5,
            master_seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = generate_dataset(&small(), 4).unwrap();
        let b = generate_dataset(&small(), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_dataset(&small(), 5).unwrap());
    }

    #[test]
    fn output_shape() {
        let d = generate_dataset(&small(), 0).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d.horizon(), 5);
        assert!(d.has_baselines());
        for p in &d {
            assert_eq!(p.treatments().len(), 5);
            assert_eq!(p.confounders().len(), 5);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let cfg = SimulationConfig {
            causal_effect: 1.0,
            ..small()
        };
        assert!(matches!(
            generate_dataset(&cfg, 0),
            Err(Error::PoissonOverflow { .. })
        ));
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            SimulationConfig {
                n_units: 1,
                ..small()
            },
            SimulationConfig {
                horizon: 0,
                ..small()
            },
            SimulationConfig {
                replicates: 0,
                ..small()
            },
            SimulationConfig {
                dgp: DgpParams {
                    a_sd: 0.0,
                    ..Default::default()
                },
                ..small()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn logit_has_no_intercept() {
        let d = DgpParams::default();
        assert_eq!(d.confounder_probability(0.0, 0.0), 0.5);
        let p = d.confounder_probability(1.0, 1000.5);
        assert!((p - 1.0 / (1.0 + (-1.24f64).exp())).abs() < 1e-15);
        // the threshold is strict
        assert_eq!(
            d.confounder_probability(1.0, 1000.0),
            1.0 / (1.0 + (-0.14f64).exp())
        );
    }
}
