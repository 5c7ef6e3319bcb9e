use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::dgp::{generate_dataset, SimulationConfig};
use crate::error::{Error, Result};
use crate::estimators::{estimate_all, EstimatorKind, EstimatorOptions, EstimatorReport};
use crate::format::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonteCarloOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub estimators: EstimatorOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub avg_point_estimate: f64,
    pub avg_se: f64,
    pub coverage95: f64,
    /// Standard deviation of the point estimates across replicates.
    pub empirical_sd: f64,
    pub estimate_samples: Vec<f64>,
    pub se_samples: Vec<f64>,
}

impl EstimatorSummary {
    /// Monte Carlo standard error of `avg_point_estimate`.
    pub fn mc_standard_error(&self) -> f64 {
        self.empirical_sd / (self.estimate_samples.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    pub reports: Vec<EstimatorReport>,
    pub mean_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub config: SimulationConfig,
    /// Naive, adjusted, MSM.
    pub estimators: Vec<EstimatorSummary>,
    pub replicates: Vec<ReplicateOutcome>,
    /// `(replicate, error)` for excluded replicates.
    pub failures: Vec<(u64, String)>,
}

impl MonteCarloSummary {
    pub fn get(&self, kind: EstimatorKind) -> &EstimatorSummary {
        self.estimators
            .iter()
            .find(|s| s.estimator == kind)
            .expect("summary holds every estimator")
    }

    pub fn mean_weights(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.mean_weight).collect()
    }

    pub const SUMMARY_HEADER: &'static str =
        "estimator,avg_point_estimate,avg_se,coverage95,empirical_sd,mc_se,replicates_used,replicates_failed";

    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        writeln!(out, "{}", Self::SUMMARY_HEADER)?;
        for s in &self.estimators {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.estimator,
                fmt_f64(s.avg_point_estimate),
                fmt_f64(s.avg_se),
                fmt_f64(s.coverage95),
                fmt_f64(s.empirical_sd),
                fmt_f64(s.mc_standard_error()),
                self.replicates.len(),
                self.failures.len()
            )?;
        }
        out.flush()?;
        Ok(())
    }

    /// One row per replicate and estimator, for density plots.
    pub fn write_samples_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        writeln!(out, "replicate,estimator,beta1_hat,se,ci_lo,ci_hi")?;
        for rep in &self.replicates {
            for r in &rep.reports {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    rep.replicate,
                    r.estimator,
                    fmt_f64(r.beta1_hat),
                    fmt_f64(r.se),
                    fmt_f64(r.ci95.0),
                    fmt_f64(r.ci95.1)
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn run_replicate(
    config: &SimulationConfig,
    replicate: u64,
    options: &EstimatorOptions,
) -> Result<ReplicateOutcome> {
    let data = generate_dataset(config, replicate)?;
    let (reports, weights) = estimate_all(&data, options)?;
    Ok(ReplicateOutcome {
        replicate,
        reports,
        mean_weight: weights.mean(),
    })
}

pub fn run_monte_carlo(config: &SimulationConfig) -> Result<MonteCarloSummary> {
    run_monte_carlo_with(config, &MonteCarloOptions::default())
}

/// Runs every replicate, possibly in parallel, and aggregates in replicate order.
pub fn run_monte_carlo_with(
    config: &SimulationConfig,
    options: &MonteCarloOptions,
) -> Result<MonteCarloSummary> {
    config.validate()?;
    let m = config.replicates as u64;
    let work = || -> Vec<Result<ReplicateOutcome>> {
        (0..m)
            .into_par_iter()
            .map(|r| run_replicate(config, r, &options.estimators))
            .collect()
    };
    let results = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut replicates = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (r, res) in (0..m).zip(results) {
        match res {
            Ok(out) => replicates.push(out),
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    if failures.len() as f64 >= 0.01 * config.replicates as f64 {
        return Err(Error::FailureBudget {
            failed: failures.len(),
            total: config.replicates,
            first: failures[0].1.clone(),
        });
    }

    let estimators = EstimatorKind::ALL
        .iter()
        .enumerate()
        .map(|(idx, &kind)| summarize(kind, idx, &replicates, config.causal_effect))
        .collect();
    Ok(MonteCarloSummary {
        config: *config,
        estimators,
        replicates,
        failures,
    })
}

fn summarize(
    kind: EstimatorKind,
    idx: usize,
    reps: &[ReplicateOutcome],
    truth: f64,
) -> EstimatorSummary {
    let n = reps.len() as f64;
    let estimate_samples: Vec<f64> = reps.iter().map(|r| r.reports[idx].beta1_hat).collect();
    let se_samples: Vec<f64> = reps.iter().map(|r| r.reports[idx].se).collect();
    let covered = reps.iter().filter(|r| r.reports[idx].covers(truth)).count();
    let avg = estimate_samples.iter().sum::<f64>() / n;
    let var = if reps.len() > 1 {
        estimate_samples
            .iter()
            .map(|b| (b - avg).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    EstimatorSummary {
        estimator: kind,
        avg_point_estimate: avg,
        avg_se: se_samples.iter().sum::<f64>() / n,
        coverage95: covered as f64 / n,
        empirical_sd: var.sqrt(),
        estimate_samples,
        se_samples,
    }
}
