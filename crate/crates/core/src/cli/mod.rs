//! Command-line front end. Exit codes: 0 success, 1 runtime or statistical
//! failure, 2 usage or input-schema failure.

mod manifest;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use manifest::{sha256_file, InputDigest, RunManifest};

use crate::baselines::{gr_expected_count, gr_rate_factor, GrParams};
use crate::error::{Error, Result};
use crate::estimators::{estimate_all, parse_kv_reports, EstimatorOptions, EstimatorReport, MMBBL};
use crate::format::fmt_sig;
use crate::geo::{self, BoundingBox, Linkage, PipelineConfig, StudyWindow, YearMonth};
use crate::glm::HcType;
use crate::iptw::Truncation;
use crate::panel::{read_panel_csv, write_panel_csv, PanelDataset};
use crate::simulate::{
    run_monte_carlo_with, MonteCarloOptions, MonteCarloSummary, SimulationConfig,
};

pub const THREADS_ENV: &str = "LONGICAUSAL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "longicausal",
    version,
    about = "Longitudinal causal effects of injection volume on seismicity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo comparison of the naive, adjusted and MSM estimators.
    Simulate(SimulateArgs),
    /// Estimate effects from a prebuilt panel or from raw wells and catalog.
    Analyze(AnalyzeArgs),
    /// Gutenberg-Richter comparison quantities.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Pretty-print an `estimates.txt` file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct EstimationFlags {
    /// Sandwich flavour for robust standard errors.
    #[arg(long, default_value = "HC0")]
    pub robust: HcType,
    /// Use robust standard errors for the naive and adjusted models too.
    #[arg(long)]
    pub robust_all: bool,
    /// Truncate unit weights at these percentiles, e.g. `1,99`.
    #[arg(long, num_args = 0..=1, default_missing_value = "1,99", value_name = "LO,HI")]
    pub truncate_weights: Option<String>,
}

impl EstimationFlags {
    fn options(&self) -> Result<EstimatorOptions> {
        let truncation = self
            .truncate_weights
            .as_deref()
            .map(parse_truncation)
            .transpose()?;
        Ok(EstimatorOptions {
            robust_all: self.robust_all,
            hc: self.robust,
            truncation,
        })
    }
}

fn parse_truncation(s: &str) -> Result<Truncation> {
    let bad = || {
        Error::Domain(format!(
            "--truncate-weights expects LO,HI percentiles, got `{s}`"
        ))
    };
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lower_percentile: f64 = lo.trim().parse().map_err(|_| bad())?;
    let upper_percentile: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(0.0..=100.0).contains(&lower_percentile)
        || !(lower_percentile..=100.0).contains(&upper_percentile)
    {
        return Err(bad());
    }
    Ok(Truncation {
        lower_percentile,
        upper_percentile,
    })
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Units per dataset.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Periods per unit.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 2000)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.001, allow_hyphen_values = true)]
    pub causal_effect: f64,
    /// Coefficient of the unmeasured confounder in the outcome model.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub confounding: f64,
    /// Shift in next-period treatment mean when a quake occurred.
    #[arg(long, default_value_t = -55.0, allow_hyphen_values = true)]
    pub a_l_penalty: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub estimation: EstimationFlags,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Long-format panel CSV (`unit_id,period,volume_bbl,quake_indicator`).
    #[arg(long, requires = "outcomes", conflicts_with_all = ["wells", "catalog"])]
    pub panel: Option<PathBuf>,
    /// Outcome CSV (`unit_id,cumulative_quakes`).
    #[arg(long, requires = "panel")]
    pub outcomes: Option<PathBuf>,
    /// Well volumes CSV (`well_id,longitude,latitude,year_month,volume_bbl`).
    #[arg(long, requires = "catalog", required_unless_present = "panel")]
    pub wells: Option<PathBuf>,
    /// Earthquake catalog CSV (`event_id,longitude,latitude,origin_time_iso8601,magnitude`).
    #[arg(long, requires = "wells")]
    pub catalog: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub clusters: usize,
    #[arg(long, default_value_t = 15.0)]
    pub radius_km: f64,
    #[arg(long, default_value_t = 4)]
    pub period_months: usize,
    #[arg(long, default_value_t = 2.5, allow_hyphen_values = true)]
    pub mag_cut: f64,
    /// `lon_min,lat_min,lon_max,lat_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<BoundingBox>,
    #[arg(long, default_value = "ward")]
    pub linkage: Linkage,
    /// First study month, `YYYY-MM`.
    #[arg(long, default_value = "2013-12")]
    pub window_start: YearMonth,
    /// Last study month (inclusive), `YYYY-MM`.
    #[arg(long, default_value = "2016-03")]
    pub window_end: YearMonth,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub estimation: EstimationFlags,
}

#[derive(Debug, Subcommand)]
pub enum BaselineCommand {
    /// Prints `10^(sigma - b*m)`, then the expected count when `--a-tec` and `--volume` are given.
    Gr(GrArgs),
}

#[derive(Debug, Args)]
pub struct GrArgs {
    /// Seismogenic index.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Magnitude of completeness.
    #[arg(long, allow_hyphen_values = true)]
    pub m: f64,
    #[arg(long, allow_hyphen_values = true, requires = "volume")]
    pub a_tec: Option<f64>,
    #[arg(long, requires = "a_tec")]
    pub volume: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_schema() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Baseline(BaselineCommand::Gr(a)) => cmd_baseline_gr(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Domain(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn out_path(dir: &Path, name: &str, manifest: &mut RunManifest) -> PathBuf {
    let p = dir.join(name);
    manifest.outputs.push(p.clone());
    p
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let mut config = SimulationConfig {
        causal_effect: a.causal_effect,
        confounding: a.confounding,
        n_units: a.n,
        horizon: a.k,
        replicates: a.m,
        master_seed: a.seed,
        ..SimulationConfig::default()
    };
    config.dgp.a_l_penalty = a.a_l_penalty;
    let options = MonteCarloOptions {
        threads: thread_cap()?,
        estimators: a.estimation.options()?,
    };
    let summary = run_monte_carlo_with(&config, &options)?;

    std::fs::create_dir_all(&a.out_dir)?;
    let mut manifest = RunManifest::new(
        "simulate",
        json!({ "simulation": config, "estimators": options.estimators }),
    );
    summary.write_summary_csv(&out_path(&a.out_dir, "mc_summary.csv", &mut manifest))?;
    summary.write_samples_csv(&out_path(&a.out_dir, "estimate_samples.csv", &mut manifest))?;
    manifest.write(&a.out_dir.join("manifest.json"), started.elapsed())?;
    print_summary(&summary);
    Ok(())
}

fn print_summary(s: &MonteCarloSummary) {
    println!(
        "{:<10} {:>14} {:>14} {:>10} {:>14}",
        "estimator", "avg_estimate", "avg_se", "coverage", "empirical_sd"
    );
    for e in &s.estimators {
        println!(
            "{:<10} {:>14} {:>14} {:>10} {:>14}",
            e.estimator.as_str(),
            fmt_sig(e.avg_point_estimate, 4),
            fmt_sig(e.avg_se, 4),
            fmt_sig(e.coverage95, 3),
            fmt_sig(e.empirical_sd, 4)
        );
    }
    println!(
        "replicates used: {}, failed: {}",
        s.replicates.len(),
        s.failures.len()
    );
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let started = Instant::now();
    let options = a.estimation.options()?;
    std::fs::create_dir_all(&a.out_dir)?;

    let (data, mut manifest) = match (&a.panel, &a.outcomes, &a.wells, &a.catalog) {
        (Some(panel), Some(outcomes), _, _) => {
            let data = read_panel_csv(panel, outcomes)?;
            let mut manifest = RunManifest::new(
                "analyze",
                json!({ "source": "panel", "estimators": options }),
            );
            manifest.add_input(panel)?;
            manifest.add_input(outcomes)?;
            (data, manifest)
        }
        (_, _, Some(wells_path), Some(catalog_path)) => {
            let config = PipelineConfig {
                n_clusters: a.clusters,
                radius_km: a.radius_km,
                magnitude_cut: a.mag_cut,
                period_months: a.period_months,
                window: StudyWindow::new(a.window_start, a.window_end)?,
                bbox: a.bbox.unwrap_or_default(),
                linkage: a.linkage,
            };
            let wells = geo::read_wells_csv(wells_path)?;
            let catalog = geo::read_catalog_csv(catalog_path)?;
            let out = geo::run_pipeline(&wells, &catalog, &config)?;
            let mut manifest = RunManifest::new(
                "analyze",
                json!({
                    "source": "wells+catalog",
                    "pipeline": config,
                    "estimators": options,
                    "wells_outside_bbox": out.wells_outside_bbox,
                    "quakes_in_scope": out.quakes_in_scope,
                    "quakes_assigned": out.attribution.assigned_total(),
                    "quakes_unassigned": out.attribution.unassigned,
                    "quakes_below_cut": out.attribution.below_cut,
                    "missing_well_months": out.build.missing_months,
                }),
            );
            manifest.add_input(wells_path)?;
            manifest.add_input(catalog_path)?;
            let panel_out = out_path(&a.out_dir, "panel.csv", &mut manifest);
            let outcome_out = out_path(&a.out_dir, "outcomes.csv", &mut manifest);
            write_panel_csv(&out.dataset, &panel_out, &outcome_out)?;
            write_clusters_csv(
                &out.assignment,
                &out_path(&a.out_dir, "clusters.csv", &mut manifest),
            )?;
            (out.dataset, manifest)
        }
        _ => {
            return Err(Error::Domain(
                "analyze needs --panel/--outcomes or --wells/--catalog".into(),
            ))
        }
    };

    let reports = analyze_dataset(&data, &options, &a.out_dir, &mut manifest)?;
    manifest.write(&a.out_dir.join("manifest.json"), started.elapsed())?;
    print_reports(&reports);
    Ok(())
}

fn analyze_dataset(
    data: &PanelDataset,
    options: &EstimatorOptions,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<Vec<EstimatorReport>> {
    let (reports, weights) = estimate_all(data, options)?;
    let mut csv = String::from(EstimatorReport::CSV_HEADER);
    csv.push('\n');
    let mut kv = String::new();
    for r in &reports {
        csv.push_str(&r.to_csv_row());
        csv.push('\n');
        kv.push_str(&r.to_kv());
        kv.push('\n');
    }
    std::fs::write(out_path(out_dir, "estimates.csv", manifest), csv)?;
    std::fs::write(out_path(out_dir, "estimates.txt", manifest), kv)?;
    weights.write_diagnostics_csv(&out_path(out_dir, "weights.csv", manifest))?;
    Ok(reports)
}

fn write_clusters_csv(assignment: &geo::ClusterAssignment, path: &Path) -> Result<()> {
    let mut out = String::from("well_id,cluster,unit_id,centroid_longitude,centroid_latitude\n");
    for (well, &k) in &assignment.well_to_cluster {
        let c = assignment.centroids[k];
        out.push_str(&format!(
            "{well},{k},{},{},{}\n",
            geo::panel_build::cluster_unit_id(k),
            c.lon,
            c.lat
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn print_reports(reports: &[EstimatorReport]) {
    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>10} {:>10} {:>8}",
        "estimator", "rr_per_mmbbl", "beta1_hat", "se", "z", "p", "se_type"
    );
    for r in reports {
        println!(
            "{:<10} {:>12} {:>12} {:>12} {:>10} {:>10} {:>8}",
            r.estimator.as_str(),
            fmt_sig(r.relative_risk_per_mmbbl, 5),
            fmt_sig(r.beta1_hat, 4),
            fmt_sig(r.se, 4),
            fmt_sig(r.z, 4),
            fmt_sig(r.p, 3),
            r.se_kind.to_string()
        );
    }
    println!(
        "(beta1 and se per bbl; se per MMbbl = se x {})",
        fmt_sig(MMBBL, 1)
    );
}

pub fn cmd_baseline_gr(a: &GrArgs) -> Result<()> {
    let mut params = GrParams::new(a.sigma, a.b, a.m);
    println!("{}", fmt_sig(gr_rate_factor(&params)?, 4));
    if let (Some(a_tec), Some(volume)) = (a.a_tec, a.volume) {
        params = params.with_a_tec(a_tec);
        println!("{}", fmt_sig(gr_expected_count(&params, volume)?, 4));
    }
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.input)?;
    let reports = parse_kv_reports(&text)?;
    if reports.is_empty() {
        return Err(Error::Domain(format!(
            "{} holds no estimator blocks",
            a.input.display()
        )));
    }
    print_reports(&reports);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn parse_exit_codes() {
        assert_eq!(
            run(["longicausal", "baseline", "gr", "--sigma", "0", "--b", "0"]),
            2
        );
        assert_eq!(run(["longicausal", "frobnicate"]), 2);
        assert_eq!(run(["longicausal", "--help"]), 0);
        assert_eq!(
            run([
                "longicausal",
                "baseline",
                "gr",
                "--sigma",
                "-0.47",
                "--b",
                "1.41",
                "--m",
                "3"
            ]),
            0
        );
    }

    #[test]
    fn truncation_flag() {
        assert_eq!(parse_truncation("1,99").unwrap().upper_percentile, 99.0);
        assert!(parse_truncation("99,1").is_err());
        assert!(parse_truncation("abc").is_err());
    }
}
