//! Longitudinal panel data model.
//!
//! A [`ClusterPanel`] holds one unit's treatment history `A(1..K)` (bbl per
//! period), its binary confounder history `L(1..K)`, an end-of-study count
//! outcome `Y` and optional baseline values `A(0)`, `L(0)`. A
//! [`PanelDataset`] is a collection of panels sharing one horizon `K`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::format::fmt_f64;

/// Threshold used to dichotomise cumulative volume: 5 MMbbl.
pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 5_000_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPanel {
    unit_id: String,
    treatments: Vec<f64>,
    confounders: Vec<u8>,
    baseline_treatment: Option<f64>,
    baseline_confounder: Option<u8>,
    outcome: u64,
    covariates: Vec<f64>,
}

impl ClusterPanel {
    pub fn new(
        unit_id: impl Into<String>,
        treatments: Vec<f64>,
        confounders: Vec<u8>,
        outcome: u64,
    ) -> Result<Self> {
        let unit_id = unit_id.into();
        if treatments.is_empty() {
            return Err(Error::Domain(format!(
                "unit {unit_id}: empty treatment history"
            )));
        }
        if treatments.len() != confounders.len() {
            return Err(Error::LengthMismatch(format!(
                "unit {unit_id}: {} treatments vs {} confounders",
                treatments.len(),
                confounders.len()
            )));
        }
        if let Some(t) = treatments.iter().position(|a| !a.is_finite()) {
            return Err(Error::Domain(format!(
                "unit {unit_id}: non-finite treatment at t={}",
                t + 1
            )));
        }
        if let Some(t) = confounders.iter().position(|&l| l > 1) {
            return Err(Error::Domain(format!(
                "unit {unit_id}: confounder at t={} is {}, expected 0 or 1",
                t + 1,
                confounders[t]
            )));
        }
        Ok(Self {
            unit_id,
            treatments,
            confounders,
            baseline_treatment: None,
            baseline_confounder: None,
            outcome,
            covariates: Vec::new(),
        })
    }

    /// Attaches `A(0)` and `L(0)`.
    pub fn with_baseline(mut self, treatment: f64, confounder: u8) -> Result<Self> {
        if !treatment.is_finite() || confounder > 1 {
            return Err(Error::Domain(format!(
                "unit {}: invalid baseline ({treatment}, {confounder})",
                self.unit_id
            )));
        }
        self.baseline_treatment = Some(treatment);
        self.baseline_confounder = Some(confounder);
        Ok(self)
    }

    pub fn with_covariates(mut self, covariates: Vec<f64>) -> Self {
        self.covariates = covariates;
        self
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn treatments(&self) -> &[f64] {
        &self.treatments
    }

    pub fn confounders(&self) -> &[u8] {
        &self.confounders
    }

    pub fn baseline_treatment(&self) -> Option<f64> {
        self.baseline_treatment
    }

    pub fn baseline_confounder(&self) -> Option<u8> {
        self.baseline_confounder
    }

    pub fn has_baseline(&self) -> bool {
        self.baseline_treatment.is_some() && self.baseline_confounder.is_some()
    }

    pub fn outcome(&self) -> u64 {
        self.outcome
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn horizon(&self) -> usize {
        self.treatments.len()
    }

    /// Treatment at period `t`, where `t = 0` is the baseline.
    pub fn treatment_at(&self, t: usize) -> Option<f64> {
        if t == 0 {
            self.baseline_treatment
        } else {
            self.treatments.get(t - 1).copied()
        }
    }

    /// Confounder at period `t`, where `t = 0` is the baseline.
    pub fn confounder_at(&self, t: usize) -> Option<u8> {
        if t == 0 {
            self.baseline_confounder
        } else {
            self.confounders.get(t - 1).copied()
        }
    }

    pub fn cum_treatment(&self) -> f64 {
        cum_treatment(self)
    }

    pub fn cum_confounder(&self) -> f64 {
        cum_confounder(self)
    }
}

/// `cum(ā) = Σ_{t=1}^K A(t)`.
pub fn cum_treatment(panel: &ClusterPanel) -> f64 {
    panel.treatments.iter().sum()
}

/// `cum(l̄) = Σ_{t=1}^K L(t)`.
pub fn cum_confounder(panel: &ClusterPanel) -> f64 {
    panel.confounders.iter().map(|&l| f64::from(l)).sum()
}

/// Dichotomises cumulative volume: `1` when `cum(ā) >= threshold`.
pub fn binarize_treatment(panel: &ClusterPanel, threshold: f64) -> Result<bool> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::Domain(format!(
            "binarization threshold must be positive, got {threshold}"
        )));
    }
    Ok(cum_treatment(panel) >= threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    panels: Vec<ClusterPanel>,
    horizon: usize,
}

impl PanelDataset {
    pub fn new(panels: Vec<ClusterPanel>) -> Result<Self> {
        let Some(first) = panels.first() else {
            return Err(Error::Domain(
                "panel dataset needs at least one unit".into(),
            ));
        };
        let horizon = first.horizon();
        let mut seen = HashSet::with_capacity(panels.len());
        for p in &panels {
            if p.horizon() != horizon {
                return Err(Error::LengthMismatch(format!(
                    "unit {} has K={} but unit {} has K={}",
                    p.unit_id,
                    p.horizon(),
                    first.unit_id,
                    horizon
                )));
            }
            if !seen.insert(p.unit_id.as_str()) {
                return Err(Error::Domain(format!("duplicate unit_id {}", p.unit_id)));
            }
        }
        Ok(Self { panels, horizon })
    }

    pub fn panels(&self) -> &[ClusterPanel] {
        &self.panels
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ClusterPanel> {
        self.panels.iter()
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    /// Shared number of periods `K`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// True when every unit carries `A(0)` and `L(0)`.
    pub fn has_baselines(&self) -> bool {
        self.panels.iter().all(ClusterPanel::has_baseline)
    }

    pub fn cum_treatments(&self) -> Vec<f64> {
        self.panels.iter().map(cum_treatment).collect()
    }

    pub fn cum_confounders(&self) -> Vec<f64> {
        self.panels.iter().map(cum_confounder).collect()
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.panels.iter().map(|p| p.outcome as f64).collect()
    }

    /// Multiplies every treatment (including baselines) by `factor`.
    pub fn scale_treatments(&self, factor: f64) -> Result<Self> {
        let panels = self
            .panels
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.treatments.iter_mut().for_each(|a| *a *= factor);
                q.baseline_treatment = q.baseline_treatment.map(|a| a * factor);
                q
            })
            .collect();
        Self::new(panels)
    }
}

impl<'a> IntoIterator for &'a PanelDataset {
    type Item = &'a ClusterPanel;
    type IntoIter = std::slice::Iter<'a, ClusterPanel>;

    fn into_iter(self) -> Self::IntoIter {
        self.panels.iter()
    }
}

/// Header of the per-period panel file. Period `0` rows, when present, carry
/// the baseline `A(0)`, `L(0)`.
pub const PANEL_CSV_HEADER: [&str; 4] = ["unit_id", "period", "volume_bbl", "quake_indicator"];
/// Header of the per-unit outcome file.
pub const OUTCOME_CSV_HEADER: [&str; 2] = ["unit_id", "cumulative_quakes"];

pub(crate) fn check_header(
    path: &Path,
    rdr: &mut csv::Reader<File>,
    expected: &[&str],
) -> Result<()> {
    let headers = rdr.headers().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            row: 1,
            column: got.join(","),
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    column: &str,
    raw: Option<&str>,
) -> Result<T> {
    let raw = raw.map(str::trim).unwrap_or("");
    raw.parse().map_err(|_| Error::Schema {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: format!("cannot parse `{raw}`"),
    })
}

/// Reads a dataset from the long-format panel file plus the outcome file.
pub fn read_panel_csv(panel_path: &Path, outcome_path: &Path) -> Result<PanelDataset> {
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Csv {
            path: path.clone(),
            source,
        }
    };

    let mut rows: BTreeMap<String, BTreeMap<usize, (f64, u8)>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut rdr = csv::Reader::from_path(panel_path).map_err(csv_err(panel_path))?;
    check_header(panel_path, &mut rdr, &PANEL_CSV_HEADER)?;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(panel_path))?;
        let unit = rec.get(0).unwrap_or("").trim().to_string();
        if unit.is_empty() {
            return Err(Error::Schema {
                path: panel_path.to_path_buf(),
                row,
                column: "unit_id".into(),
                message: "empty unit id".into(),
            });
        }
        let period: usize = parse_field(panel_path, row, "period", rec.get(1))?;
        let volume: f64 = parse_field(panel_path, row, "volume_bbl", rec.get(2))?;
        let indicator: u8 = parse_field(panel_path, row, "quake_indicator", rec.get(3))?;
        if indicator > 1 || !volume.is_finite() {
            return Err(Error::Schema {
                path: panel_path.to_path_buf(),
                row,
                column: if indicator > 1 {
                    "quake_indicator"
                } else {
                    "volume_bbl"
                }
                .into(),
                message: "value out of range".into(),
            });
        }
        if !rows.contains_key(&unit) {
            order.push(unit.clone());
        }
        if rows
            .entry(unit.clone())
            .or_default()
            .insert(period, (volume, indicator))
            .is_some()
        {
            return Err(Error::Schema {
                path: panel_path.to_path_buf(),
                row,
                column: "period".into(),
                message: format!("duplicate period {period} for unit {unit}"),
            });
        }
    }

    let mut outcomes: BTreeMap<String, u64> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(outcome_path).map_err(csv_err(outcome_path))?;
    check_header(outcome_path, &mut rdr, &OUTCOME_CSV_HEADER)?;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(outcome_path))?;
        let unit = rec.get(0).unwrap_or("").trim().to_string();
        let y: u64 = parse_field(outcome_path, row, "cumulative_quakes", rec.get(1))?;
        outcomes.insert(unit, y);
    }

    let mut panels = Vec::with_capacity(order.len());
    for unit in order {
        let periods = &rows[&unit];
        let baseline = periods.get(&0).copied();
        let observed: Vec<(usize, (f64, u8))> = periods
            .iter()
            .filter(|(&t, _)| t > 0)
            .map(|(&t, &v)| (t, v))
            .collect();
        for (expect, (t, _)) in (1..).zip(&observed) {
            if *t != expect {
                return Err(Error::Schema {
                    path: panel_path.to_path_buf(),
                    row: 0,
                    column: "period".into(),
                    message: format!(
                        "unit {unit}: periods must run 1..K without gaps, missing {expect}"
                    ),
                });
            }
        }
        let y = *outcomes.get(&unit).ok_or_else(|| Error::Schema {
            path: outcome_path.to_path_buf(),
            row: 0,
            column: "unit_id".into(),
            message: format!("no outcome for unit {unit}"),
        })?;
        let (a, l): (Vec<f64>, Vec<u8>) = observed.into_iter().map(|(_, v)| v).unzip();
        let mut panel = ClusterPanel::new(unit, a, l, y)?;
        if let Some((a0, l0)) = baseline {
            panel = panel.with_baseline(a0, l0)?;
        }
        panels.push(panel);
    }
    PanelDataset::new(panels)
}

/// Writes the dataset in the panel + outcome CSV schema.
pub fn write_panel_csv(data: &PanelDataset, panel_path: &Path, outcome_path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(panel_path)?);
    writeln!(out, "{}", PANEL_CSV_HEADER.join(","))?;
    for p in data {
        let start = if p.has_baseline() { 0 } else { 1 };
        for t in start..=p.horizon() {
            writeln!(
                out,
                "{},{},{},{}",
                p.unit_id(),
                t,
                fmt_f64(p.treatment_at(t).unwrap_or_default()),
                p.confounder_at(t).unwrap_or_default()
            )?;
        }
    }
    out.flush()?;

    let mut out = std::io::BufWriter::new(File::create(outcome_path)?);
    writeln!(out, "{}", OUTCOME_CSV_HEADER.join(","))?;
    for p in data {
        writeln!(out, "{},{}", p.unit_id(), p.outcome())?;
    }
    out.flush()?;
    Ok(())
}
