use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::attribution::QuakeAttribution;
use super::calendar::{StudyWindow, YearMonth};
use super::cluster::{agglomerative_cluster, Linkage};
use super::coords::{GeoPoint, LocalProjection};
use crate::error::{Error, Result};
use crate::panel::{ClusterPanel, PanelDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellRecord {
    pub well_id: String,
    pub location: GeoPoint,
    /// Barrels injected per calendar month.
    pub monthly_volumes: BTreeMap<YearMonth, f64>,
}

impl WellRecord {
    pub fn new(
        well_id: impl Into<String>,
        location: GeoPoint,
        monthly_volumes: BTreeMap<YearMonth, f64>,
    ) -> Result<Self> {
        let well_id = well_id.into();
        if let Some((ym, v)) = monthly_volumes
            .iter()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Domain(format!(
                "well {well_id}: invalid volume {v} in {ym}"
            )));
        }
        Ok(Self {
            well_id,
            location,
            monthly_volumes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub n_clusters: usize,
    pub linkage: Linkage,
    pub well_to_cluster: BTreeMap<String, usize>,
    /// Mean member position in projected km, mapped back to degrees.
    pub centroids: Vec<GeoPoint>,
    pub members: Vec<Vec<String>>,
}

/// Clusters wells in a local projection centred on their mean coordinate.
pub fn cluster_wells(
    wells: &[WellRecord],
    n_clusters: usize,
    linkage: Linkage,
) -> Result<ClusterAssignment> {
    let locations: Vec<GeoPoint> = wells.iter().map(|w| w.location).collect();
    let proj = LocalProjection::centred_on(&locations)?;
    let xy: Vec<[f64; 2]> = locations.iter().map(|p| proj.project(*p)).collect();
    let labels = agglomerative_cluster(&xy, n_clusters, linkage)?;

    let mut well_to_cluster = BTreeMap::new();
    let mut members = vec![Vec::new(); n_clusters];
    let mut sums = vec![[0.0f64; 2]; n_clusters];
    for ((w, &k), p) in wells.iter().zip(&labels).zip(&xy) {
        if well_to_cluster.insert(w.well_id.clone(), k).is_some() {
            return Err(Error::Domain(format!("duplicate well id {}", w.well_id)));
        }
        members[k].push(w.well_id.clone());
        sums[k][0] += p[0];
        sums[k][1] += p[1];
    }
    let centroids = sums
        .iter()
        .zip(&members)
        .map(|(s, m)| {
            let n = m.len() as f64;
            proj.unproject([s[0] / n, s[1] / n])
        })
        .collect();
    Ok(ClusterAssignment {
        n_clusters,
        linkage,
        well_to_cluster,
        centroids,
        members,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelBuildReport {
    pub periods: usize,
    /// Well-months inside the window with no report, treated as 0 bbl.
    pub missing_months: usize,
}

pub fn cluster_unit_id(k: usize) -> String {
    format!("cluster_{k:02}")
}

/// Aggregates wells and attributed quakes into one panel per cluster.
pub fn build_panel(
    wells: &[WellRecord],
    assignment: &ClusterAssignment,
    quakes: &QuakeAttribution,
    window: &StudyWindow,
    period_months: usize,
) -> Result<(PanelDataset, PanelBuildReport)> {
    let k_periods = window.periods(period_months)?;
    let n = assignment.n_clusters;
    if quakes.monthly_counts.len() != n {
        return Err(Error::LengthMismatch(format!(
            "quake counts cover {} clusters, assignment has {n}",
            quakes.monthly_counts.len()
        )));
    }

    let mut volume = vec![vec![0.0f64; k_periods]; n];
    let mut report = PanelBuildReport {
        periods: k_periods,
        missing_months: 0,
    };
    for w in wells {
        let k = *assignment
            .well_to_cluster
            .get(&w.well_id)
            .ok_or_else(|| Error::Domain(format!("well {} has no cluster", w.well_id)))?;
        let mut missing: Vec<YearMonth> = Vec::new();
        for (i, ym) in window.months().enumerate() {
            match w.monthly_volumes.get(&ym) {
                Some(v) => volume[k][i / period_months] += v,
                None => missing.push(ym),
            }
        }
        if let Some(first) = missing.first() {
            log::warn!(
                "well {}: {} month(s) without a volume report (first {first}), counted as 0 bbl",
                w.well_id,
                missing.len()
            );
            report.missing_months += missing.len();
        }
    }

    let mut panels = Vec::with_capacity(n);
    for (k, counts) in quakes.monthly_counts.iter().enumerate() {
        let mut per_period = vec![0u64; k_periods];
        for (ym, c) in counts {
            if let Some(i) = window.index_of(*ym) {
                per_period[i / period_months] += c;
            }
        }
        let l: Vec<u8> = per_period.iter().map(|&c| u8::from(c > 0)).collect();
        let y = per_period.iter().sum();
        panels.push(ClusterPanel::new(
            cluster_unit_id(k),
            volume[k].clone(),
            l,
            y,
        )?);
    }
    Ok((PanelDataset::new(panels)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well(id: &str, lon: f64, lat: f64, vols: &[(&str, f64)]) -> WellRecord {
        let m = vols
            .iter()
            .map(|(ym, v)| (ym.parse().unwrap(), *v))
            .collect();
        WellRecord::new(id, GeoPoint::new(lon, lat).unwrap(), m).unwrap()
    }

    #[test]
    fn volumes_sum_within_cluster_and_missing_is_zero() {
        let window =
            StudyWindow::new("2014-01".parse().unwrap(), "2014-08".parse().unwrap()).unwrap();
        let wells = [
            well("w1", -97.0, 33.0, &[("2014-01", 100.0), ("2014-02", 5.0)]),
            well("w2", -97.001, 33.0, &[("2014-01", 200.0)]),
            well("w3", -98.0, 32.0, &[("2014-05", 7.0), ("2013-12", 1e9)]),
        ];
        let assignment = cluster_wells(&wells, 2, Linkage::Ward).unwrap();
        assert_eq!(
            assignment.members[0],
            vec!["w1".to_string(), "w2".to_string()]
        );
        let mut counts = vec![BTreeMap::new(); 2];
        counts[1].insert("2014-06".parse().unwrap(), 2);
        counts[1].insert("2015-01".parse().unwrap(), 9);
        let quakes = QuakeAttribution {
            monthly_counts: counts,
            ..Default::default()
        };
        let (data, report) = build_panel(&wells, &assignment, &quakes, &window, 4).unwrap();
        assert_eq!(report.periods, 2);
        assert_eq!(report.missing_months, 8 * 3 - 4);
        let p0 = &data.panels()[0];
        assert_eq!(p0.treatments(), &[305.0, 0.0]);
        assert_eq!(p0.confounders(), &[0, 0]);
        let p1 = &data.panels()[1];
        assert_eq!(p1.unit_id(), "cluster_01");
        assert_eq!(p1.treatments(), &[0.0, 7.0]);
        assert_eq!(p1.confounders(), &[0, 1]);
        assert_eq!(p1.outcome(), 2);
        assert!(!data.has_baselines());
    }

    #[test]
    fn indivisible_window_rejected() {
        let wells = [well("w1", -97.0, 33.0, &[])];
        let assignment = cluster_wells(&wells, 1, Linkage::Ward).unwrap();
        let quakes = QuakeAttribution {
            monthly_counts: vec![BTreeMap::new()],
            ..Default::default()
        };
        let err =
            build_panel(&wells, &assignment, &quakes, &StudyWindow::default(), 3).unwrap_err();
        assert!(err.to_string().contains("period"));
    }

    #[test]
    fn centroid_is_member_mean() {
        let wells = [well("a", -97.0, 33.0, &[]), well("b", -97.2, 33.2, &[])];
        let c = cluster_wells(&wells, 1, Linkage::Ward).unwrap().centroids[0];
        assert!((c.lon + 97.1).abs() < 1e-9 && (c.lat - 33.1).abs() < 1e-9);
    }

    #[test]
    fn negative_volume_rejected() {
        let m = [("2014-01".parse().unwrap(), -1.0)].into_iter().collect();
        assert!(WellRecord::new("x", GeoPoint::new(0.0, 0.0).unwrap(), m).is_err());
    }
}
