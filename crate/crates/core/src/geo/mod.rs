//! From well-injection records and an earthquake catalog to a cluster panel.
//!
//! Wells are clustered in a local projection; quakes are attributed by
//! haversine distance on raw coordinates to the nearest cluster centroid
//! within the radius, then both are aggregated into fixed-length periods.

pub mod attribution;
pub mod calendar;
pub mod cluster;
pub mod coords;
pub mod io;
pub mod panel_build;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use attribution::{
    assign_quakes, nearest_within, QuakeAttribution, QuakeRecord, DEFAULT_MAGNITUDE_CUT,
    DEFAULT_RADIUS_KM,
};
pub use calendar::{StudyWindow, YearMonth};
pub use cluster::{agglomerative_cluster, Linkage};
pub use coords::{haversine_km, project_coords, GeoPoint, LocalProjection, EARTH_RADIUS_KM};
pub use io::{read_catalog_csv, read_wells_csv, write_catalog_csv, write_wells_csv};
pub use panel_build::{
    build_panel, cluster_wells, ClusterAssignment, PanelBuildReport, WellRecord,
};

use crate::error::{Error, Result};
use crate::panel::PanelDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lon_min: f64,
    pub lat_min: f64,
    pub lon_max: f64,
    pub lat_max: f64,
}

impl Default for BoundingBox {
    fn default() -> Self {
        Self {
            lon_min: -98.38,
            lat_min: 32.07,
            lon_max: -96.74,
            lat_max: 33.68,
        }
    }
}

impl BoundingBox {
    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.lon_min..=self.lon_max).contains(&p.lon)
            && (self.lat_min..=self.lat_max).contains(&p.lat)
    }
}

impl FromStr for BoundingBox {
    type Err = Error;

    /// `lon_min,lat_min,lon_max,lat_max`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Domain(format!("bounding box `{s}` is not four numbers")))?;
        let [lon_min, lat_min, lon_max, lat_max] = v[..] else {
            return Err(Error::Domain(format!(
                "bounding box `{s}` needs lon_min,lat_min,lon_max,lat_max"
            )));
        };
        GeoPoint::new(lon_min, lat_min)?;
        GeoPoint::new(lon_max, lat_max)?;
        if lon_min >= lon_max || lat_min >= lat_max {
            return Err(Error::Domain(format!("bounding box `{s}` is empty")));
        }
        Ok(Self {
            lon_min,
            lat_min,
            lon_max,
            lat_max,
        })
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.lon_min, self.lat_min, self.lon_max, self.lat_max
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n_clusters: usize,
    pub radius_km: f64,
    pub magnitude_cut: f64,
    pub period_months: usize,
    pub window: StudyWindow,
    pub bbox: BoundingBox,
    pub linkage: Linkage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_clusters: 30,
            radius_km: DEFAULT_RADIUS_KM,
            magnitude_cut: DEFAULT_MAGNITUDE_CUT,
            period_months: 4,
            window: StudyWindow::default(),
            bbox: BoundingBox::default(),
            linkage: Linkage::Ward,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub dataset: PanelDataset,
    pub assignment: ClusterAssignment,
    pub attribution: QuakeAttribution,
    pub build: PanelBuildReport,
    pub wells_outside_bbox: usize,
    /// Catalog rows inside the box and window, before the magnitude cut.
    pub quakes_in_scope: usize,
    pub quakes_out_of_scope: usize,
}

pub fn run_pipeline(
    wells: &[WellRecord],
    catalog: &[QuakeRecord],
    config: &PipelineConfig,
) -> Result<PipelineOutput> {
    config.window.periods(config.period_months)?;
    let kept: Vec<WellRecord> = wells
        .iter()
        .filter(|w| config.bbox.contains(w.location))
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(Error::Domain("no wells inside the bounding box".into()));
    }
    let scoped: Vec<QuakeRecord> = catalog
        .iter()
        .filter(|q| {
            config.bbox.contains(q.location)
                && config.window.contains(YearMonth::of(&q.origin_time))
        })
        .cloned()
        .collect();

    let assignment = cluster_wells(&kept, config.n_clusters, config.linkage)?;
    let attribution = assign_quakes(
        &assignment.centroids,
        &scoped,
        config.radius_km,
        config.magnitude_cut,
    )?;
    let (dataset, build) = build_panel(
        &kept,
        &assignment,
        &attribution,
        &config.window,
        config.period_months,
    )?;
    log::info!(
        "pipeline: {} wells -> {} clusters, {} quakes assigned, {} unassigned",
        kept.len(),
        config.n_clusters,
        attribution.assigned_total(),
        attribution.unassigned
    );
    Ok(PipelineOutput {
        dataset,
        assignment,
        attribution,
        build,
        wells_outside_bbox: wells.len() - kept.len(),
        quakes_in_scope: scoped.len(),
        quakes_out_of_scope: catalog.len() - scoped.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_parsing() {
        let b: BoundingBox = "-98.38,32.07,-96.74,33.68".parse().unwrap();
        assert_eq!(b, BoundingBox::default());
        assert_eq!(b.to_string().parse::<BoundingBox>().unwrap(), b);
        assert!("1,2,3".parse::<BoundingBox>().is_err());
        assert!("0,0,-1,1".parse::<BoundingBox>().is_err());
    }

    #[test]
    fn synthetic_defaults_give_30_units_and_7_periods() {
        let corpus = synthetic::synthetic_corpus(7);
        let out = run_pipeline(&corpus.wells, &corpus.catalog, &PipelineConfig::default()).unwrap();
        assert_eq!(out.dataset.len(), 30);
        assert_eq!(out.dataset.horizon(), 7);
        let a = &out.attribution;
        assert_eq!(
            a.assigned_total() + a.unassigned + a.below_cut,
            out.quakes_in_scope as u64
        );
        assert_eq!(
            out.quakes_in_scope + out.quakes_out_of_scope,
            corpus.catalog.len()
        );
    }
}
