use std::collections::BTreeMap;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::calendar::YearMonth;
use super::coords::{haversine_km, GeoPoint};
use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_KM: f64 = 15.0;
pub const DEFAULT_MAGNITUDE_CUT: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuakeRecord {
    pub event_id: String,
    pub location: GeoPoint,
    pub origin_time: NaiveDateTime,
    pub magnitude: f64,
}

/// Per-cluster monthly counts plus the tallies that make attribution auditable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuakeAttribution {
    pub monthly_counts: Vec<BTreeMap<YearMonth, u64>>,
    /// Events at or above the cut that lie beyond the radius of every centroid.
    pub unassigned: u64,
    pub below_cut: u64,
}

impl QuakeAttribution {
    pub fn assigned_total(&self) -> u64 {
        self.monthly_counts.iter().flat_map(|m| m.values()).sum()
    }

    pub fn cluster_total(&self, cluster: usize) -> u64 {
        self.monthly_counts[cluster].values().sum()
    }
}

/// Index of the nearest centroid within `radius_km`, ties to the lower index.
pub fn nearest_within(centroids: &[GeoPoint], p: GeoPoint, radius_km: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in centroids.iter().enumerate() {
        let d = haversine_km(*c, p);
        if d <= radius_km && best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best.map(|(k, _)| k)
}

/// Counts each event at or above `magnitude_cut` once, at its nearest centroid.
pub fn assign_quakes(
    centroids: &[GeoPoint],
    catalog: &[QuakeRecord],
    radius_km: f64,
    magnitude_cut: f64,
) -> Result<QuakeAttribution> {
    if !(radius_km > 0.0 && radius_km.is_finite()) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius_km}"
        )));
    }
    let mut out = QuakeAttribution {
        monthly_counts: vec![BTreeMap::new(); centroids.len()],
        ..Default::default()
    };
    for q in catalog {
        if !q.magnitude.is_finite() {
            return Err(Error::Domain(format!(
                "event {} has non-finite magnitude",
                q.event_id
            )));
        }
        if q.magnitude < magnitude_cut {
            out.below_cut += 1;
            continue;
        }
        match nearest_within(centroids, q.location, radius_km) {
            Some(k) => {
                *out.monthly_counts[k]
                    .entry(YearMonth::of(&q.origin_time))
                    .or_default() += 1
            }
            None => out.unassigned += 1,
        }
    }
    Ok(out)
}
