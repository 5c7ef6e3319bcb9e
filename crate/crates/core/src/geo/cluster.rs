//! Bottom-up agglomerative clustering with Lance-Williams updates.
//!
//! Ward linkage works on squared Euclidean distances; single, complete and
//! average linkage on plain Euclidean distances. At each step the closest
//! pair of active clusters is merged, ties going to the lexicographically
//! smallest `(i, j)` slot pair. Final labels are dense and ordered by each
//! cluster's smallest point index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Ward,
    Single,
    Complete,
    Average,
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ward" => Ok(Linkage::Ward),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(format!(
                "unknown linkage `{other}` (ward|single|complete|average)"
            )),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Ward => "ward",
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

/// Returns a cluster label in `0..n_clusters` for every point.
pub fn agglomerative_cluster(
    points: &[[f64; 2]],
    n_clusters: usize,
    linkage: Linkage,
) -> Result<Vec<usize>> {
    let n = points.len();
    if n_clusters == 0 || n_clusters > n {
        return Err(Error::Domain(format!(
            "n_clusters must lie in [1, {n}], got {n_clusters}"
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Domain("points must be finite".into()));
    }

    let mut dist = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sq = (points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2);
            let d = if linkage == Linkage::Ward {
                sq
            } else {
                sq.sqrt()
            };
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    for _ in 0..(n - n_clusters) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                if best.is_none_or(|(_, _, d)| dist[i][j] < d) {
                    best = Some((i, j, dist[i][j]));
                }
            }
        }
        let (i, j, dij) = best.expect("at least two active clusters remain");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for m in (0..n).filter(|&m| active[m] && m != i && m != j) {
            let (dim, djm) = (dist[i][m], dist[j][m]);
            let nm = size[m] as f64;
            let merged = match linkage {
                Linkage::Single => dim.min(djm),
                Linkage::Complete => dim.max(djm),
                Linkage::Average => (ni * dim + nj * djm) / (ni + nj),
                Linkage::Ward => ((ni + nm) * dim + (nj + nm) * djm - nm * dij) / (ni + nj + nm),
            };
            dist[i][m] = merged;
            dist[m][i] = merged;
        }
        active[j] = false;
        size[i] += size[j];
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
    }

    let mut groups: Vec<&Vec<usize>> = (0..n).filter(|&i| active[i]).map(|i| &members[i]).collect();
    groups.sort_by_key(|g| g.iter().min().copied());
    let mut labels = vec![0; n];
    for (label, g) in groups.iter().enumerate() {
        for &p in g.iter() {
            labels[p] = label;
        }
    }
    Ok(labels)
}
