use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius (IUGG), km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// WGS 84 longitude/latitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::Domain(format!(
                "coordinates out of range: lon {lon}, lat {lat}"
            )));
        }
        Ok(Self { lon, lat })
    }
}

/// Great-circle distance in km.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Local equirectangular projection to kilometres about an origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalProjection {
    origin: GeoPoint,
    cos_lat0: f64,
}

impl LocalProjection {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            cos_lat0: origin.lat.to_radians().cos(),
        }
    }

    /// Centred on the mean coordinate of `points`.
    pub fn centred_on(points: &[GeoPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain(
                "cannot centre a projection on zero points".into(),
            ));
        }
        let n = points.len() as f64;
        let lon = points.iter().map(|p| p.lon).sum::<f64>() / n;
        let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
        Ok(Self::new(GeoPoint::new(lon, lat)?))
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn project(&self, p: GeoPoint) -> [f64; 2] {
        [
            EARTH_RADIUS_KM * self.cos_lat0 * (p.lon - self.origin.lon).to_radians(),
            EARTH_RADIUS_KM * (p.lat - self.origin.lat).to_radians(),
        ]
    }

    pub fn unproject(&self, xy: [f64; 2]) -> GeoPoint {
        GeoPoint {
            lon: self.origin.lon + (xy[0] / (EARTH_RADIUS_KM * self.cos_lat0)).to_degrees(),
            lat: self.origin.lat + (xy[1] / EARTH_RADIUS_KM).to_degrees(),
        }
    }
}

/// Projects `(lon, lat)` about `origin`, validating both.
pub fn project_coords(lon: f64, lat: f64, origin: GeoPoint) -> Result<[f64; 2]> {
    let p = GeoPoint::new(lon, lat)?;
    GeoPoint::new(origin.lon, origin.lat)?;
    Ok(LocalProjection::new(origin).project(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    #[test]
    fn one_degree_at_equator() {
        let arc = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
        assert_abs_diff_eq!(arc, 111.195, epsilon = 1e-3);
        assert_abs_diff_eq!(
            haversine_km(pt(0.0, 0.0), pt(1.0, 0.0)),
            arc,
            epsilon = 1e-9
        );
        let xy = project_coords(1.0, 0.0, pt(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(xy[0], arc, epsilon = 1e-9);
        assert_eq!(xy[1], 0.0);
    }

    #[test]
    fn origin_maps_to_zero() {
        let o = pt(-97.5, 32.9);
        assert_eq!(project_coords(o.lon, o.lat, o).unwrap(), [0.0, 0.0]);
        assert_eq!(haversine_km(o, o), 0.0);
    }

    #[test]
    fn projection_round_trip() {
        let proj = LocalProjection::new(pt(-97.5, 32.9));
        for p in [pt(-98.38, 32.07), pt(-96.74, 33.68), pt(-97.0, 33.0)] {
            let q = proj.unproject(proj.project(p));
            assert_abs_diff_eq!(q.lon, p.lon, epsilon = 1e-9);
            assert_abs_diff_eq!(q.lat, p.lat, epsilon = 1e-9);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(GeoPoint::new(181.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -90.5).is_err());
        assert!(project_coords(0.0, 95.0, pt(0.0, 0.0)).is_err());
    }

    #[test]
    fn projection_close_to_haversine_locally() {
        let proj = LocalProjection::new(pt(-97.5, 32.9));
        let (a, b) = (pt(-97.45, 32.93), pt(-97.40, 32.85));
        let (pa, pb) = (proj.project(a), proj.project(b));
        let planar = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
        assert!((planar - haversine_km(a, b)).abs() / haversine_km(a, b) < 1e-3);
    }
}
