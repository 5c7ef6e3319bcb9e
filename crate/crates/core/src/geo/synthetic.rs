//! A seeded, reproducible well/catalog corpus shaped like a regional study:
//! 65 wells around 30 injection sites, 71 in-scope events at or above the
//! default magnitude cut, plus events that the filters should discard.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::attribution::QuakeRecord;
use super::calendar::StudyWindow;
use super::coords::GeoPoint;
use super::panel_build::WellRecord;

pub const SITES: usize = 30;
pub const WELLS: usize = 65;
pub const IN_SCOPE_EVENTS: usize = 71;

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub wells: Vec<WellRecord>,
    pub catalog: Vec<QuakeRecord>,
    pub sites: Vec<GeoPoint>,
}

fn site(k: usize) -> GeoPoint {
    let (row, col) = (k / 6, k % 6);
    GeoPoint {
        lon: -98.25 + col as f64 * 0.27,
        lat: 32.2 + row as f64 * 0.33,
    }
}

fn jitter(rng: &mut ChaCha20Rng, p: GeoPoint, deg: f64) -> GeoPoint {
    GeoPoint {
        lon: p.lon + rng.random_range(-deg..deg),
        lat: p.lat + rng.random_range(-deg..deg),
    }
}

fn event(
    rng: &mut ChaCha20Rng,
    id: usize,
    at: GeoPoint,
    day0: NaiveDate,
    days: i64,
    magnitude: f64,
) -> QuakeRecord {
    let t = day0 + Duration::days(rng.random_range(0..days));
    QuakeRecord {
        event_id: format!("ev{id:04}"),
        location: at,
        origin_time: t
            .and_hms_opt(rng.random_range(0..24), rng.random_range(0..60), 0)
            .unwrap(),
        magnitude,
    }
}

pub fn synthetic_corpus(seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let window = StudyWindow::default();
    let sites: Vec<GeoPoint> = (0..SITES).map(site).collect();
    let intensity: Vec<f64> = (0..SITES).map(|_| rng.random_range(0.2..3.0)).collect();

    let mut wells = Vec::with_capacity(WELLS);
    for w in 0..WELLS {
        let k = if w < SITES { w } else { (w - SITES) % SITES };
        let location = jitter(&mut rng, sites[k], 0.01);
        let mut vols = BTreeMap::new();
        for ym in window.months() {
            if rng.random_bool(0.03) {
                continue;
            }
            vols.insert(ym, (intensity[k] * rng.random_range(2.0e5..6.0e5)).round());
        }
        wells.push(
            WellRecord::new(format!("swd{w:03}"), location, vols).expect("valid synthetic volumes"),
        );
    }

    let day0 = NaiveDate::from_ymd_opt(2013, 12, 1).unwrap();
    let days = (NaiveDate::from_ymd_opt(2016, 4, 1).unwrap() - day0).num_days();
    let total: f64 = intensity.iter().sum();
    let mut catalog = Vec::new();
    let mut id = 0;
    let pick_site = |rng: &mut ChaCha20Rng| {
        let mut u = rng.random_range(0.0..total);
        for (k, w) in intensity.iter().enumerate() {
            if u < *w {
                return k;
            }
            u -= w;
        }
        SITES - 1
    };
    for _ in 0..IN_SCOPE_EVENTS {
        let k = pick_site(&mut rng);
        let at = jitter(&mut rng, sites[k], 0.05);
        let m = 2.5 + rng.random_range(0.0..1.5f64).powi(2);
        catalog.push(event(
            &mut rng,
            id,
            at,
            day0,
            days,
            (m * 10.0).round() / 10.0,
        ));
        id += 1;
    }
    for _ in 0..25 {
        let k = pick_site(&mut rng);
        let at = jitter(&mut rng, sites[k], 0.05);
        let m = rng.random_range(1.5..2.45);
        catalog.push(event(&mut rng, id, at, day0, days, m));
        id += 1;
    }
    let before = NaiveDate::from_ymd_opt(2012, 1, 1).unwrap();
    for _ in 0..8 {
        let k = rng.random_range(0..SITES);
        let at = jitter(&mut rng, sites[k], 0.05);
        catalog.push(event(&mut rng, id, at, before, 600, 3.0));
        id += 1;
    }
    for _ in 0..6 {
        let at = GeoPoint {
            lon: rng.random_range(-100.0..-98.6),
            lat: rng.random_range(31.0..34.5),
        };
        catalog.push(event(&mut rng, id, at, day0, days, 3.1));
        id += 1;
    }
    SyntheticCorpus {
        wells,
        catalog,
        sites,
    }
}
