use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::attribution::QuakeRecord;
use super::calendar::YearMonth;
use super::coords::GeoPoint;
use super::panel_build::WellRecord;
use crate::error::{Error, Result};
use crate::format::fmt_f64;
use crate::panel::{check_header, parse_field};

pub const WELLS_CSV_HEADER: [&str; 5] = [
    "well_id",
    "longitude",
    "latitude",
    "year_month",
    "volume_bbl",
];
pub const CATALOG_CSV_HEADER: [&str; 5] = [
    "event_id",
    "longitude",
    "latitude",
    "origin_time_iso8601",
    "magnitude",
];

fn schema(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        row,
        column: column.into(),
        message: message.into(),
    }
}

fn open(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    check_header(path, &mut rdr, header)?;
    Ok(rdr)
}

fn point(path: &Path, row: usize, rec: &csv::StringRecord) -> Result<GeoPoint> {
    let lon: f64 = parse_field(path, row, "longitude", rec.get(1))?;
    let lat: f64 = parse_field(path, row, "latitude", rec.get(2))?;
    GeoPoint::new(lon, lat).map_err(|e| schema(path, row, "longitude/latitude", e.to_string()))
}

fn id(path: &Path, row: usize, column: &str, rec: &csv::StringRecord) -> Result<String> {
    let s = rec.get(0).unwrap_or("").trim();
    if s.is_empty() {
        return Err(schema(path, row, column, "empty id"));
    }
    Ok(s.to_string())
}

/// Parses RFC 3339 (converted to UTC), a naive `date[T ]time`, or a bare date.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Reads long-format well volumes. Repeated `(well, month)` rows are summed.
pub fn read_wells_csv(path: &Path) -> Result<Vec<WellRecord>> {
    let mut rdr = open(path, &WELLS_CSV_HEADER)?;
    let mut order: Vec<String> = Vec::new();
    let mut wells: BTreeMap<String, (GeoPoint, BTreeMap<YearMonth, f64>)> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let well_id = id(path, row, "well_id", &rec)?;
        let location = point(path, row, &rec)?;
        let raw_month = rec.get(3).unwrap_or("");
        let ym: YearMonth = raw_month.parse().map_err(|_| {
            schema(
                path,
                row,
                "year_month",
                format!("cannot parse `{raw_month}`"),
            )
        })?;
        let volume: f64 = parse_field(path, row, "volume_bbl", rec.get(4))?;
        if !(volume.is_finite() && volume >= 0.0) {
            return Err(schema(
                path,
                row,
                "volume_bbl",
                "volume must be finite and non-negative",
            ));
        }
        let entry = wells.entry(well_id.clone()).or_insert_with(|| {
            order.push(well_id.clone());
            (location, BTreeMap::new())
        });
        if (entry.0.lon - location.lon).abs() > 1e-9 || (entry.0.lat - location.lat).abs() > 1e-9 {
            return Err(schema(
                path,
                row,
                "longitude/latitude",
                format!("well {well_id} changes location"),
            ));
        }
        *entry.1.entry(ym).or_default() += volume;
    }
    if order.is_empty() {
        return Err(schema(path, 1, "well_id", "no wells"));
    }
    order
        .into_iter()
        .map(|w| {
            let (loc, vols) = wells.remove(&w).expect("well recorded in order");
            WellRecord::new(w, loc, vols)
        })
        .collect()
}

pub fn read_catalog_csv(path: &Path) -> Result<Vec<QuakeRecord>> {
    let mut rdr = open(path, &CATALOG_CSV_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let event_id = id(path, row, "event_id", &rec)?;
        let location = point(path, row, &rec)?;
        let raw_time = rec.get(3).unwrap_or("");
        let origin_time = parse_timestamp(raw_time).ok_or_else(|| {
            schema(
                path,
                row,
                "origin_time_iso8601",
                format!("cannot parse `{raw_time}`"),
            )
        })?;
        let magnitude: f64 = parse_field(path, row, "magnitude", rec.get(4))?;
        if !magnitude.is_finite() {
            return Err(schema(path, row, "magnitude", "magnitude must be finite"));
        }
        out.push(QuakeRecord {
            event_id,
            location,
            origin_time,
            magnitude,
        });
    }
    Ok(out)
}

pub fn write_wells_csv(wells: &[WellRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", WELLS_CSV_HEADER.join(","))?;
    for w in wells {
        for (ym, v) in &w.monthly_volumes {
            writeln!(
                out,
                "{},{},{},{ym},{}",
                w.well_id,
                w.location.lon,
                w.location.lat,
                fmt_f64(*v)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_catalog_csv(catalog: &[QuakeRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", CATALOG_CSV_HEADER.join(","))?;
    for q in catalog {
        writeln!(
            out,
            "{},{},{},{},{}",
            q.event_id,
            q.location.lon,
            q.location.lat,
            q.origin_time.format("%Y-%m-%dT%H:%M:%SZ"),
            q.magnitude
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        let a = parse_timestamp("2014-03-02T05:06:07Z").unwrap();
        assert_eq!(parse_timestamp("2014-03-01T23:06:07-06:00").unwrap(), a);
        assert_eq!(parse_timestamp("2014-03-02 05:06:07").unwrap(), a);
        assert_eq!(
            parse_timestamp("2014-03-02").unwrap().to_string(),
            "2014-03-02 00:00:00"
        );
        assert!(parse_timestamp("yesterday").is_none());
    }

    #[test]
    fn wells_round_trip_and_duplicates_sum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wells.csv");
        std::fs::write(
            &path,
            "well_id,longitude,latitude,year_month,volume_bbl\n\
             w1,-97,33,2014-01,10\nw1,-97,33,2014-01,5\nw2,-97.5,32.5,2014-02,1.5\n",
        )
        .unwrap();
        let wells = read_wells_csv(&path).unwrap();
        assert_eq!(wells.len(), 2);
        assert_eq!(wells[0].monthly_volumes[&"2014-01".parse().unwrap()], 15.0);
        let again = dir.path().join("again.csv");
        write_wells_csv(&wells, &again).unwrap();
        assert_eq!(read_wells_csv(&again).unwrap(), wells);
    }

    #[test]
    fn schema_errors_name_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cat.csv");
        std::fs::write(
            &path,
            "event_id,longitude,latitude,origin_time_iso8601,magnitude\n\
             e1,-97,33,2014-01-01,2.7\ne2,-97,33,not-a-time,3.0\n",
        )
        .unwrap();
        match read_catalog_csv(&path).unwrap_err() {
            Error::Schema { row, column, .. } => {
                assert_eq!((row, column.as_str()), (3, "origin_time_iso8601"))
            }
            other => panic!("unexpected {other}"),
        }
        std::fs::write(&path, "id,lon,lat\n").unwrap();
        assert!(read_catalog_csv(&path).unwrap_err().is_schema());
    }
}
