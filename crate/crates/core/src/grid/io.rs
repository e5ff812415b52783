//! OBG v1 grid files and along-track CSV files.
//!
//! OBG layout: the 8 ASCII bytes `OBGRID01`, an 8-byte little-endian header
//! length, a UTF-8 JSON header with sorted keys
//! `{attrs, dims, epoch, lat, lon, shape, time, units, var}`, then the payload
//! as little-endian `f64` in C row-major `[time, lat, lon]` order.
//!
//! Axis units other than the defaults (`days`, `degrees`) travel in `attrs`
//! under `time_units`, `lat_units` and `lon_units`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::{
    format_timestamp, parse_timestamp, time_unit_days, timestamp_after, utc_date, AlongTrackSet, CoordAxis,
    Dim, GridAxes, GriddedField, TrackRecord, DAYS, DEGREES,
};
use crate::{Error, Result};

pub const OBG_MAGIC: &[u8; 8] = b"OBGRID01";
const TRACK_HEADER: [&str; 4] = ["time", "lat", "lon", "ssh"];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObgHeader {
    attrs: BTreeMap<String, String>,
    dims: Vec<String>,
    epoch: String,
    lat: Vec<f64>,
    lon: Vec<f64>,
    shape: [usize; 3],
    time: Vec<f64>,
    units: String,
    var: String,
}

fn axis_units_key(dim: Dim) -> String {
    format!("{}_units", dim.as_str())
}

fn default_units(dim: Dim) -> &'static str {
    match dim {
        Dim::Time => DAYS,
        Dim::Lat | Dim::Lon => DEGREES,
    }
}

/// Serializes a field to OBG v1 bytes.
pub fn encode_grid(field: &GriddedField) -> Vec<u8> {
    let axes = field.axes();
    let mut attrs = field.attrs().clone();
    for dim in Dim::ALL {
        let units = axes.axis(dim).units();
        if units != default_units(dim) {
            attrs.insert(axis_units_key(dim), units.to_string());
        }
    }
    let header = ObgHeader {
        attrs,
        dims: Dim::ALL.iter().map(|d| d.as_str().to_string()).collect(),
        epoch: format_timestamp(axes.epoch),
        lat: axes.lat.values().to_vec(),
        lon: axes.lon.values().to_vec(),
        shape: axes.shape(),
        time: axes.time.values().to_vec(),
        units: field.units().to_string(),
        var: field.var().to_string(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + header.len() + field.data().len() * 8);
    out.extend_from_slice(OBG_MAGIC);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for v in field.data().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses OBG v1 bytes.
pub fn decode_grid(bytes: &[u8]) -> Result<GriddedField> {
    if bytes.len() < 16 || &bytes[..8] != OBG_MAGIC {
        return Err(Error::parse("magic", "expected leading bytes `OBGRID01`"));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let header_end = 16usize
        .checked_add(usize::try_from(header_len).unwrap_or(usize::MAX))
        .filter(|end| *end <= bytes.len())
        .ok_or_else(|| {
            Error::parse(
                "header length",
                format!("declares {header_len} bytes but only {} follow", bytes.len() - 16),
            )
        })?;
    let header: ObgHeader =
        serde_json::from_slice(&bytes[16..header_end]).map_err(|e| Error::parse("header", e.to_string()))?;

    if header.dims != ["time", "lat", "lon"] {
        return Err(Error::parse("dims", format!("expected [time, lat, lon], found {:?}", header.dims)));
    }
    let mut attrs = header.attrs;
    let mut units_of = |dim: Dim| attrs.remove(&axis_units_key(dim)).unwrap_or_else(|| default_units(dim).into());
    let (time_units, lat_units, lon_units) = (units_of(Dim::Time), units_of(Dim::Lat), units_of(Dim::Lon));
    let epoch = parse_timestamp(&header.epoch).map_err(|e| Error::parse("epoch", e.to_string()))?;

    let axis = |dim: Dim, values: Vec<f64>, units: String| -> Result<CoordAxis> {
        let axis = CoordAxis::new(dim, values, units).map_err(|e| Error::parse(dim.as_str(), e.to_string()))?;
        if !axis.is_monotonic() {
            return Err(Error::parse(dim.as_str(), "axis values are not strictly monotonic"));
        }
        Ok(axis)
    };
    let axes = GridAxes::new(
        epoch,
        axis(Dim::Time, header.time, time_units)?,
        axis(Dim::Lat, header.lat, lat_units)?,
        axis(Dim::Lon, header.lon, lon_units)?,
    )?;
    if axes.shape() != header.shape {
        return Err(Error::parse(
            "shape",
            format!("declares {:?} but axes have lengths {:?}", header.shape, axes.shape()),
        ));
    }

    let payload = &bytes[header_end..];
    let expected: usize = header.shape.iter().product();
    if payload.len() != expected * 8 {
        return Err(Error::parse(
            "payload length",
            format!(
                "shape {:?} needs {expected} values ({} bytes), found {} bytes",
                header.shape,
                expected * 8,
                payload.len()
            ),
        ));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let data = Array3::from_shape_vec(header.shape, values).expect("length checked");
    Ok(GriddedField::new(header.var, header.units, axes, data)
        .map_err(|e| Error::parse("data", e.to_string()))?
        .with_attrs(attrs))
}

pub fn write_grid(field: &GriddedField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_grid(field))?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GriddedField> {
    decode_grid(&fs::read(path)?)
}

/// Serializes a track set to CSV (`time,lat,lon,ssh`, ISO-8601 UTC times, LF).
pub fn encode_track(set: &AlongTrackSet) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(TRACK_HEADER).expect("in-memory write");
    let unit = time_unit_days(set.time_units()).unwrap_or(1.0);
    for r in set.records() {
        let stamp = format_timestamp(timestamp_after(set.epoch(), r.time * unit));
        w.write_record([stamp, r.lat.to_string(), r.lon.to_string(), r.value.to_string()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Parses track CSV. Times are expressed in days since `epoch`, or since
/// midnight UTC of the earliest record's day when `epoch` is `None`.
pub fn decode_track(text: &[u8], epoch: Option<DateTime<Utc>>) -> Result<AlongTrackSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(text);
    let mut rows = rdr.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::parse("header", "missing header line `time,lat,lon,ssh`"))?
        .map_err(|e| Error::parse("header", e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != TRACK_HEADER {
        return Err(Error::parse(
            "header",
            format!("expected `time,lat,lon,ssh`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut parsed = Vec::new();
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(format!("line {line}"), e.to_string()))?;
        if row.len() != 4 {
            return Err(Error::parse(format!("line {line}"), format!("expected 4 columns, found {}", row.len())));
        }
        let stamp =
            parse_timestamp(&row[0]).map_err(|e| Error::parse(format!("time (line {line})"), e.to_string()))?;
        let num = |col: usize, name: &str| -> Result<f64> {
            row[col]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(format!("{name} (line {line})"), format!("not a number: `{}`", &row[col])))
        };
        let (lat, lon, value) = (num(1, "lat")?, num(2, "lon")?, num(3, "ssh")?);
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::parse(format!("lat (line {line})"), format!("{lat} outside [-90, 90]")));
        }
        if !(-180.0..360.0).contains(&lon) {
            return Err(Error::parse(format!("lon (line {line})"), format!("{lon} outside [-180, 360)")));
        }
        parsed.push((stamp, lat, lon, value));
    }

    let epoch = epoch.unwrap_or_else(|| match parsed.iter().map(|p| p.0).min() {
        Some(first) => first
            .date_naive()
            .and_hms_opt(0, 0, 0)
            .expect("midnight")
            .and_utc(),
        None => utc_date(1970, 1, 1),
    });
    let records = parsed
        .into_iter()
        .map(|(stamp, lat, lon, value)| TrackRecord {
            time: super::days_since(epoch, stamp),
            lat,
            lon,
            value,
        })
        .collect();
    AlongTrackSet::new(epoch, records)
}

pub fn write_track(set: &AlongTrackSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_track(set))?;
    Ok(())
}

pub fn read_track(path: impl AsRef<Path>) -> Result<AlongTrackSet> {
    decode_track(&fs::read(path)?, None)
}

pub fn read_track_with_epoch(path: impl AsRef<Path>, epoch: DateTime<Utc>) -> Result<AlongTrackSet> {
    decode_track(&fs::read(path)?, Some(epoch))
}
