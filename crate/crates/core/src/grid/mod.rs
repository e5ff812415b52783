//! Canonical data model for gridded and along-track SSH data.
//!
//! A [`GriddedField`] is a `(time, lat, lon)` cube of `f64` values stored in C
//! row-major order. Missing values are IEEE-754 NaN. Time is stored as a float
//! offset from a UTC epoch in the time axis units (days unless rescaled).
//! Latitude and longitude are in degrees until [`latlon_deg2m`] converts them
//! to meters on a local tangent plane.

mod io;
mod ops;

pub use io::{
    decode_grid, decode_track, encode_grid, encode_track, read_grid, read_track,
    read_track_with_epoch, write_grid, write_track, OBG_MAGIC,
};
pub use ops::{latlon_deg2m, subset_track, GeoData, EARTH_RADIUS_M};

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use ndarray::{Array3, ArrayView2, Axis};

use crate::{Error, Result};

pub const DEGREES: &str = "degrees";
pub const METERS: &str = "m";
pub const DAYS: &str = "days";

const NANOS_PER_DAY: f64 = 86_400e9;

/// One of the three grid dimensions, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    Time,
    Lat,
    Lon,
}

impl Dim {
    pub const ALL: [Dim; 3] = [Dim::Time, Dim::Lat, Dim::Lon];

    pub fn as_str(self) -> &'static str {
        match self {
            Dim::Time => "time",
            Dim::Lat => "lat",
            Dim::Lon => "lon",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Dim> {
        match name {
            "time" => Some(Dim::Time),
            "lat" => Some(Dim::Lat),
            "lon" => Some(Dim::Lon),
            _ => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A 1-D coordinate axis.
///
/// Construction only requires finite values; monotonicity and canonical ranges
/// are established by `validate_latlon` / `validate_time` and checked on read.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordAxis {
    dim: Dim,
    values: Vec<f64>,
    units: String,
}

impl CoordAxis {
    pub fn new(dim: Dim, values: Vec<f64>, units: impl Into<String>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Coords(format!("{dim} axis holds non-finite value {bad}")));
        }
        Ok(CoordAxis {
            dim,
            values,
            units: units.into(),
        })
    }

    /// Evenly spaced axis `start + i * step` for `i in 0..n`.
    pub fn regular(dim: Dim, start: f64, step: f64, n: usize, units: impl Into<String>) -> Result<Self> {
        CoordAxis::new(dim, (0..n).map(|i| start + i as f64 * step).collect(), units)
    }

    pub fn lat_degrees(values: Vec<f64>) -> Result<Self> {
        CoordAxis::new(Dim::Lat, values, DEGREES)
    }

    pub fn lon_degrees(values: Vec<f64>) -> Result<Self> {
        CoordAxis::new(Dim::Lon, values, DEGREES)
    }

    pub fn time_days(values: Vec<f64>) -> Result<Self> {
        CoordAxis::new(Dim::Time, values, DAYS)
    }

    /// Time axis from absolute timestamps, expressed in days since `epoch`.
    pub fn from_timestamps(stamps: &[DateTime<Utc>], epoch: DateTime<Utc>) -> Result<Self> {
        CoordAxis::time_days(stamps.iter().map(|t| days_since(epoch, *t)).collect())
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_monotonic(&self) -> bool {
        self.is_increasing() || self.values.windows(2).all(|w| w[0] > w[1])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Uniform spacing of an increasing axis, if every step matches the
    /// average step to a relative 1e-6.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.values.len() < 2 || !self.is_increasing() {
            return None;
        }
        let n = self.values.len();
        let step = (self.values[n - 1] - self.values[0]) / (n - 1) as f64;
        let uniform = self
            .values
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-6 * step.abs());
        uniform.then_some(step)
    }

    pub(crate) fn with_values(&self, values: Vec<f64>, units: impl Into<String>) -> Self {
        CoordAxis {
            dim: self.dim,
            values,
            units: units.into(),
        }
    }

    pub(crate) fn select(&self, range: std::ops::Range<usize>) -> Self {
        self.with_values(self.values[range].to_vec(), self.units.clone())
    }

    pub fn is_degrees(&self) -> bool {
        self.units == DEGREES
    }

    pub fn is_meters(&self) -> bool {
        self.units == METERS
    }
}

/// Geometry of a grid without its payload: epoch and the three axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxes {
    pub epoch: DateTime<Utc>,
    pub time: CoordAxis,
    pub lat: CoordAxis,
    pub lon: CoordAxis,
}

impl GridAxes {
    pub fn new(epoch: DateTime<Utc>, time: CoordAxis, lat: CoordAxis, lon: CoordAxis) -> Result<Self> {
        for (axis, dim) in [(&time, Dim::Time), (&lat, Dim::Lat), (&lon, Dim::Lon)] {
            if axis.dim() != dim {
                return Err(Error::Coords(format!(
                    "expected a {dim} axis, found {}",
                    axis.dim()
                )));
            }
        }
        Ok(GridAxes { epoch, time, lat, lon })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.time.len(), self.lat.len(), self.lon.len()]
    }

    pub fn axis(&self, dim: Dim) -> &CoordAxis {
        match dim {
            Dim::Time => &self.time,
            Dim::Lat => &self.lat,
            Dim::Lon => &self.lon,
        }
    }
}

/// A `(time, lat, lon)` scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedField {
    var: String,
    units: String,
    axes: GridAxes,
    data: Array3<f64>,
    attrs: BTreeMap<String, String>,
}

impl GriddedField {
    pub fn new(
        var: impl Into<String>,
        units: impl Into<String>,
        axes: GridAxes,
        data: Array3<f64>,
    ) -> Result<Self> {
        let shape = axes.shape();
        if data.shape() != shape {
            return Err(Error::Shape(format!(
                "data shape {:?} does not match axis lengths {:?}",
                data.shape(),
                shape
            )));
        }
        if data.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidArgument(
                "field data contains infinities; missing values must be NaN".into(),
            ));
        }
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(GriddedField {
            var: var.into(),
            units: units.into(),
            axes,
            data,
            attrs: BTreeMap::new(),
        })
    }

    /// Field filled with a constant value.
    pub fn filled(var: impl Into<String>, units: impl Into<String>, axes: GridAxes, value: f64) -> Result<Self> {
        let data = Array3::from_elem(axes.shape(), value);
        GriddedField::new(var, units, axes, data)
    }

    pub fn with_attrs(mut self, attrs: BTreeMap<String, String>) -> Self {
        self.attrs = attrs;
        self
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }

    /// Same geometry and metadata, new payload.
    pub fn with_data(&self, data: Array3<f64>) -> Result<Self> {
        Ok(GriddedField::new(self.var.clone(), self.units.clone(), self.axes.clone(), data)?
            .with_attrs(self.attrs.clone()))
    }

    /// Same geometry, new payload and variable label.
    pub fn derived(&self, var: &str, units: &str, data: Array3<f64>) -> Result<Self> {
        Ok(GriddedField::new(var, units, self.axes.clone(), data)?.with_attrs(self.attrs.clone()))
    }

    pub(crate) fn with_axes(&self, axes: GridAxes, data: Array3<f64>) -> Result<Self> {
        Ok(GriddedField::new(self.var.clone(), self.units.clone(), axes, data)?.with_attrs(self.attrs.clone()))
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn epoch(&self) -> DateTime<Utc> {
        self.axes.epoch
    }

    pub fn time(&self) -> &CoordAxis {
        &self.axes.time
    }

    pub fn lat(&self) -> &CoordAxis {
        &self.axes.lat
    }

    pub fn lon(&self) -> &CoordAxis {
        &self.axes.lon
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn attrs(&self) -> &BTreeMap<String, String> {
        &self.attrs
    }

    pub fn shape(&self) -> [usize; 3] {
        self.axes.shape()
    }

    pub fn slice(&self, t: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), t)
    }

    pub fn into_data(self) -> Array3<f64> {
        self.data
    }

    /// Equality that compares payload bit patterns, so NaN cells match.
    pub fn bit_eq(&self, other: &GriddedField) -> bool {
        self.var == other.var
            && self.units == other.units
            && self.axes == other.axes
            && self.attrs == other.attrs
            && self.data.shape() == other.data.shape()
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn count_valid(&self) -> usize {
        self.data.iter().filter(|v| !v.is_nan()).count()
    }
}

/// A single along-track sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub time: f64,
    pub lat: f64,
    pub lon: f64,
    pub value: f64,
}

/// Time-ordered sparse observations.
#[derive(Debug, Clone, PartialEq)]
pub struct AlongTrackSet {
    var: String,
    units: String,
    time_units: String,
    epoch: DateTime<Utc>,
    records: Vec<TrackRecord>,
}

impl AlongTrackSet {
    /// Builds a set in days since `epoch`; records are stably sorted by time.
    pub fn new(epoch: DateTime<Utc>, records: Vec<TrackRecord>) -> Result<Self> {
        AlongTrackSet::with_units(epoch, DAYS, records)
    }

    pub fn with_units(epoch: DateTime<Utc>, time_units: &str, mut records: Vec<TrackRecord>) -> Result<Self> {
        time_unit_days(time_units)?;
        if let Some(r) = records
            .iter()
            .find(|r| !(r.time.is_finite() && r.lat.is_finite() && r.lon.is_finite()) || r.value.is_infinite())
        {
            return Err(Error::Coords(format!("track record has non-finite coordinates: {r:?}")));
        }
        records.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(AlongTrackSet {
            var: "ssh".into(),
            units: METERS.into(),
            time_units: time_units.into(),
            epoch,
            records,
        })
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn time_units(&self) -> &str {
        &self.time_units
    }

    pub fn epoch(&self) -> DateTime<Utc> {
        self.epoch
    }

    pub fn records(&self) -> &[TrackRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    /// Same coordinates, new values (one per record, in order).
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.records.len() {
            return Err(Error::Shape(format!(
                "{} values for {} track records",
                values.len(),
                self.records.len()
            )));
        }
        let mut out = self.clone();
        for (r, v) in out.records.iter_mut().zip(values) {
            r.value = *v;
        }
        Ok(out)
    }

    /// Record time converted to days since the set's epoch.
    pub fn time_days(&self, record: &TrackRecord) -> f64 {
        record.time * time_unit_days(&self.time_units).unwrap_or(1.0)
    }

    pub(crate) fn replace_records(&self, records: Vec<TrackRecord>) -> Self {
        AlongTrackSet {
            records,
            ..self.clone()
        }
    }

    pub(crate) fn rebased(&self, epoch: DateTime<Utc>, time_units: &str, records: Vec<TrackRecord>) -> Self {
        AlongTrackSet {
            epoch,
            time_units: time_units.into(),
            records,
            ..self.clone()
        }
    }
}

/// Closed selection box. Time bounds are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lat: [f64; 2],
    pub lon: [f64; 2],
    pub time: Option<[DateTime<Utc>; 2]>,
}

impl DomainBox {
    pub fn new(lat: [f64; 2], lon: [f64; 2], time: Option<[DateTime<Utc>; 2]>) -> Result<Self> {
        if !(lat[0] < lat[1]) {
            return Err(Error::InvalidArgument(format!("lat bounds {lat:?} need min < max")));
        }
        if !(lon[0] < lon[1]) {
            return Err(Error::InvalidArgument(format!("lon bounds {lon:?} need min < max")));
        }
        if let Some([a, b]) = time {
            if a >= b {
                return Err(Error::InvalidArgument(format!("time bounds {a} .. {b} need start < end")));
            }
        }
        Ok(DomainBox { lat, lon, time })
    }

    /// The Gulfstream region used by the OSSE/OSE data challenges.
    pub fn gulfstream() -> Self {
        DomainBox {
            lat: [33.0, 43.0],
            lon: [-65.0, -55.0],
            time: None,
        }
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.lat[0] && lat <= self.lat[1] && lon >= self.lon[0] && lon <= self.lon[1]
    }
}

/// Length of a time unit label in days, e.g. `"days"`, `"hours"`, `"2 days"`.
pub fn time_unit_days(label: &str) -> Result<f64> {
    let label = label.trim();
    let (mult, base) = match label.split_once(' ') {
        Some((num, rest)) => {
            let mult: f64 = num
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("unknown time unit `{label}`")))?;
            (mult, rest.trim())
        }
        None => (1.0, label),
    };
    let base = match base {
        "days" | "day" | "d" => 1.0,
        "hours" | "hour" | "h" => 1.0 / 24.0,
        "minutes" | "minute" | "min" => 1.0 / 1440.0,
        "seconds" | "second" | "s" => 1.0 / 86_400.0,
        _ => return Err(Error::InvalidArgument(format!("unknown time unit `{label}`"))),
    };
    if !(mult.is_finite() && mult > 0.0) {
        return Err(Error::InvalidArgument(format!("unknown time unit `{label}`")));
    }
    Ok(mult * base)
}

/// Float days from `epoch` to `t` (nanosecond resolution).
pub fn days_since(epoch: DateTime<Utc>, t: DateTime<Utc>) -> f64 {
    let d = t - epoch;
    match d.num_nanoseconds() {
        Some(ns) => ns as f64 / NANOS_PER_DAY,
        None => d.num_milliseconds() as f64 / 86_400e3,
    }
}

/// Timestamp `days` after `epoch`, rounded to the nearest nanosecond.
pub fn timestamp_after(epoch: DateTime<Utc>, days: f64) -> DateTime<Utc> {
    epoch + Duration::nanoseconds((days * NANOS_PER_DAY).round() as i64)
}

/// Parses `YYYY-MM-DD` (midnight UTC) or an RFC-3339 timestamp.
pub fn parse_timestamp(text: &str) -> Result<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Ok(Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).expect("midnight")));
    }
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::parse("time", format!("`{text}`: {e}")))
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.fZ").to_string()
}

/// Midnight UTC on the given calendar day.
pub fn utc_date(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).single().expect("valid calendar date")
}
