//! Coordinate canonicalization, selection and unit changes.

use std::f64::consts::PI;
use std::ops::Range;

use chrono::{DateTime, Utc};
use ndarray::Axis;

use super::{days_since, time_unit_days, AlongTrackSet, DomainBox, GridAxes, GriddedField, DAYS, METERS};
use crate::prng::Prng;
use crate::{Error, Result};

/// Mean Earth radius used for every degree-to-meter conversion.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Operations shared by gridded fields and along-track sets.
pub trait GeoData: Sized {
    /// Wraps longitudes to `[-180, 180)` and makes latitude (and, for grids,
    /// longitude) ascending, permuting the payload to match.
    fn validate_latlon(&self) -> Result<Self>;

    /// Re-expresses the time axis as float days since `epoch`.
    fn validate_time(&self, epoch: DateTime<Utc>) -> Result<Self>;

    /// Keeps only samples inside the closed box.
    fn sel_domain(&self, domain: &DomainBox) -> Result<Self>;

    /// Divides the time axis by `freq` expressed in `unit`.
    fn time_rescale(&self, freq: f64, unit: &str) -> Result<Self>;
}

/// Canonical values pass through untouched so that validation is bit-exact
/// idempotent.
fn wrap_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        lon
    } else {
        (lon + 180.0).rem_euclid(360.0) - 180.0
    }
}

fn check_lat(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(-90.0..=90.0).contains(*v)) {
        Some(v) => Err(Error::Coords(format!("latitude {v} outside [-90, 90]"))),
        None => Ok(()),
    }
}

fn check_lon(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(-180.0..360.0).contains(*v)) {
        Some(v) => Err(Error::Coords(format!("longitude {v} outside [-180, 360)"))),
        None => Ok(()),
    }
}

/// Contiguous index range of an ascending axis inside `[lo, hi]`.
fn range_within(values: &[f64], lo: f64, hi: f64) -> Range<usize> {
    let start = values.partition_point(|v| *v < lo);
    let end = values.partition_point(|v| *v <= hi);
    start..end.max(start)
}

fn time_label(freq: f64, unit: &str) -> String {
    if freq == 1.0 {
        unit.to_string()
    } else {
        format!("{freq} {unit}")
    }
}

impl GeoData for GriddedField {
    fn validate_latlon(&self) -> Result<Self> {
        let axes = self.axes();
        if !axes.lat.is_degrees() || !axes.lon.is_degrees() {
            return Err(Error::Coords("lat/lon axes are not in degrees".into()));
        }
        check_lat(axes.lat.values())?;
        check_lon(axes.lon.values())?;

        let mut data = self.data().clone();

        let mut lat = axes.lat.values().to_vec();
        if !axes.lat.is_monotonic() {
            return Err(Error::Coords("latitude axis is not strictly monotonic".into()));
        }
        if lat.len() > 1 && lat[0] > lat[1] {
            lat.reverse();
            data.invert_axis(Axis(1));
        }

        let wrapped: Vec<f64> = axes.lon.values().iter().map(|v| wrap_lon(*v)).collect();
        let mut order: Vec<usize> = (0..wrapped.len()).collect();
        order.sort_by(|a, b| wrapped[*a].total_cmp(&wrapped[*b]));
        let lon: Vec<f64> = order.iter().map(|i| wrapped[*i]).collect();
        if let Some(w) = lon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Coords(format!("duplicate longitude {} after wrapping", w[0])));
        }
        if order.iter().enumerate().any(|(i, j)| i != *j) {
            data = data.select(Axis(2), &order);
        }

        let axes = GridAxes::new(
            axes.epoch,
            axes.time.clone(),
            axes.lat.with_values(lat, axes.lat.units()),
            axes.lon.with_values(lon, axes.lon.units()),
        )?;
        self.with_axes(axes, data.as_standard_layout().into_owned())
    }

    fn validate_time(&self, epoch: DateTime<Utc>) -> Result<Self> {
        let axes = self.axes();
        let unit = time_unit_days(axes.time.units())?;
        let shift = days_since(epoch, axes.epoch);
        let values: Vec<f64> = axes.time.values().iter().map(|t| t * unit + shift).collect();
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Coords(format!(
                "time axis is not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let axes = GridAxes::new(epoch, axes.time.with_values(values, DAYS), axes.lat.clone(), axes.lon.clone())?;
        self.with_axes(axes, self.data().clone())
    }

    fn sel_domain(&self, domain: &DomainBox) -> Result<Self> {
        let axes = self.axes();
        if !axes.lat.is_increasing() || !axes.lon.is_increasing() {
            return Err(Error::Coords(
                "sel_domain needs ascending lat/lon axes; run validate_latlon first".into(),
            ));
        }
        let lat = range_within(axes.lat.values(), domain.lat[0], domain.lat[1]);
        let lon = range_within(axes.lon.values(), domain.lon[0], domain.lon[1]);
        let time = match domain.time {
            Some([start, end]) => {
                if !axes.time.is_increasing() {
                    return Err(Error::Coords("time axis is not strictly increasing".into()));
                }
                let unit = time_unit_days(axes.time.units())?;
                let lo = days_since(axes.epoch, start) / unit;
                let hi = days_since(axes.epoch, end) / unit;
                range_within(axes.time.values(), lo, hi)
            }
            None => 0..axes.time.len(),
        };
        for (name, r) in [("time", &time), ("lat", &lat), ("lon", &lon)] {
            if r.is_empty() {
                return Err(Error::EmptyDomain(format!("no {name} coordinates inside the selection box")));
            }
        }
        let data = self
            .data()
            .slice(ndarray::s![time.clone(), lat.clone(), lon.clone()])
            .to_owned();
        let axes = GridAxes::new(axes.epoch, axes.time.select(time), axes.lat.select(lat), axes.lon.select(lon))?;
        self.with_axes(axes, data)
    }

    fn time_rescale(&self, freq: f64, unit: &str) -> Result<Self> {
        if !(freq.is_finite() && freq > 0.0) {
            return Err(Error::InvalidArgument(format!("time_rescale freq must be positive, got {freq}")));
        }
        let axes = self.axes();
        let factor = time_unit_days(axes.time.units())? / (freq * time_unit_days(unit)?);
        let values = axes.time.values().iter().map(|t| t * factor).collect();
        let axes = GridAxes::new(
            axes.epoch,
            axes.time.with_values(values, time_label(freq, unit)),
            axes.lat.clone(),
            axes.lon.clone(),
        )?;
        self.with_axes(axes, self.data().clone())
    }
}

impl GeoData for AlongTrackSet {
    fn validate_latlon(&self) -> Result<Self> {
        let lats: Vec<f64> = self.records().iter().map(|r| r.lat).collect();
        let lons: Vec<f64> = self.records().iter().map(|r| r.lon).collect();
        check_lat(&lats)?;
        check_lon(&lons)?;
        let mut records = self.records().to_vec();
        for r in &mut records {
            r.lon = wrap_lon(r.lon);
        }
        Ok(self.replace_records(records))
    }

    fn validate_time(&self, epoch: DateTime<Utc>) -> Result<Self> {
        let unit = time_unit_days(self.time_units())?;
        let shift = days_since(epoch, self.epoch());
        let records: Vec<_> = self
            .records()
            .iter()
            .map(|r| {
                let mut r = *r;
                r.time = r.time * unit + shift;
                r
            })
            .collect();
        if records.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(Error::Coords("track times are not non-decreasing".into()));
        }
        Ok(self.rebased(epoch, DAYS, records))
    }

    fn sel_domain(&self, domain: &DomainBox) -> Result<Self> {
        let unit = time_unit_days(self.time_units())?;
        let window = domain
            .time
            .map(|[a, b]| (days_since(self.epoch(), a) / unit, days_since(self.epoch(), b) / unit));
        let records: Vec<_> = self
            .records()
            .iter()
            .filter(|r| domain.contains(r.lat, r.lon))
            .filter(|r| window.is_none_or(|(lo, hi)| r.time >= lo && r.time <= hi))
            .copied()
            .collect();
        if records.is_empty() {
            return Err(Error::EmptyDomain("no track records inside the selection box".into()));
        }
        Ok(self.replace_records(records))
    }

    fn time_rescale(&self, freq: f64, unit: &str) -> Result<Self> {
        if !(freq.is_finite() && freq > 0.0) {
            return Err(Error::InvalidArgument(format!("time_rescale freq must be positive, got {freq}")));
        }
        let factor = time_unit_days(self.time_units())? / (freq * time_unit_days(unit)?);
        let records = self
            .records()
            .iter()
            .map(|r| {
                let mut r = *r;
                r.time *= factor;
                r
            })
            .collect();
        Ok(self.rebased(self.epoch(), &time_label(freq, unit), records))
    }
}

/// Deterministic random subset of `num_samples` records, kept in time order.
pub fn subset_track(track: &AlongTrackSet, num_samples: usize, seed: u64) -> AlongTrackSet {
    let n = track.len();
    if num_samples >= n {
        return track.clone();
    }
    let mut picked = Prng::new(seed).sample_indices(n, num_samples);
    picked.sort_unstable();
    let records = picked.into_iter().map(|i| track.records()[i]).collect();
    track.replace_records(records)
}

/// Converts lat/lon degrees to meters on a tangent plane anchored at the
/// south-west corner: `y = (lat - lat_min) R pi/180`,
/// `x = (lon - lon_min) R pi/180 cos(mean lat)`.
///
/// The mean latitude and the anchor are kept in `attrs` (`lat_mean_deg`,
/// `lat_min_deg`, `lon_min_deg`) for the Coriolis parameter and later lookups.
pub fn latlon_deg2m(field: &GriddedField) -> Result<GriddedField> {
    let axes = field.axes();
    if axes.lat.is_meters() || axes.lon.is_meters() {
        return Err(Error::InvalidArgument("lat/lon axes are already in meters".into()));
    }
    if !axes.lat.is_degrees() || !axes.lon.is_degrees() {
        return Err(Error::Coords("lat/lon axes are not in degrees".into()));
    }
    let rad = PI / 180.0;
    let lat_mean = axes.lat.mean();
    let lat_min = axes.lat.values().iter().copied().fold(f64::INFINITY, f64::min);
    let lon_min = axes.lon.values().iter().copied().fold(f64::INFINITY, f64::min);
    let coslat = (lat_mean * rad).cos();
    let y = axes.lat.values().iter().map(|v| (v - lat_min) * rad * EARTH_RADIUS_M).collect();
    let x = axes
        .lon
        .values()
        .iter()
        .map(|v| (v - lon_min) * rad * EARTH_RADIUS_M * coslat)
        .collect();
    let new_axes = GridAxes::new(
        axes.epoch,
        axes.time.clone(),
        axes.lat.with_values(y, METERS),
        axes.lon.with_values(x, METERS),
    )?;
    Ok(field
        .with_axes(new_axes, field.data().clone())?
        .with_attr("lat_mean_deg", lat_mean.to_string())
        .with_attr("lat_min_deg", lat_min.to_string())
        .with_attr("lon_min_deg", lon_min.to_string()))
}
