//! Observation operator for twin experiments: synthetic ground tracks,
//! sampling of a reference field along them, and train/eval splits.

mod split;
mod tracks;

pub use split::{osse_split, OsseSplit, SplitConfig};
pub use tracks::{generate_tracks, Constellation, SamplePoint, TrackKind, TrackPattern, TrackPoints};

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::grid::{days_since, time_unit_days, AlongTrackSet, DomainBox, GriddedField, TrackRecord};
use crate::prng::Prng;
use crate::regrid::interpolate_at;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    Gaussian,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseKind::None),
            "gaussian" => Ok(NoiseKind::Gaussian),
            _ => Err(Error::InvalidArgument(format!("unknown noise kind `{s}`"))),
        }
    }
}

/// Additive instrument noise. Each pass draws from its own stream seeded
/// with `seed ^ pass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Standard deviation in meters.
    pub std: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec {
        kind: NoiseKind::None,
        std: 0.0,
        seed: 0,
    };

    pub fn gaussian(std: f64, seed: u64) -> Result<Self> {
        if !(std >= 0.0 && std.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise std must be >= 0, got {std}")));
        }
        Ok(NoiseSpec {
            kind: NoiseKind::Gaussian,
            std,
            seed,
        })
    }
}

/// Pseudo-observations and the number of samples dropped because the
/// field was NaN or the point fell outside its hull.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub track: AlongTrackSet,
    pub dropped: usize,
}

/// Interpolates `field` at every point and adds noise.
pub fn sample_field(field: &GriddedField, points: &TrackPoints, noise: NoiseSpec) -> Result<Sampled> {
    if !field.lat().is_degrees() || !field.lon().is_degrees() {
        return Err(Error::Coords("sampling needs lat/lon axes in degrees".into()));
    }
    if !(noise.std >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise std must be >= 0, got {}", noise.std)));
    }
    let shift = days_since(field.epoch(), points.epoch);
    let unit = time_unit_days(field.time().units())?;
    let noisy = noise.kind == NoiseKind::Gaussian && noise.std > 0.0;
    let mut streams: BTreeMap<u32, Prng> = BTreeMap::new();
    let mut records = Vec::with_capacity(points.points.len());
    let mut dropped = 0;
    for p in &points.points {
        let mut v = interpolate_at(field, (p.time + shift) / unit, p.lat, p.lon);
        if noisy {
            let rng = streams
                .entry(p.pass)
                .or_insert_with(|| Prng::new(noise.seed ^ u64::from(p.pass)));
            v += noise.std * rng.gaussian();
        }
        if v.is_nan() {
            dropped += 1;
            continue;
        }
        records.push(TrackRecord {
            time: p.time + shift,
            lat: p.lat,
            lon: p.lon,
            value: v,
        });
    }
    Ok(Sampled {
        track: AlongTrackSet::new(field.epoch(), records)?,
        dropped,
    })
}

/// Flies `constellation` over the spatial extent and time span of `field`
/// and samples it. The time span runs from the first time step to one step
/// past the last.
pub fn simulate_over(field: &GriddedField, constellation: &Constellation, noise: NoiseSpec) -> Result<Sampled> {
    let extent = |v: &[f64]| [v[0], v[v.len() - 1]];
    let domain = DomainBox::new(extent(field.lat().values()), extent(field.lon().values()), None)?;
    let unit = time_unit_days(field.time().units())?;
    let t = field.time().values();
    let step = if t.len() > 1 { t[t.len() - 1] - t[t.len() - 2] } else { 1.0 / unit };
    let period = [t[0] * unit, (t[t.len() - 1] + step) * unit];
    let points = generate_tracks(constellation, &domain, field.epoch(), period)?;
    sample_field(field, &points, noise)
}

/// Fraction of grid cells holding at least one sample, per time step of
/// `axes` (samples bin to the nearest time node).
pub fn daily_coverage(track: &AlongTrackSet, axes: &crate::grid::GridAxes) -> Result<Vec<f64>> {
    let binned = crate::regrid::regrid_to_grid(track, axes)?;
    let [_, ny, nx] = axes.shape();
    Ok(binned
        .field
        .data()
        .outer_iter()
        .map(|s| s.iter().filter(|v| !v.is_nan()).count() as f64 / (ny * nx) as f64)
        .collect())
}
