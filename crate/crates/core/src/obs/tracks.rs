//! Straight ground tracks on a local tangent plane.
//!
//! Each pattern defines a lattice of parallel lines `c = m * track_spacing +
//! track_offset` (signed cross-track distance from the box centre) at a
//! heading of `inclination_deg` measured counter-clockwise from east. Every
//! line is flown once per repeat cycle; the visit order is shuffled with a
//! golden-ratio sequence so consecutive passes land far apart.

use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::grid::{DomainBox, EARTH_RADIUS_M};
use crate::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrackKind {
    Nadir,
    /// Wide-swath sampling around the nadir line. Lengths in meters.
    Swath {
        half_width: f64,
        across_spacing: f64,
        nadir_gap: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackPattern {
    pub kind: TrackKind,
    /// Heading in degrees counter-clockwise from east, in `(0, 180)`.
    pub inclination_deg: f64,
    /// Meters between samples along the track.
    pub along_track_spacing: f64,
    /// Meters per second.
    pub ground_speed: f64,
    pub repeat_cycle_days: f64,
    /// Meters between neighbouring parallel tracks.
    pub track_spacing: f64,
    /// Meters; shifts the track lattice across-track.
    pub track_offset: f64,
    /// Days; shifts every visit time.
    pub phase_days: f64,
}

impl TrackPattern {
    pub fn nadir(inclination_deg: f64) -> Self {
        TrackPattern {
            kind: TrackKind::Nadir,
            inclination_deg,
            along_track_spacing: 6_000.0,
            ground_speed: 6_600.0,
            repeat_cycle_days: 10.0,
            track_spacing: 150_000.0,
            track_offset: 0.0,
            phase_days: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("along_track_spacing", self.along_track_spacing),
            ("ground_speed", self.ground_speed),
            ("repeat_cycle_days", self.repeat_cycle_days),
            ("track_spacing", self.track_spacing),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.inclination_deg > 0.0 && self.inclination_deg < 180.0) {
            return Err(Error::InvalidArgument(format!(
                "inclination must be in (0, 180), got {}",
                self.inclination_deg
            )));
        }
        if let TrackKind::Swath {
            half_width,
            across_spacing,
            nadir_gap,
        } = self.kind
        {
            if !(half_width >= 0.0 && across_spacing > 0.0 && nadir_gap >= 0.0) {
                return Err(Error::InvalidArgument(
                    "swath needs half_width >= 0, across_spacing > 0, nadir_gap >= 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Signed across-track offsets sampled at each nadir point.
    fn across_offsets(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        if let TrackKind::Swath {
            half_width,
            across_spacing,
            nadir_gap,
        } = self.kind
        {
            let mut k = 1;
            loop {
                let c = k as f64 * across_spacing;
                if c > half_width {
                    break;
                }
                if c >= nadir_gap / 2.0 {
                    out.push(-c);
                    out.push(c);
                }
                k += 1;
            }
            out.sort_by(f64::total_cmp);
        }
        out
    }
}

/// A named set of patterns flown together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constellation {
    pub name: String,
    pub patterns: Vec<TrackPattern>,
}

impl Constellation {
    /// Four nadir altimeters on interleaved ascending/descending headings.
    pub fn nadir_4sat() -> Self {
        let patterns = [66.0, 114.0, 66.0, 114.0]
            .into_iter()
            .enumerate()
            .map(|(i, inc)| TrackPattern {
                track_offset: if i < 2 { 0.0 } else { 75_000.0 },
                phase_days: 0.25 * i as f64,
                ..TrackPattern::nadir(inc)
            })
            .collect();
        Constellation {
            name: "nadir-4sat".into(),
            patterns,
        }
    }

    /// One wide-swath instrument with a nadir altimeter in its gap.
    pub fn swot_like() -> Self {
        Constellation {
            name: "swot-like".into(),
            patterns: vec![TrackPattern {
                kind: TrackKind::Swath {
                    half_width: 120_000.0,
                    across_spacing: 2_000.0,
                    nadir_gap: 20_000.0,
                },
                repeat_cycle_days: 21.0,
                track_spacing: 250_000.0,
                ..TrackPattern::nadir(77.6)
            }],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "nadir-4sat" => Some(Constellation::nadir_4sat()),
            "swot-like" => Some(Constellation::swot_like()),
            _ => None,
        }
    }

    /// Parses a constellation, or a single pattern, from JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        if let Ok(c) = serde_json::from_str::<Constellation>(text) {
            return Ok(c);
        }
        serde_json::from_str::<TrackPattern>(text)
            .map(|p| Constellation {
                name: "custom".into(),
                patterns: vec![p],
            })
            .map_err(|e| Error::parse("pattern", e.to_string()))
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Constellation::preset(s).ok_or_else(|| Error::InvalidArgument(format!("unknown track pattern `{s}`")))
    }
}

/// A sample location. `time` is in days since [`TrackPoints::epoch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub time: f64,
    pub lat: f64,
    pub lon: f64,
    /// Pass id, numbered by pass start time across the constellation.
    pub pass: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoints {
    pub epoch: DateTime<Utc>,
    pub points: Vec<SamplePoint>,
}

/// Tangent plane at the box centre (equirectangular about that point).
pub(crate) struct Plane {
    lat0: f64,
    lon0: f64,
    kx: f64,
    ky: f64,
}

impl Plane {
    pub(crate) fn new(domain: &DomainBox) -> Self {
        let lat0 = 0.5 * (domain.lat[0] + domain.lat[1]);
        let lon0 = 0.5 * (domain.lon[0] + domain.lon[1]);
        let ky = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        Plane {
            lat0,
            lon0,
            kx: ky * lat0.to_radians().cos(),
            ky,
        }
    }

    pub(crate) fn to_xy(&self, lat: f64, lon: f64) -> (f64, f64) {
        ((lon - self.lon0) * self.kx, (lat - self.lat0) * self.ky)
    }

    pub(crate) fn to_latlon(&self, x: f64, y: f64) -> (f64, f64) {
        (self.lat0 + y / self.ky, self.lon0 + x / self.kx)
    }
}

struct Pass {
    start: f64,
    pattern: usize,
    line: f64,
}

/// Samples of every pass over `domain` whose points fall in
/// `[period[0], period[1])`, days since `epoch`. Points are ordered by pass,
/// then along-track, then across-track.
pub fn generate_tracks(
    constellation: &Constellation,
    domain: &DomainBox,
    epoch: DateTime<Utc>,
    period: [f64; 2],
) -> Result<TrackPoints> {
    for p in &constellation.patterns {
        p.validate()?;
    }
    let mut out = TrackPoints {
        epoch,
        points: Vec::new(),
    };
    if !(period[1] > period[0]) {
        return Ok(out);
    }
    let plane = Plane::new(domain);
    let (x1, y1) = plane.to_xy(domain.lat[1], domain.lon[1]);
    let half_diag = x1.hypot(y1);

    let mut passes = Vec::new();
    for (pi, p) in constellation.patterns.iter().enumerate() {
        let transit = 2.0 * half_diag / p.ground_speed / 86_400.0;
        let m_lo = ((-half_diag - p.track_offset) / p.track_spacing).ceil() as i64;
        let m_hi = ((half_diag - p.track_offset) / p.track_spacing).floor() as i64;
        let first_cycle = ((period[0] - p.phase_days - transit) / p.repeat_cycle_days).floor() as i64 - 1;
        let last_cycle = ((period[1] - p.phase_days) / p.repeat_cycle_days).ceil() as i64;
        for cycle in first_cycle..=last_cycle {
            for m in m_lo..=m_hi {
                let slot = (m as f64 * GOLDEN).rem_euclid(1.0);
                let start = p.phase_days + p.repeat_cycle_days * (cycle as f64 + slot);
                if start + transit < period[0] || start >= period[1] {
                    continue;
                }
                passes.push(Pass {
                    start,
                    pattern: pi,
                    line: m as f64 * p.track_spacing + p.track_offset,
                });
            }
        }
    }
    passes.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.pattern.cmp(&b.pattern)).then(a.line.total_cmp(&b.line)));

    let mut pass_id = 0u32;
    for pass in &passes {
        let p = &constellation.patterns[pass.pattern];
        let theta = p.inclination_deg.to_radians();
        let (dx, dy) = (theta.cos(), theta.sin());
        let (nx, ny) = (-dy, dx);
        let offsets = p.across_offsets();
        let n_along = (2.0 * half_diag / p.along_track_spacing).floor() as usize;
        let mut any = false;
        for j in 0..=n_along {
            let s = -half_diag + j as f64 * p.along_track_spacing;
            let time = pass.start + (s + half_diag) / p.ground_speed / 86_400.0;
            if time < period[0] || time >= period[1] {
                continue;
            }
            for c in &offsets {
                let across = pass.line + c;
                let (lat, lon) = plane.to_latlon(across * nx + s * dx, across * ny + s * dy);
                if domain.contains(lat, lon) {
                    out.points.push(SamplePoint {
                        time,
                        lat,
                        lon,
                        pass: pass_id,
                    });
                    any = true;
                }
            }
        }
        if any {
            pass_id += 1;
        }
    }
    Ok(out)
}
