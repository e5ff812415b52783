//! Analytic test fields: drifting Gaussian eddies on a small box.

use chrono::{DateTime, Utc};
use ndarray::Array3;

use crate::grid::{utc_date, CoordAxis, Dim, DomainBox, GridAxes, GriddedField, DAYS, DEGREES, EARTH_RADIUS_M};
use crate::prng::Prng;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct EddyConfig {
    pub nt: usize,
    pub ny: usize,
    pub nx: usize,
    /// South-west grid node in degrees.
    pub lat0: f64,
    pub lon0: f64,
    /// Grid step in degrees.
    pub step_deg: f64,
    pub epoch: DateTime<Utc>,
    pub eddies: usize,
    pub seed: u64,
}

impl Default for EddyConfig {
    /// 64 x 64 x 30 daily grid at 0.05 degrees centred near (38N, 60W).
    fn default() -> Self {
        EddyConfig {
            nt: 30,
            ny: 64,
            nx: 64,
            lat0: 36.4,
            lon0: -61.6,
            step_deg: 0.05,
            epoch: utc_date(2012, 10, 1),
            eddies: 5,
            seed: 42,
        }
    }
}

impl EddyConfig {
    pub fn axes(&self) -> Result<GridAxes> {
        GridAxes::new(
            self.epoch,
            CoordAxis::regular(Dim::Time, 0.0, 1.0, self.nt, DAYS)?,
            CoordAxis::regular(Dim::Lat, self.lat0, self.step_deg, self.ny, DEGREES)?,
            CoordAxis::regular(Dim::Lon, self.lon0, self.step_deg, self.nx, DEGREES)?,
        )
    }

    /// Closed box spanning the grid nodes.
    pub fn domain(&self) -> DomainBox {
        let span = |n: usize| self.step_deg * (n.max(2) - 1) as f64;
        DomainBox {
            lat: [self.lat0, self.lat0 + span(self.ny)],
            lon: [self.lon0, self.lon0 + span(self.nx)],
            time: None,
        }
    }
}

struct Eddy {
    x: f64,
    y: f64,
    amp: f64,
    radius: f64,
    u: f64,
    v: f64,
}

/// Sum of Gaussian eddies drifting mostly westward on a 0.5 m mean level.
/// Distances use a tangent plane at the box centre; velocities are in km/day.
pub fn eddy_field(cfg: &EddyConfig) -> Result<GriddedField> {
    let axes = cfg.axes()?;
    let mut rng = Prng::new(cfg.seed);
    let km = EARTH_RADIUS_M * 1e-3 * std::f64::consts::PI / 180.0;
    let lat_c = axes.lat.mean();
    let lon_c = axes.lon.mean();
    let coslat = lat_c.to_radians().cos();
    let width = cfg.step_deg * cfg.nx as f64 * km * coslat;
    let height = cfg.step_deg * cfg.ny as f64 * km;
    let eddies: Vec<Eddy> = (0..cfg.eddies)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            Eddy {
                x: (rng.uniform() - 0.5) * width,
                y: (rng.uniform() - 0.5) * height,
                amp: sign * (0.1 + 0.2 * rng.uniform()),
                radius: 25.0 + 35.0 * rng.uniform(),
                u: -(2.0 + 4.0 * rng.uniform()),
                v: 4.0 * rng.uniform() - 2.0,
            }
        })
        .collect();
    let lat = axes.lat.values().to_vec();
    let lon = axes.lon.values().to_vec();
    let time = axes.time.values().to_vec();
    let data = Array3::from_shape_fn((cfg.nt, cfg.ny, cfg.nx), |(t, j, i)| {
        let x = (lon[i] - lon_c) * km * coslat;
        let y = (lat[j] - lat_c) * km;
        0.5 + eddies
            .iter()
            .map(|e| {
                let dx = x - e.x - e.u * time[t];
                let dy = y - e.y - e.v * time[t];
                e.amp * (-(dx * dx + dy * dy) / (2.0 * e.radius * e.radius)).exp()
            })
            .sum::<f64>()
    });
    Ok(GriddedField::new("ssh", "m", axes, data)?.with_attr("source", "synthetic eddies"))
}
