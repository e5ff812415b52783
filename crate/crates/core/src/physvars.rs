//! Physical diagnostics derived from sea surface height.
//!
//! Spatial derivatives use second-order finite differences on meter-valued
//! axes: three-point central differences in the interior and four-point
//! one-sided differences at the edges whose leading error matches the
//! interior one (three-point when only three nodes exist). Derivatives are
//! taken per time slice and NaN inputs propagate to every cell whose stencil
//! touches them.
//!
//! Geostrophic velocities use a constant Coriolis parameter evaluated at the
//! domain-mean latitude:
//!
//! ```text
//! u = -(g / f0) d(eta)/dy        v = (g / f0) d(eta)/dx
//! KE = (u^2 + v^2) / 2           zeta = dv/dx - du/dy        E = zeta^2 / 2
//! sigma_n = du/dx - dv/dy        sigma_s = dv/dx + du/dy
//! sigma = sqrt(sigma_n^2 + sigma_s^2)
//! OW = sigma_n^2 + sigma_s^2 - zeta^2
//! ```

use std::str::FromStr;

use ndarray::{Array3, ArrayView1, ArrayViewMut1, Axis, Zip};

use crate::grid::GriddedField;
use crate::{Error, Result};

pub const GRAVITY: f64 = 9.81;
pub const EARTH_ROTATION: f64 = 7.292115e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConstants {
    pub g: f64,
    pub omega: f64,
    pub f0: f64,
}

impl PhysConstants {
    /// Constants for a domain centred on `lat_deg`. Boxes within 1 degree of
    /// the equator are rejected since f0 vanishes there.
    pub fn at_latitude(lat_deg: f64) -> Result<Self> {
        if !lat_deg.is_finite() || lat_deg.abs() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "mean latitude {lat_deg} is within 1 degree of the equator; geostrophy is undefined"
            )));
        }
        Ok(PhysConstants {
            g: GRAVITY,
            omega: EARTH_ROTATION,
            f0: 2.0 * EARTH_ROTATION * lat_deg.to_radians().sin(),
        })
    }

    pub fn for_field(field: &GriddedField) -> Result<Self> {
        PhysConstants::at_latitude(mean_latitude(field)?)
    }
}

/// Mean latitude in degrees, read from the axis or, once the axes are in
/// meters, from the `lat_mean_deg` attribute left by `latlon_deg2m`.
pub fn mean_latitude(field: &GriddedField) -> Result<f64> {
    if field.lat().is_degrees() {
        return Ok(field.lat().mean());
    }
    field
        .attrs()
        .get("lat_mean_deg")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::InvalidArgument("field has no `lat_mean_deg` attribute for f0".into()))
}

/// The variables [`derive`] can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedVar {
    Sla,
    U,
    V,
    KineticEnergy,
    Vorticity,
    Enstrophy,
    Strain,
    OkuboWeiss,
}

impl DerivedVar {
    pub const ALL: [DerivedVar; 8] = [
        DerivedVar::Sla,
        DerivedVar::U,
        DerivedVar::V,
        DerivedVar::KineticEnergy,
        DerivedVar::Vorticity,
        DerivedVar::Enstrophy,
        DerivedVar::Strain,
        DerivedVar::OkuboWeiss,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DerivedVar::Sla => "sla",
            DerivedVar::U => "u",
            DerivedVar::V => "v",
            DerivedVar::KineticEnergy => "ke",
            DerivedVar::Vorticity => "vort",
            DerivedVar::Enstrophy => "ens",
            DerivedVar::Strain => "strain",
            DerivedVar::OkuboWeiss => "ow",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            DerivedVar::Sla => "m",
            DerivedVar::U | DerivedVar::V => "m s-1",
            DerivedVar::KineticEnergy => "m2 s-2",
            DerivedVar::Vorticity => "s-1",
            DerivedVar::Enstrophy | DerivedVar::Strain | DerivedVar::OkuboWeiss => "s-2",
        }
    }
}

impl FromStr for DerivedVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DerivedVar::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown derived variable `{s}`")))
    }
}

/// Weights `b` of a one-sided first derivative `sum b_i (f_i - f_0)` over
/// three neighbours at signed offsets `d`. The stencil is exact for
/// quadratics and its third-order error term equals `c f'''`, the error of
/// the adjacent central difference.
///
/// Matching that term keeps the error smooth up to the boundary, so a
/// derivative of a derivative (vorticity, strain) stays second order there.
fn matched_edge_weights(d: [f64; 3], c: f64) -> [f64; 3] {
    let m = [d, d.map(|v| v * v), d.map(|v| v * v * v)];
    let rhs = [1.0, 0.0, 6.0 * c];
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let det = det3(m);
    std::array::from_fn(|col| {
        let mut a = m;
        for row in 0..3 {
            a[row][col] = rhs[row];
        }
        det3(a) / det
    })
}

/// First derivative of a lane against its coordinates (second order).
fn differentiate_lane(f: ArrayView1<'_, f64>, x: &[f64], mut out: ArrayViewMut1<'_, f64>) {
    let n = f.len();
    // Differences against f0 keep constants exact.
    let edge = |i0: usize, step: isize| -> f64 {
        let at = |k: isize| (i0 as isize + k * step) as usize;
        if n == 3 {
            let (h1, h2) = (x[at(1)] - x[at(0)], x[at(2)] - x[at(1)]);
            return (h1 + h2) / (h1 * h2) * (f[at(1)] - f[at(0)]) - h1 / (h2 * (h1 + h2)) * (f[at(2)] - f[at(0)]);
        }
        let c = (x[at(1)] - x[at(0)]).abs() * (x[at(2)] - x[at(1)]).abs() / 6.0;
        let b = matched_edge_weights([1, 2, 3].map(|k| x[at(k)] - x[at(0)]), c);
        (1..=3).map(|k| b[k as usize - 1] * (f[at(k)] - f[at(0)])).sum()
    };
    out[0] = edge(0, 1);
    for i in 1..n - 1 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        out[i] = if hm == hp {
            // The zero-weighted centre keeps a NaN centre value from vanishing.
            (f[i + 1] - f[i - 1]) / (hm + hp) + 0.0 * f[i]
        } else {
            hm / (hp * (hm + hp)) * (f[i + 1] - f[i]) - hp / (hm * (hm + hp)) * (f[i - 1] - f[i])
        };
    }
    out[n - 1] = edge(n - 1, -1);
}

fn require_meters(field: &GriddedField) -> Result<()> {
    if !field.lat().is_meters() || !field.lon().is_meters() {
        return Err(Error::InvalidArgument(
            "spatial derivatives need lat/lon axes in meters; apply latlon_deg2m first".into(),
        ));
    }
    if !field.lat().is_increasing() || !field.lon().is_increasing() {
        return Err(Error::Coords("spatial axes must be strictly increasing".into()));
    }
    if field.lat().len() < 3 || field.lon().len() < 3 {
        return Err(Error::Shape("derivatives need at least 3 points along lat and lon".into()));
    }
    Ok(())
}

fn derivative(field: &GriddedField, axis: usize) -> Result<Array3<f64>> {
    require_meters(field)?;
    let coords = match axis {
        1 => field.lat().values(),
        2 => field.lon().values(),
        _ => unreachable!("only spatial derivatives"),
    };
    let mut out = Array3::<f64>::zeros(field.data().raw_dim());
    Zip::from(out.lanes_mut(Axis(axis)))
        .and(field.data().lanes(Axis(axis)))
        .for_each(|o, f| differentiate_lane(f, coords, o));
    Ok(out)
}

/// `d(field)/dx` along longitude (meters).
pub fn d_dx(field: &GriddedField) -> Result<Array3<f64>> {
    derivative(field, 2)
}

/// `d(field)/dy` along latitude (meters).
pub fn d_dy(field: &GriddedField) -> Result<Array3<f64>> {
    derivative(field, 1)
}

fn same_grid(a: &GriddedField, b: &GriddedField) -> Result<()> {
    if a.axes() != b.axes() {
        return Err(Error::Shape("fields are not on the same grid".into()));
    }
    Ok(())
}

/// Sea level anomaly: SSH minus its spatial mean over valid cells per time step.
pub fn sla(eta: &GriddedField) -> Result<GriddedField> {
    let mut data = eta.data().clone();
    for mut slice in data.outer_iter_mut() {
        let (sum, n) = slice
            .iter()
            .filter(|v| !v.is_nan())
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n > 0 {
            let mean = sum / n as f64;
            slice.mapv_inplace(|v| v - mean);
        }
    }
    eta.derived(DerivedVar::Sla.label(), DerivedVar::Sla.units(), data)
}

/// Geostrophic velocities `(u, v)`.
pub fn geostrophic_uv(eta: &GriddedField) -> Result<(GriddedField, GriddedField)> {
    let c = PhysConstants::for_field(eta)?;
    let scale = c.g / c.f0;
    let u = d_dy(eta)?.mapv(|d| -scale * d);
    let v = d_dx(eta)?.mapv(|d| scale * d);
    Ok((
        eta.derived(DerivedVar::U.label(), DerivedVar::U.units(), u)?,
        eta.derived(DerivedVar::V.label(), DerivedVar::V.units(), v)?,
    ))
}

pub fn kinetic_energy(u: &GriddedField, v: &GriddedField) -> Result<GriddedField> {
    same_grid(u, v)?;
    let mut ke = u.data().clone();
    ke.zip_mut_with(v.data(), |a, b| *a = 0.5 * (*a * *a + b * b));
    u.derived(DerivedVar::KineticEnergy.label(), DerivedVar::KineticEnergy.units(), ke)
}

pub fn relative_vorticity(u: &GriddedField, v: &GriddedField) -> Result<GriddedField> {
    same_grid(u, v)?;
    let mut zeta = d_dx(v)?;
    zeta.zip_mut_with(&d_dy(u)?, |a, b| *a -= b);
    u.derived(DerivedVar::Vorticity.label(), DerivedVar::Vorticity.units(), zeta)
}

pub fn enstrophy(zeta: &GriddedField) -> Result<GriddedField> {
    let e = zeta.data().mapv(|z| 0.5 * z * z);
    zeta.derived(DerivedVar::Enstrophy.label(), DerivedVar::Enstrophy.units(), e)
}

/// Strain components and magnitude.
#[derive(Debug, Clone)]
pub struct Strain {
    /// `du/dx - dv/dy`
    pub normal: Array3<f64>,
    /// `dv/dx + du/dy`
    pub shear: Array3<f64>,
    pub magnitude: GriddedField,
}

pub fn strain(u: &GriddedField, v: &GriddedField) -> Result<Strain> {
    same_grid(u, v)?;
    let mut normal = d_dx(u)?;
    normal.zip_mut_with(&d_dy(v)?, |a, b| *a -= b);
    let mut shear = d_dx(v)?;
    shear.zip_mut_with(&d_dy(u)?, |a, b| *a += b);
    let mut mag = normal.clone();
    mag.zip_mut_with(&shear, |a, b| *a = (*a * *a + b * b).sqrt());
    let magnitude = u.derived(DerivedVar::Strain.label(), DerivedVar::Strain.units(), mag)?;
    Ok(Strain {
        normal,
        shear,
        magnitude,
    })
}

pub fn okubo_weiss(u: &GriddedField, v: &GriddedField, zeta: &GriddedField) -> Result<GriddedField> {
    same_grid(u, zeta)?;
    let s = strain(u, v)?;
    let mut ow = s.normal;
    Zip::from(&mut ow)
        .and(&s.shear)
        .and(zeta.data())
        .for_each(|n, sh, z| *n = *n * *n + sh * sh - z * z);
    u.derived(DerivedVar::OkuboWeiss.label(), DerivedVar::OkuboWeiss.units(), ow)
}

/// Derives `var` from SSH, composing the chain in dependency order.
pub fn derive(eta: &GriddedField, var: DerivedVar) -> Result<GriddedField> {
    if var == DerivedVar::Sla {
        return sla(eta);
    }
    let (u, v) = geostrophic_uv(eta)?;
    match var {
        DerivedVar::Sla => unreachable!(),
        DerivedVar::U => Ok(u),
        DerivedVar::V => Ok(v),
        DerivedVar::KineticEnergy => kinetic_energy(&u, &v),
        DerivedVar::Vorticity => relative_vorticity(&u, &v),
        DerivedVar::Enstrophy => enstrophy(&relative_vorticity(&u, &v)?),
        DerivedVar::Strain => Ok(strain(&u, &v)?.magnitude),
        DerivedVar::OkuboWeiss => okubo_weiss(&u, &v, &relative_vorticity(&u, &v)?),
    }
}
