//! Moving data between along-track samples and regular grids, plus
//! Gauss-Seidel infill of missing grid cells.

mod fill;

pub use fill::{fill_nans_gauss_seidel, harmonic_residual, FillConfig, FillStats};

use ndarray::{Array3, Axis};
use rayon::prelude::*;

use crate::grid::{days_since, time_unit_days, AlongTrackSet, CoordAxis, GridAxes, GriddedField, TrackRecord};
use crate::{Error, Result};

/// Result of binning a track onto a grid.
#[derive(Debug, Clone)]
pub struct Binned {
    pub field: GriddedField,
    /// Records that fell outside every cell.
    pub dropped: usize,
}

fn require_ascending(axes: &GridAxes) -> Result<()> {
    for axis in [&axes.time, &axes.lat, &axes.lon] {
        if axis.is_empty() {
            return Err(Error::Shape(format!("target {} axis is empty", axis.dim())));
        }
        if !axis.is_increasing() {
            return Err(Error::Coords(format!(
                "{} axis must be strictly increasing; run validate_latlon first",
                axis.dim()
            )));
        }
    }
    Ok(())
}

fn require_degrees(axes: &GridAxes) -> Result<()> {
    if !axes.lat.is_degrees() || !axes.lon.is_degrees() {
        return Err(Error::Coords("track regridding needs lat/lon axes in degrees".into()));
    }
    Ok(())
}

/// Converts track record times into the grid's time coordinate.
fn time_mapper(track: &AlongTrackSet, axes: &GridAxes) -> Result<impl Fn(&TrackRecord) -> f64> {
    let track_unit = time_unit_days(track.time_units())?;
    let grid_unit = time_unit_days(axes.time.units())?;
    let shift = days_since(axes.epoch, track.epoch());
    Ok(move |r: &TrackRecord| (r.time * track_unit + shift) / grid_unit)
}

/// Index of the cell whose centre is nearest `v`, if `v` is within half the
/// local spacing of it. Ties go to the lower cell.
fn nearest_cell(axis: &CoordAxis, v: f64) -> Option<usize> {
    let x = axis.values();
    let n = x.len();
    if n == 1 {
        return ((v - x[0]).abs() <= 0.5).then_some(0);
    }
    let hi = x.partition_point(|c| *c < v);
    let i = if hi == 0 {
        0
    } else if hi == n {
        n - 1
    } else if v - x[hi - 1] <= x[hi] - v {
        hi - 1
    } else {
        hi
    };
    let half = if i == 0 {
        0.5 * (x[1] - x[0])
    } else if i == n - 1 {
        0.5 * (x[n - 1] - x[n - 2])
    } else if v < x[i] {
        0.5 * (x[i] - x[i - 1])
    } else {
        0.5 * (x[i + 1] - x[i])
    };
    ((v - x[i]).abs() <= half).then_some(i)
}

/// Bins records onto `target` by nearest cell centre and averages each cell.
pub fn regrid_to_grid(track: &AlongTrackSet, target: &GridAxes) -> Result<Binned> {
    require_ascending(target)?;
    require_degrees(target)?;
    let to_time = time_mapper(track, target)?;
    let shape = target.shape();
    let mut sum = Array3::<f64>::zeros((shape[0], shape[1], shape[2]));
    let mut count = Array3::<u32>::zeros(sum.raw_dim());
    let mut dropped = 0;
    for r in track.records() {
        let cell = (
            nearest_cell(&target.time, to_time(r)),
            nearest_cell(&target.lat, r.lat),
            nearest_cell(&target.lon, r.lon),
        );
        match cell {
            (Some(t), Some(j), Some(i)) if !r.value.is_nan() => {
                sum[[t, j, i]] += r.value;
                count[[t, j, i]] += 1;
            }
            (Some(_), Some(_), Some(_)) => {}
            _ => dropped += 1,
        }
    }
    ndarray::Zip::from(&mut sum).and(&count).for_each(|s, c| {
        *s = if *c == 0 { f64::NAN } else { *s / f64::from(*c) };
    });
    let field = GriddedField::new(track.var(), track.units(), target.clone(), sum)?;
    Ok(Binned { field, dropped })
}

/// Bracketing index and fractional weight of `v` on an ascending axis, or
/// `None` outside the hull.
fn bracket(x: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = x.len();
    if n == 1 {
        return (v == x[0]).then_some((0, 0.0));
    }
    if !(v >= x[0] && v <= x[n - 1]) {
        return None;
    }
    let i = x.partition_point(|c| *c <= v).clamp(1, n - 1) - 1;
    Some((i, (v - x[i]) / (x[i + 1] - x[i])))
}

/// Trilinear interpolation at `(time, lat, lon)` in the field's own
/// coordinates. Weights are renormalized over non-NaN corners; the result is
/// NaN outside the hull or when every contributing corner is NaN.
pub fn interpolate_at(field: &GriddedField, time: f64, lat: f64, lon: f64) -> f64 {
    let (Some((t, wt)), Some((j, wy)), Some((i, wx))) = (
        bracket(field.time().values(), time),
        bracket(field.lat().values(), lat),
        bracket(field.lon().values(), lon),
    ) else {
        return f64::NAN;
    };
    let data = field.data();
    let [nt, ny, nx] = field.shape();
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for (dt, ft) in [(0, 1.0 - wt), (1, wt)] {
        for (dy, fy) in [(0, 1.0 - wy), (1, wy)] {
            for (dx, fx) in [(0, 1.0 - wx), (1, wx)] {
                let w = ft * fy * fx;
                if w <= 0.0 || t + dt >= nt || j + dy >= ny || i + dx >= nx {
                    continue;
                }
                let v = data[[t + dt, j + dy, i + dx]];
                if !v.is_nan() {
                    acc += w * v;
                    wsum += w;
                }
            }
        }
    }
    if wsum > 0.0 {
        acc / wsum
    } else {
        f64::NAN
    }
}

/// Samples the field at every record of `track`, keeping the track's
/// coordinates.
pub fn regrid_to_track(field: &GriddedField, track: &AlongTrackSet) -> Result<AlongTrackSet> {
    require_ascending(field.axes())?;
    require_degrees(field.axes())?;
    let to_time = time_mapper(track, field.axes())?;
    let values: Vec<f64> = track
        .records()
        .par_iter()
        .map(|r| interpolate_at(field, to_time(r), r.lat, r.lon))
        .collect();
    track.with_values(&values)
}

/// Trilinear resampling of `field` onto `target` axes (same units).
pub fn regrid_grid_to_grid(field: &GriddedField, target: &GridAxes) -> Result<GriddedField> {
    require_ascending(field.axes())?;
    require_ascending(target)?;
    let src = field.axes();
    for (a, b) in [(&src.time, &target.time), (&src.lat, &target.lat), (&src.lon, &target.lon)] {
        if a.units() != b.units() {
            return Err(Error::Coords(format!(
                "{} axis units differ: `{}` vs `{}`",
                a.dim(),
                a.units(),
                b.units()
            )));
        }
    }
    let shift = days_since(src.epoch, target.epoch) / time_unit_days(src.time.units())?;
    let shape = target.shape();
    let mut data = Array3::<f64>::zeros((shape[0], shape[1], shape[2]));
    data.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(t, mut slice)| {
            let tv = target.time.values()[t] + shift;
            for (j, &y) in target.lat.values().iter().enumerate() {
                for (i, &x) in target.lon.values().iter().enumerate() {
                    slice[[j, i]] = interpolate_at(field, tv, y, x);
                }
            }
        });
    Ok(GriddedField::new(field.var(), field.units(), target.clone(), data)?.with_attrs(field.attrs().clone()))
}
