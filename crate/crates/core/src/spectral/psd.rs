//! Power spectral densities for gridded fields and along-track series.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{s, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{psd_score_from, Conditioning, Detrend, Geometry, PsdScoreCurve, SpectrumResult, Window};
use crate::grid::{time_unit_days, AlongTrackSet, CoordAxis, GriddedField, TrackRecord, EARTH_RADIUS_M};
use crate::{Error, Result};

/// Periodic Hann taper of length `n`.
pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

fn taper(n: usize, window: Window) -> Vec<f64> {
    match window {
        Window::Hann if n > 1 => hann(n),
        _ => vec![1.0; n],
    }
}

/// Removes the mean or the least-squares plane from a regular 2-D plane.
fn detrend_plane(p: &mut Array2<f64>, detrend: Detrend) {
    if detrend == Detrend::None {
        return;
    }
    let mean = p.mean().unwrap_or(0.0);
    p.mapv_inplace(|v| v - mean);
    if detrend == Detrend::Linear {
        let (n0, n1) = p.dim();
        let c0 = (n0 as f64 - 1.0) / 2.0;
        let c1 = (n1 as f64 - 1.0) / 2.0;
        // Centred index coordinates are orthogonal on a full grid, so each
        // slope is an independent projection.
        let (mut s0, mut s1, mut q0, mut q1) = (0.0, 0.0, 0.0, 0.0);
        for ((i, j), v) in p.indexed_iter() {
            let x0 = i as f64 - c0;
            let x1 = j as f64 - c1;
            s0 += x0 * v;
            s1 += x1 * v;
            q0 += x0 * x0;
            q1 += x1 * x1;
        }
        let b0 = if q0 > 0.0 { s0 / q0 } else { 0.0 };
        let b1 = if q1 > 0.0 { s1 / q1 } else { 0.0 };
        for ((i, j), v) in p.indexed_iter_mut() {
            *v -= b0 * (i as f64 - c0) + b1 * (j as f64 - c1);
        }
    }
}

struct Plan2 {
    f0: Arc<dyn Fft<f64>>,
    f1: Arc<dyn Fft<f64>>,
    w0: Vec<f64>,
    w1: Vec<f64>,
    /// `1 / mean(w^2)` over the 2-D taper.
    energy: f64,
}

impl Plan2 {
    fn new(n0: usize, n1: usize, window: Window) -> Self {
        let mut planner = FftPlanner::new();
        let w0 = taper(n0, window);
        let w1 = taper(n1, window);
        let m0 = w0.iter().map(|w| w * w).sum::<f64>() / n0 as f64;
        let m1 = w1.iter().map(|w| w * w).sum::<f64>() / n1 as f64;
        Plan2 {
            f0: planner.plan_fft_forward(n0),
            f1: planner.plan_fft_forward(n1),
            w0,
            w1,
            energy: 1.0 / (m0 * m1),
        }
    }

    /// Two-sided density of one plane, spacings `d0`, `d1`.
    fn density(&self, plane: ArrayView2<'_, f64>, cond: Conditioning, d0: f64, d1: f64) -> Array2<f64> {
        let (n0, n1) = plane.dim();
        let mut p = plane.to_owned();
        detrend_plane(&mut p, cond.detrend);
        let mut buf: Vec<Complex64> = p
            .indexed_iter()
            .map(|((i, j), v)| Complex64::new(v * self.w0[i] * self.w1[j], 0.0))
            .collect();
        for row in buf.chunks_exact_mut(n1) {
            self.f1.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n0];
        for j in 0..n1 {
            for i in 0..n0 {
                col[i] = buf[i * n1 + j];
            }
            self.f0.process(&mut col);
            for i in 0..n0 {
                buf[i * n1 + j] = col[i];
            }
        }
        let n = (n0 * n1) as f64;
        // dk0 * dk1 = 1 / (n d0 d1)
        let scale = self.energy * d0 * d1 / n;
        Array2::from_shape_vec((n0, n1), buf.iter().map(|c| c.norm_sqr() * scale).collect())
            .expect("plane shape")
    }
}

fn folded_index(m: usize, n: usize) -> usize {
    m.min(n - m)
}

/// Folds a two-sided plane onto non-negative frequencies on both axes.
fn fold2(p: &Array2<f64>) -> Array2<f64> {
    let (n0, n1) = p.dim();
    let mut out = Array2::zeros((n0 / 2 + 1, n1 / 2 + 1));
    for ((i, j), v) in p.indexed_iter() {
        out[[folded_index(i, n0), folded_index(j, n1)]] += v;
    }
    out
}

fn signed_index(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

fn uniform_step(axis: &CoordAxis) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::Shape(format!("{} axis needs at least 2 points for a spectrum", axis.dim())));
    }
    axis.uniform_spacing()
        .ok_or_else(|| Error::Coords(format!("{} axis is not uniformly spaced and increasing", axis.dim())))
}

fn spatial_steps(field: &GriddedField) -> Result<(f64, f64)> {
    if !field.lat().is_meters() || !field.lon().is_meters() {
        return Err(Error::InvalidArgument(
            "spectra need lat/lon axes in meters; apply latlon_deg2m first".into(),
        ));
    }
    if field.data().iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("field contains NaN; fill missing cells first".into()));
    }
    Ok((uniform_step(field.lat())?, uniform_step(field.lon())?))
}

fn frequencies(n: usize, d: f64) -> Vec<f64> {
    let dk = 1.0 / (n as f64 * d);
    (0..=n / 2).map(|m| m as f64 * dk).collect()
}

fn average(parts: Vec<Array2<f64>>) -> Array2<f64> {
    let n = parts.len() as f64;
    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("at least one part");
    for p in iter {
        acc += &p;
    }
    acc / n
}

/// Radially binned spatial spectrum, averaged over time.
///
/// Bins are centred on `i * dk_r` for `i = 1..=min(ny, nx) / 2` with
/// `dk_r = max(dk_x, dk_y)`. Each bin sums its members' density times
/// `dk_x dk_y / dk_r`.
pub fn psd_isotropic(field: &GriddedField, cond: Conditioning) -> Result<SpectrumResult> {
    let (dy, dx) = spatial_steps(field)?;
    let [nt, ny, nx] = field.shape();
    let plan = Plan2::new(ny, nx, cond.window);
    let dky = 1.0 / (ny as f64 * dy);
    let dkx = 1.0 / (nx as f64 * dx);
    let dkr = dkx.max(dky);
    let nb = ny.min(nx) / 2;
    if nb == 0 {
        return Err(Error::Shape("isotropic spectrum needs at least 2 points per axis".into()));
    }
    let mut bin_of = Array2::<usize>::zeros((ny, nx));
    let mut counts = vec![0usize; nb];
    for ((j, i), b) in bin_of.indexed_iter_mut() {
        let kr = (signed_index(j, ny) * dky).hypot(signed_index(i, nx) * dkx);
        *b = (kr / dkr + 0.5).floor() as usize;
        if (1..=nb).contains(b) {
            counts[*b - 1] += 1;
        }
    }
    let parts: Vec<Array2<f64>> = (0..nt)
        .into_par_iter()
        .map(|t| {
            let p = plan.density(field.data().index_axis(Axis(0), t), cond, dy, dx);
            let mut iso = Array2::zeros((1, nb));
            for (v, b) in p.iter().zip(bin_of.iter()) {
                if (1..=nb).contains(b) {
                    iso[[0, b - 1]] += v * dkx * dky / dkr;
                }
            }
            iso
        })
        .collect();
    Ok(SpectrumResult {
        geometry: Geometry::Isotropic,
        axis1: (1..=nb).map(|i| i as f64 * dkr).collect(),
        axis2: None,
        psd: average(parts),
        counts: Some(counts),
    })
}

/// Zonal-wavenumber by frequency spectrum of each latitude row, averaged
/// over latitude.
pub fn psd_spacetime(field: &GriddedField, cond: Conditioning) -> Result<SpectrumResult> {
    let (_, dx) = spatial_steps(field)?;
    let dt = uniform_step(field.time())? * time_unit_days(field.time().units())?;
    let [nt, ny, nx] = field.shape();
    let plan = Plan2::new(nt, nx, cond.window);
    let parts: Vec<Array2<f64>> = (0..ny)
        .into_par_iter()
        .map(|j| fold2(&plan.density(field.data().slice(s![.., j, ..]), cond, dt, dx)))
        .collect();
    Ok(SpectrumResult {
        geometry: Geometry::LonTime,
        axis1: frequencies(nx, dx),
        axis2: Some(frequencies(nt, dt)),
        psd: average(parts),
        counts: None,
    })
}

/// Zonal by meridional wavenumber spectrum, averaged over time.
pub fn psd_latlon(field: &GriddedField, cond: Conditioning) -> Result<SpectrumResult> {
    let (dy, dx) = spatial_steps(field)?;
    let [nt, ny, nx] = field.shape();
    let plan = Plan2::new(ny, nx, cond.window);
    let parts: Vec<Array2<f64>> = (0..nt)
        .into_par_iter()
        .map(|t| fold2(&plan.density(field.data().index_axis(Axis(0), t), cond, dy, dx)))
        .collect();
    Ok(SpectrumResult {
        geometry: Geometry::LonLat,
        axis1: frequencies(nx, dx),
        axis2: Some(frequencies(ny, dy)),
        psd: average(parts),
        counts: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlongTrackConfig {
    pub segment_len: usize,
    pub window: Window,
}

impl Default for AlongTrackConfig {
    fn default() -> Self {
        AlongTrackConfig {
            segment_len: 256,
            window: Window::Hann,
        }
    }
}

/// Along-track spectra of the truth and of the error, with their score.
#[derive(Debug, Clone)]
pub struct AlongTrackPsd {
    pub truth: SpectrumResult,
    pub error: SpectrumResult,
    pub score: PsdScoreCurve,
    pub segments: usize,
    /// Median along-track spacing in meters.
    pub spacing: f64,
}

pub(crate) fn haversine_m(a: &TrackRecord, b: &TrackRecord) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Index ranges of non-overlapping `len`-sample segments inside contiguous
/// runs. Runs break at gaps of at least twice the median spacing and at NaN
/// samples.
pub(crate) fn segment_ranges(records: &[TrackRecord], valid: &[bool], len: usize) -> (Vec<std::ops::Range<usize>>, f64) {
    if records.len() < 2 {
        return (Vec::new(), f64::NAN);
    }
    let gaps: Vec<f64> = records.windows(2).map(|w| haversine_m(&w[0], &w[1])).collect();
    let spacing = median(&mut gaps.clone());
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let close = |s: usize, end: usize, out: &mut Vec<std::ops::Range<usize>>| {
        let mut a = s;
        while a + len <= end {
            out.push(a..a + len);
            a += len;
        }
    };
    for i in 0..records.len() {
        if !valid[i] {
            if let Some(s) = start.take() {
                close(s, i, &mut out);
            }
            continue;
        }
        match start {
            None => start = Some(i),
            Some(s) if gaps[i - 1] >= 2.0 * spacing => {
                close(s, i, &mut out);
                start = Some(i);
            }
            Some(_) => {}
        }
    }
    if let Some(s) = start {
        close(s, records.len(), &mut out);
    }
    (out, spacing)
}

/// Along-track spectra of `truth` and `truth - pred` over matching segments.
pub fn psd_alongtrack(truth: &AlongTrackSet, pred: &AlongTrackSet, cfg: AlongTrackConfig) -> Result<AlongTrackPsd> {
    if truth.len() != pred.len()
        || truth
            .records()
            .iter()
            .zip(pred.records())
            .any(|(a, b)| (a.time, a.lat, a.lon) != (b.time, b.lat, b.lon))
    {
        return Err(Error::Shape("truth and prediction tracks must share sample points".into()));
    }
    if cfg.segment_len < 2 {
        return Err(Error::InvalidArgument("segment length must be at least 2".into()));
    }
    let valid: Vec<bool> = truth
        .records()
        .iter()
        .zip(pred.records())
        .map(|(a, b)| !a.value.is_nan() && !b.value.is_nan())
        .collect();
    let (segments, spacing) = segment_ranges(truth.records(), &valid, cfg.segment_len);
    if segments.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "only {} usable along-track segments of {} samples; need at least 2",
            segments.len(),
            cfg.segment_len
        )));
    }
    let n = cfg.segment_len;
    let plan = Plan2::new(1, n, cfg.window);
    let one_sided = |x: Vec<f64>| -> Array2<f64> {
        let plane = Array2::from_shape_vec((1, n), x).expect("segment");
        let cond = Conditioning {
            window: cfg.window,
            detrend: Detrend::Mean,
        };
        let p = plan.density(plane.view(), cond, 1.0, spacing);
        fold2(&p)
    };
    let spectra: Vec<(Array2<f64>, Array2<f64>)> = segments
        .par_iter()
        .map(|r| {
            let t: Vec<f64> = truth.records()[r.clone()].iter().map(|x| x.value).collect();
            let e: Vec<f64> = truth.records()[r.clone()]
                .iter()
                .zip(&pred.records()[r.clone()])
                .map(|(a, b)| a.value - b.value)
                .collect();
            (one_sided(t), one_sided(e))
        })
        .collect();
    let (ts, es): (Vec<_>, Vec<_>) = spectra.into_iter().unzip();
    let axis1 = frequencies(n, spacing);
    let make = |psd| SpectrumResult {
        geometry: Geometry::Alongtrack,
        axis1: axis1.clone(),
        axis2: None,
        psd,
        counts: None,
    };
    let truth_spec = make(average(ts));
    let error_spec = make(average(es));
    let score = psd_score_from(&truth_spec, &error_spec)?;
    Ok(AlongTrackPsd {
        truth: truth_spec,
        error: error_spec,
        score,
        segments: segments.len(),
        spacing,
    })
}
