//! Spectral scores and the resolved-scale criterion.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{psd_isotropic, psd_latlon, psd_spacetime, Conditioning, Geometry, PsdScoreCurve, SpectrumResult};
use crate::grid::GriddedField;
use crate::{Error, Result};

/// Score threshold defining the resolved scale.
pub const THRESHOLD: f64 = 0.5;

/// `1 - error / truth` per bin; NaN where the truth density is below
/// `1e-15` of its maximum.
pub fn psd_score_from(truth: &SpectrumResult, error: &SpectrumResult) -> Result<PsdScoreCurve> {
    truth.same_axes(error)?;
    let max = truth.psd.iter().copied().fold(0.0, f64::max);
    let floor = 1e-15 * max;
    let mut score = Array2::zeros(truth.psd.raw_dim());
    ndarray::Zip::from(&mut score)
        .and(&truth.psd)
        .and(&error.psd)
        .for_each(|s, t, e| *s = if *t <= floor || *t == 0.0 { f64::NAN } else { 1.0 - e / t });
    Ok(PsdScoreCurve {
        geometry: truth.geometry,
        axis1: truth.axis1.clone(),
        axis2: truth.axis2.clone(),
        score,
    })
}

/// PSD score of `pred` against `truth` on a gridded geometry, with identical
/// conditioning for the truth and the error `truth - pred`.
pub fn psd_score(
    truth: &GriddedField,
    pred: &GriddedField,
    geometry: Geometry,
    cond: Conditioning,
) -> Result<PsdScoreCurve> {
    if truth.axes() != pred.axes() {
        return Err(Error::Shape("truth and prediction grids differ".into()));
    }
    let mut err = truth.data().clone();
    err.zip_mut_with(pred.data(), |a, b| *a -= b);
    let err = truth.with_data(err)?;
    let spectrum = |f: &GriddedField| match geometry {
        Geometry::Isotropic => psd_isotropic(f, cond),
        Geometry::LonTime => psd_spacetime(f, cond),
        Geometry::LonLat => psd_latlon(f, cond),
        Geometry::Alongtrack => Err(Error::InvalidArgument(
            "along-track scores come from psd_alongtrack".into(),
        )),
    };
    psd_score_from(&spectrum(truth)?, &spectrum(&err)?)
}

/// A resolved scale in km (spatial axes) or days (frequency axes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Scale {
    /// Wavelength of the first downward crossing of the threshold.
    Resolved(f64),
    /// The score never drops below the threshold; value is the shortest
    /// wavelength available.
    GridScale(f64),
    /// The score never reaches the threshold.
    Unresolved,
}

impl Scale {
    pub fn value(self) -> Option<f64> {
        match self {
            Scale::Resolved(v) | Scale::GridScale(v) => Some(v),
            Scale::Unresolved => None,
        }
    }

    fn scaled(self, factor: f64) -> Scale {
        match self {
            Scale::Resolved(v) => Scale::Resolved(v * factor),
            Scale::GridScale(v) => Scale::GridScale(v * factor),
            Scale::Unresolved => Scale::Unresolved,
        }
    }
}

/// Scans `k` from low to high and returns `1/k` at the first downward
/// crossing of the threshold, interpolated linearly in `(k, score)`.
/// Bins with `k <= 0` or a NaN score are skipped.
pub fn resolved_scale_1d(k: &[f64], score: &[f64]) -> Result<Scale> {
    let pts: Vec<(f64, f64)> = k
        .iter()
        .zip(score)
        .filter(|(k, s)| **k > 0.0 && !s.is_nan())
        .map(|(k, s)| (*k, *s))
        .collect();
    if !pts.iter().any(|(_, s)| *s >= THRESHOLD) {
        return Err(Error::Unresolved);
    }
    let first_above = pts.iter().position(|(_, s)| *s >= THRESHOLD).expect("checked above");
    for w in pts[first_above..].windows(2) {
        let ((k0, s0), (k1, s1)) = (w[0], w[1]);
        if s0 >= THRESHOLD && s1 < THRESHOLD {
            let kc = k0 + (THRESHOLD - s0) * (k1 - k0) / (s1 - s0);
            return Ok(Scale::Resolved(1.0 / kc));
        }
    }
    let k_max = pts.last().expect("non-empty").0;
    Ok(Scale::GridScale(1.0 / k_max))
}

fn lenient(r: Result<Scale>) -> Result<Scale> {
    match r {
        Err(Error::Unresolved) => Ok(Scale::Unresolved),
        other => other,
    }
}

/// Marginal mean over `axis` ignoring NaN (NaN where every entry is NaN).
fn nanmean(a: &Array2<f64>, axis: usize) -> Vec<f64> {
    a.axis_iter(ndarray::Axis(1 - axis))
        .map(|lane| {
            let (sum, n) = lane
                .iter()
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                f64::NAN
            } else {
                sum / n as f64
            }
        })
        .collect()
}

/// Resolved scale along each axis of a score curve, with unresolved axes
/// reported as [`Scale::Unresolved`]. Wavenumber axes give km; the frequency
/// axis of a lon-time curve gives days. Two-dimensional curves are reduced by
/// averaging the score over the other axis.
pub fn axis_scales(curve: &PsdScoreCurve) -> Result<ResolvedScale> {
    const KM: f64 = 1e-3;
    match &curve.axis2 {
        None => Ok(ResolvedScale {
            axis1: lenient(resolved_scale_1d(&curve.axis1, curve.score_1d()))?.scaled(KM),
            axis2: None,
        }),
        Some(a2) => {
            let along1 = nanmean(&curve.score, 0);
            let along2 = nanmean(&curve.score, 1);
            let f2 = if curve.geometry == Geometry::LonTime { 1.0 } else { KM };
            Ok(ResolvedScale {
                axis1: lenient(resolved_scale_1d(&curve.axis1, &along1))?.scaled(KM),
                axis2: Some(lenient(resolved_scale_1d(a2, &along2))?.scaled(f2)),
            })
        }
    }
}

/// Resolved scales of a score curve: `axis1` in km, `axis2` (2-D curves
/// only) in days for lon-time or km for lon-lat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScale {
    pub axis1: Scale,
    pub axis2: Option<Scale>,
}

/// Like [`axis_scales`] but fails with [`Error::Unresolved`] if any axis never
/// reaches the threshold.
pub fn resolved_scale(curve: &PsdScoreCurve) -> Result<ResolvedScale> {
    let r = axis_scales(curve)?;
    if r.axis1 == Scale::Unresolved || r.axis2 == Some(Scale::Unresolved) {
        return Err(Error::Unresolved);
    }
    Ok(r)
}
