//! Skill scores, power spectra, spectral scores and report rendering.
//!
//! Spectra are normalized so that summing `psd * dk` over every bin of the
//! (unwindowed) two-sided transform gives the variance of the input. Two-sided
//! spectra are folded onto non-negative axes, which keeps that sum intact.

mod psd;
mod report;
mod score;
mod skill;

pub use psd::{psd_alongtrack, psd_isotropic, psd_latlon, psd_spacetime, AlongTrackConfig, AlongTrackPsd};
pub use report::{parse_reports, render_report, EvalReport, ReportFormat};
pub use score::{axis_scales, psd_score, psd_score_from, resolved_scale, resolved_scale_1d, ResolvedScale, Scale};
pub use skill::{nrmse, nrmse_score_series, rmse, ScoreSeries};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which transform produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Isotropic,
    LonTime,
    LonLat,
    Alongtrack,
}

impl Geometry {
    pub fn as_str(self) -> &'static str {
        match self {
            Geometry::Isotropic => "isotropic",
            Geometry::LonTime => "lon_time",
            Geometry::LonLat => "lon_lat",
            Geometry::Alongtrack => "alongtrack",
        }
    }
}

/// Taper applied before transforming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    None,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detrend {
    None,
    Mean,
    /// Least-squares plane (or line) removal.
    Linear,
}

/// Pre-transform conditioning of each slice, plane or segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conditioning {
    pub window: Window,
    pub detrend: Detrend,
}

impl Conditioning {
    /// Hann window with mean removal, used for spatial slices.
    pub const SPATIAL: Conditioning = Conditioning {
        window: Window::Hann,
        detrend: Detrend::Mean,
    };

    /// Hann window with linear detrending, used for lon-time planes.
    pub const SPACETIME: Conditioning = Conditioning {
        window: Window::Hann,
        detrend: Detrend::Linear,
    };

    pub fn without_window(self) -> Self {
        Conditioning {
            window: Window::None,
            ..self
        }
    }
}

/// A one- or two-dimensional power spectrum.
///
/// `psd` has shape `(axis2.len(), axis1.len())`, or `(1, axis1.len())` for
/// one-dimensional spectra. `axis1` is in cycles per meter; `axis2` is in
/// cycles per day (lon-time) or cycles per meter (lon-lat).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub geometry: Geometry,
    pub axis1: Vec<f64>,
    pub axis2: Option<Vec<f64>>,
    pub psd: Array2<f64>,
    /// Number of two-sided transform cells feeding each isotropic bin.
    pub counts: Option<Vec<usize>>,
}

impl SpectrumResult {
    /// One-dimensional view of the PSD, for 1-D geometries.
    pub fn psd_1d(&self) -> &[f64] {
        self.psd.as_slice().expect("standard layout")
    }

    /// Bin widths along each axis.
    pub fn bin_widths(&self) -> (f64, f64) {
        let step = |a: &[f64]| if a.len() > 1 { a[1] - a[0] } else { 1.0 };
        (step(&self.axis1), self.axis2.as_deref().map_or(1.0, step))
    }

    /// `sum(psd * dk)` over all bins.
    pub fn total_power(&self) -> f64 {
        let (d1, d2) = self.bin_widths();
        self.psd.sum() * d1 * d2
    }

    fn same_axes(&self, other: &SpectrumResult) -> Result<()> {
        if self.geometry != other.geometry || self.axis1 != other.axis1 || self.axis2 != other.axis2 {
            return Err(Error::Shape("spectra do not share geometry and axes".into()));
        }
        Ok(())
    }

    /// CSV export: `k,psd` for 1-D spectra, `k,f,psd` for 2-D spectra.
    pub fn to_csv(&self) -> String {
        grid_csv("psd", &self.axis1, self.axis2.as_deref(), &self.psd)
    }
}

fn grid_csv(name: &str, axis1: &[f64], axis2: Option<&[f64]>, values: &Array2<f64>) -> String {
    let mut out = String::new();
    match axis2 {
        None => {
            out.push_str(&format!("k,{name}\n"));
            for (k, p) in axis1.iter().zip(values.iter()) {
                out.push_str(&format!("{k},{p}\n"));
            }
        }
        Some(a2) => {
            out.push_str(&format!("k,f,{name}\n"));
            for (j, f) in a2.iter().enumerate() {
                for (i, k) in axis1.iter().enumerate() {
                    out.push_str(&format!("{k},{f},{}\n", values[[j, i]]));
                }
            }
        }
    }
    out
}

/// Score per spectral bin: `1 - PSD(error) / PSD(truth)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdScoreCurve {
    pub geometry: Geometry,
    pub axis1: Vec<f64>,
    pub axis2: Option<Vec<f64>>,
    /// Same layout as [`SpectrumResult::psd`]; NaN where undefined.
    pub score: Array2<f64>,
}

impl PsdScoreCurve {
    pub fn score_1d(&self) -> &[f64] {
        self.score.as_slice().expect("standard layout")
    }

    /// CSV export: `k,score` or `k,f,score`.
    pub fn to_csv(&self) -> String {
        grid_csv("score", &self.axis1, self.axis2.as_deref(), &self.score)
    }
}
