//! One-call scoring of a study field against a reference.

use crate::grid::{latlon_deg2m, AlongTrackSet, GeoData, GriddedField};
use crate::regrid::{fill_nans_gauss_seidel, regrid_grid_to_grid, regrid_to_track, FillConfig};
use crate::spectral::{
    axis_scales, nrmse_score_series, psd_alongtrack, psd_score, AlongTrackConfig, Conditioning, EvalReport,
    Geometry, PsdScoreCurve, ScoreSeries,
};
use crate::Result;

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub experiment: String,
    pub algorithm: String,
    /// Withheld along-track truth for the along-track score, if any.
    pub track: Option<AlongTrackSet>,
    pub fill: FillConfig,
    pub spatial: Conditioning,
    pub spacetime: Conditioning,
    pub alongtrack: AlongTrackConfig,
    /// Skip the gridded spectral scores (e.g. for real-data experiments).
    pub gridded_spectra: bool,
}

impl EvalOptions {
    pub fn new(experiment: impl Into<String>, algorithm: impl Into<String>) -> Self {
        EvalOptions {
            experiment: experiment.into(),
            algorithm: algorithm.into(),
            track: None,
            fill: FillConfig::default(),
            spatial: Conditioning::SPATIAL,
            spacetime: Conditioning::SPACETIME,
            alongtrack: AlongTrackConfig::default(),
            gridded_spectra: true,
        }
    }
}

/// Everything computed by [`evaluate`].
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub series: ScoreSeries,
    pub isotropic: Option<PsdScoreCurve>,
    pub spacetime: Option<PsdScoreCurve>,
    pub alongtrack: Option<PsdScoreCurve>,
}

/// Scores `study` against `reference`: nRMSE series on the reference grid,
/// then isotropic and space-time PSD scores on filled, meter-scaled copies,
/// and the along-track score when a track is supplied.
pub fn evaluate(reference: &GriddedField, study: &GriddedField, opts: &EvalOptions) -> Result<Evaluation> {
    let reference = reference.validate_latlon()?;
    let mut study = study.validate_latlon()?;
    if study.axes() != reference.axes() {
        log::info!("regridding study onto the reference grid");
        study = regrid_grid_to_grid(&study, reference.axes())?;
    }
    let series = nrmse_score_series(&reference, &study)?;
    let mut report = EvalReport::from_series(&opts.experiment, &opts.algorithm, &series);

    let (mut isotropic, mut spacetime, mut alongtrack) = (None, None, None);
    if opts.gridded_spectra {
        let to_meters = |f: &GriddedField| -> Result<GriddedField> {
            let (filled, _) = fill_nans_gauss_seidel(f, opts.fill)?;
            latlon_deg2m(&filled)
        };
        let truth_m = to_meters(&reference)?;
        let study_m = to_meters(&study)?;
        let iso = psd_score(&truth_m, &study_m, Geometry::Isotropic, opts.spatial)?;
        let st = psd_score(&truth_m, &study_m, Geometry::LonTime, opts.spacetime)?;
        report.lambda_r_km = Some(axis_scales(&iso)?.axis1);
        let s = axis_scales(&st)?;
        report.lambda_x_km = Some(s.axis1);
        report.lambda_t_days = s.axis2;
        isotropic = Some(iso);
        spacetime = Some(st);
    }
    if let Some(track) = &opts.track {
        let pred = regrid_to_track(&study, track)?;
        let at = psd_alongtrack(track, &pred, opts.alongtrack)?;
        report.lambda_a_km = Some(axis_scales(&at.score)?.axis1);
        alongtrack = Some(at.score);
    }
    Ok(Evaluation {
        report,
        series,
        isotropic,
        spacetime,
        alongtrack,
    })
}

/// The time-mean of `field` repeated at every time step.
pub fn climatology(field: &GriddedField) -> Result<GriddedField> {
    let nt = field.shape()[0];
    let mut data = field.data().clone();
    let [_, ny, nx] = field.shape();
    for j in 0..ny {
        for i in 0..nx {
            let (sum, n) = (0..nt)
                .map(|t| field.data()[[t, j, i]])
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            let mean = if n == 0 { f64::NAN } else { sum / n as f64 };
            for t in 0..nt {
                data[[t, j, i]] = mean;
            }
        }
    }
    field.with_data(data)
}
