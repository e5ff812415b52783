//! Bundled task presets: calendar windows of the Gulfstream challenges and a
//! desk-scale twin experiment on synthetic eddies.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};

use super::{parse_config, run_pipeline, sha256_hex, Context, Manifest, Value};
use crate::eval::{climatology, evaluate, EvalOptions};
use crate::grid::{utc_date, write_grid, write_track, GriddedField};
use crate::obs::{daily_coverage, simulate_over, Constellation, NoiseSpec};
use crate::spectral::{render_report, EvalReport, ReportFormat, ResolvedScale};
use crate::synthetic::{eddy_field, EddyConfig};
use crate::{Error, Result};

/// Preset names accepted by `obench pipeline --preset`.
pub const PRESETS: &[&str] = &["gulfstream-osse"];

/// Evaluation window, observation-only spin-up and training window of the
/// nadir twin experiment.
pub fn osse_nadir_split() -> crate::obs::SplitConfig {
    crate::obs::SplitConfig {
        eval: [utc_date(2012, 10, 22), utc_date(2012, 12, 2)],
        spinup_start: Some(utc_date(2012, 10, 1)),
        train: Some([utc_date(2013, 1, 2), utc_date(2013, 9, 30)]),
    }
}

/// Test year of the real-altimetry experiment.
pub fn ose_test_period() -> [DateTime<Utc>; 2] {
    [utc_date(2017, 1, 1), utc_date(2017, 12, 31)]
}

/// Resolved spatial scale of `input` against `reference`: validation, domain
/// selection, regridding, gap filling, unit conversion, isotropic score.
pub fn gulfstream_recipe(input: &str, reference: &str, output: &str) -> String {
    format!(
        "input: {input}
output: {output}
steps:
  - op: validate_latlon
  - op: validate_time
    params: {{epoch: \"2012-10-01T00:00:00Z\"}}
  - op: sel_domain
    params: {{lat: [33.0, 43.0], lon: [-65.0, -55.0]}}
  - op: regrid_to_grid
    params: {{grid: {reference}}}
  - op: fill_nans
    params: {{method: gauss_seidel}}
  - op: latlon_deg2m
  - op: time_rescale
    params: {{freq: 1, unit: days}}
  - op: psd_isotropic
    params: {{reference: {reference}}}
  - op: resolved_scale
"
    )
}

/// Settings of the desk-scale twin experiment.
#[derive(Debug, Clone)]
pub struct OsseConfig {
    pub truth: EddyConfig,
    pub constellation: Constellation,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for OsseConfig {
    fn default() -> Self {
        OsseConfig {
            truth: EddyConfig::default(),
            constellation: Constellation::nadir_4sat(),
            noise_std: 0.01,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OsseOutcome {
    /// One row per study, identity first.
    pub reports: Vec<EvalReport>,
    /// Per-day fraction of grid cells holding an observation.
    pub coverage: Vec<f64>,
    /// Resolved spatial scale of the climatology study, from the recipe.
    pub recipe_scale: ResolvedScale,
    pub manifest: Manifest,
    /// SHA-256 of every file written, by file name.
    pub hashes: BTreeMap<String, String>,
}

impl OsseOutcome {
    pub fn max_coverage(&self) -> f64 {
        self.coverage.iter().copied().fold(0.0, f64::max)
    }
}

/// [`run_osse`] with default settings.
pub fn run_gulfstream_osse(workdir: &Path) -> Result<OsseOutcome> {
    run_osse(workdir, &OsseConfig::default())
}

/// Builds a synthetic truth, flies the constellation over it, scores an
/// identity study and a climatology study, and runs the resolved-scale
/// recipe on the climatology study. Everything lands in `workdir`.
pub fn run_osse(workdir: &Path, cfg: &OsseConfig) -> Result<OsseOutcome> {
    fs::create_dir_all(workdir)?;
    let mut hashes = BTreeMap::new();
    let mut save = |name: &str, bytes: &[u8]| -> Result<()> {
        fs::write(workdir.join(name), bytes)?;
        hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    };

    let truth = eddy_field(&cfg.truth)?;
    let sampled = simulate_over(&truth, &cfg.constellation, NoiseSpec::gaussian(cfg.noise_std, cfg.seed)?)?;
    log::info!("{} observations, {} dropped", sampled.track.len(), sampled.dropped);
    let coverage = daily_coverage(&sampled.track, truth.axes())?;

    let studies: [(&str, GriddedField); 2] = [("identity", truth.clone()), ("climatology", climatology(&truth)?)];
    write_grid(&truth, workdir.join("truth.obg"))?;
    write_track(&sampled.track, workdir.join("obs.csv"))?;
    for name in ["truth.obg", "obs.csv"] {
        let bytes = fs::read(workdir.join(name))?;
        save(name, &bytes)?;
    }

    let mut reports = Vec::new();
    for (name, study) in &studies {
        let file = format!("study_{name}.obg");
        write_grid(study, workdir.join(&file))?;
        let bytes = fs::read(workdir.join(&file))?;
        save(&file, &bytes)?;
        let eval = evaluate(&truth, study, &EvalOptions::new("OSSE NADIR", *name))?;
        reports.push(eval.report);
    }
    save("leaderboard.md", render_report(&reports, ReportFormat::Markdown)?.as_bytes())?;
    save("leaderboard.json", render_report(&reports, ReportFormat::Json)?.as_bytes())?;

    let recipe = gulfstream_recipe("study_climatology.obg", "truth.obg", "recipe_scale.json");
    save("recipe.yaml", recipe.as_bytes())?;
    let (value, manifest) = run_pipeline(&parse_config(&recipe)?, &Context::new(workdir))?;
    let Value::Scale(recipe_scale) = value else {
        return Err(Error::InvalidArgument("recipe did not end with a resolved scale".into()));
    };
    save("recipe_scale.json", &value.canonical_bytes())?;

    Ok(OsseOutcome {
        reports,
        coverage,
        recipe_scale,
        manifest,
        hashes,
    })
}
