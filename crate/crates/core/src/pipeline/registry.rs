//! The closed set of pipeline operations: parameter schemas, kind rules
//! and implementations.

use std::f64::consts::PI;

use serde_json::json;

use super::{Context, Param, Params, Value};
use crate::grid::{
    latlon_deg2m, parse_timestamp, read_grid, read_track, subset_track, time_unit_days, CoordAxis, DomainBox,
    GeoData, GridAxes, GriddedField, EARTH_RADIUS_M,
};
use crate::obs::{simulate_over, Constellation, NoiseSpec};
use crate::physvars::{derive, DerivedVar};
use crate::regrid::{fill_nans_gauss_seidel, regrid_grid_to_grid, regrid_to_grid, regrid_to_track, FillConfig};
use crate::spectral::{
    axis_scales, psd_alongtrack, psd_isotropic, psd_latlon, psd_score, psd_spacetime, AlongTrackConfig,
    Conditioning, Geometry, Window,
};
use crate::{Error, Result};

/// What flows between steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Grid,
    Track,
    Spectrum,
    Score,
    Scale,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Grid => "grid",
            Kind::Track => "track",
            Kind::Spectrum => "spectrum",
            Kind::Score => "score",
            Kind::Scale => "scale",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Ty {
    Number,
    Count,
    Text,
    NumberPair,
    TimePair,
    OneOf(&'static [&'static str]),
}

struct OpSpec {
    name: &'static str,
    params: &'static [(&'static str, Ty, bool)],
}

const WINDOWS: &[&str] = &["hann", "none"];

const OPS: &[OpSpec] = &[
    OpSpec { name: "validate_latlon", params: &[] },
    OpSpec { name: "validate_time", params: &[("epoch", Ty::Text, false)] },
    OpSpec {
        name: "sel_domain",
        params: &[("lat", Ty::NumberPair, true), ("lon", Ty::NumberPair, true), ("time", Ty::TimePair, false)],
    },
    OpSpec { name: "subset_track", params: &[("num_samples", Ty::Count, true), ("seed", Ty::Count, false)] },
    OpSpec { name: "regrid_to_grid", params: &[("grid", Ty::Text, true)] },
    OpSpec { name: "regrid_to_track", params: &[("track", Ty::Text, true)] },
    OpSpec {
        name: "fill_nans",
        params: &[
            ("method", Ty::OneOf(&["gauss_seidel"]), false),
            ("tol", Ty::Number, false),
            ("max_iters", Ty::Count, false),
        ],
    },
    OpSpec { name: "latlon_deg2m", params: &[] },
    OpSpec { name: "time_rescale", params: &[("freq", Ty::Number, true), ("unit", Ty::Text, true)] },
    OpSpec {
        name: "derive",
        params: &[("var", Ty::OneOf(&["sla", "u", "v", "ke", "vort", "ens", "strain", "ow"]), true)],
    },
    OpSpec { name: "psd_isotropic", params: &[("reference", Ty::Text, false), ("window", Ty::OneOf(WINDOWS), false)] },
    OpSpec { name: "psd_spacetime", params: &[("reference", Ty::Text, false), ("window", Ty::OneOf(WINDOWS), false)] },
    OpSpec { name: "psd_latlon", params: &[("reference", Ty::Text, false), ("window", Ty::OneOf(WINDOWS), false)] },
    OpSpec {
        name: "psd_alongtrack",
        params: &[
            ("reference", Ty::Text, true),
            ("segment_len", Ty::Count, false),
            ("window", Ty::OneOf(WINDOWS), false),
        ],
    },
    OpSpec { name: "resolved_scale", params: &[] },
    OpSpec {
        name: "simulate_obs",
        params: &[("pattern", Ty::Text, true), ("noise_std", Ty::Number, false), ("seed", Ty::Count, false)],
    },
];

/// Registered op names, in registry order.
pub fn op_names() -> Vec<&'static str> {
    OPS.iter().map(|o| o.name).collect()
}

fn spec(op: &str) -> Option<&'static OpSpec> {
    OPS.iter().find(|o| o.name == op)
}

fn check_type(value: &Param, ty: Ty) -> std::result::Result<(), String> {
    let number = |p: &Param| p.as_f64().is_some();
    match ty {
        Ty::Number if number(value) => Ok(()),
        Ty::Number => Err("expected a number".into()),
        Ty::Count => match value {
            Param::Int(i) if *i >= 0 => Ok(()),
            _ => Err("expected a non-negative integer".into()),
        },
        Ty::Text => match value {
            Param::Str(_) => Ok(()),
            _ => Err("expected a string".into()),
        },
        Ty::NumberPair => match value {
            Param::List(v) if v.len() == 2 && v.iter().all(number) => Ok(()),
            _ => Err("expected a list of two numbers".into()),
        },
        Ty::TimePair => match value {
            Param::List(v) if v.len() == 2 => v
                .iter()
                .try_for_each(|p| match p {
                    Param::Str(s) => parse_timestamp(s).map(|_| ()).map_err(|e| e.to_string()),
                    _ => Err("expected timestamps".into()),
                }),
            _ => Err("expected a list of two timestamps".into()),
        },
        Ty::OneOf(options) => match value {
            Param::Str(s) if options.contains(&s.as_str()) => Ok(()),
            _ => Err(format!("expected one of {}", options.join("|"))),
        },
    }
}

/// Checks `op` exists and `params` match its schema. `path` is the step's
/// location in the config, used in error messages.
pub(crate) fn validate_params(op: &str, params: &Params, path: &str) -> Result<()> {
    let spec = spec(op).ok_or_else(|| {
        Error::config(format!("{path}.op"), format!("unknown op `{op}`; known ops: {}", op_names().join(", ")))
    })?;
    for (key, value) in params {
        let (_, ty, _) = spec
            .params
            .iter()
            .find(|(name, _, _)| name == key)
            .ok_or_else(|| Error::config(format!("{path}.params.{key}"), format!("unknown parameter for `{op}`")))?;
        check_type(value, *ty).map_err(|reason| Error::config(format!("{path}.params.{key}"), reason))?;
    }
    for (name, _, required) in spec.params {
        if *required && !params.contains_key(*name) {
            return Err(Error::config(format!("{path}.params.{name}"), "missing"));
        }
    }
    Ok(())
}

/// Output kind of `op` given its input kind, or `None` if not accepted.
pub(crate) fn output_kind(op: &str, params: &Params, input: Kind) -> Option<Kind> {
    use Kind::*;
    match (op, input) {
        ("validate_latlon" | "validate_time" | "sel_domain" | "time_rescale", Grid | Track) => Some(input),
        ("subset_track", Track) => Some(Track),
        ("regrid_to_grid", Grid | Track) => Some(Grid),
        ("regrid_to_track", Grid) => Some(Track),
        ("fill_nans" | "latlon_deg2m" | "derive", Grid) => Some(Grid),
        ("psd_isotropic" | "psd_spacetime" | "psd_latlon", Grid) => {
            Some(if params.contains_key("reference") { Score } else { Spectrum })
        }
        ("psd_alongtrack", Track) => Some(Score),
        ("resolved_scale", Score) => Some(Scale),
        ("simulate_obs", Grid) => Some(Track),
        _ => None,
    }
}

fn str_param<'a>(params: &'a Params, key: &str) -> Option<&'a str> {
    params.get(key).and_then(Param::as_str)
}

fn num_param(params: &Params, key: &str) -> Option<f64> {
    params.get(key).and_then(Param::as_f64)
}

fn count_param(params: &Params, key: &str) -> Option<u64> {
    match params.get(key) {
        Some(Param::Int(i)) => u64::try_from(*i).ok(),
        _ => None,
    }
}

fn pair(params: &Params, key: &str) -> Option<[f64; 2]> {
    match params.get(key) {
        Some(Param::List(v)) => Some([v[0].as_f64()?, v[1].as_f64()?]),
        _ => None,
    }
}

fn domain_box(params: &Params) -> Result<DomainBox> {
    let time = match params.get("time") {
        Some(Param::List(v)) => {
            let t = |p: &Param| parse_timestamp(p.as_str().unwrap_or_default());
            Some([t(&v[0])?, t(&v[1])?])
        }
        _ => None,
    };
    DomainBox::new(pair(params, "lat").unwrap_or_default(), pair(params, "lon").unwrap_or_default(), time)
}

fn conditioning(params: &Params, base: Conditioning) -> Conditioning {
    match str_param(params, "window") {
        Some("none") => base.without_window(),
        _ => base,
    }
}

fn kind_error(op: &str, value: &Value) -> Error {
    Error::InvalidArgument(format!("`{op}` does not accept a {} input", value.kind()))
}

/// Runs one op. Returns the new value and, for scalar-producing ops, a JSON
/// summary recorded in the manifest.
pub(crate) fn apply(op: &str, params: &Params, value: Value, ctx: &Context) -> Result<(Value, Option<serde_json::Value>)> {
    let out = match (op, value) {
        ("validate_latlon", Value::Grid(g)) => Value::Grid(g.validate_latlon()?),
        ("validate_latlon", Value::Track(t)) => Value::Track(t.validate_latlon()?),
        ("validate_time", Value::Grid(g)) => {
            let epoch = match str_param(params, "epoch") {
                Some(s) => parse_timestamp(s)?,
                None => g.epoch(),
            };
            Value::Grid(g.validate_time(epoch)?)
        }
        ("validate_time", Value::Track(t)) => {
            let epoch = match str_param(params, "epoch") {
                Some(s) => parse_timestamp(s)?,
                None => t.epoch(),
            };
            Value::Track(t.validate_time(epoch)?)
        }
        ("sel_domain", Value::Grid(g)) => Value::Grid(g.sel_domain(&domain_box(params)?)?),
        ("sel_domain", Value::Track(t)) => Value::Track(t.sel_domain(&domain_box(params)?)?),
        ("time_rescale", v @ (Value::Grid(_) | Value::Track(_))) => {
            let freq = num_param(params, "freq").unwrap_or(1.0);
            let unit = str_param(params, "unit").unwrap_or("days");
            match v {
                Value::Grid(g) => Value::Grid(g.time_rescale(freq, unit)?),
                Value::Track(t) => Value::Track(t.time_rescale(freq, unit)?),
                _ => unreachable!(),
            }
        }
        ("subset_track", Value::Track(t)) => {
            let n = count_param(params, "num_samples").unwrap_or(0) as usize;
            Value::Track(subset_track(&t, n, count_param(params, "seed").unwrap_or(0)))
        }
        ("regrid_to_grid", v @ (Value::Grid(_) | Value::Track(_))) => {
            let target = read_grid(ctx.resolve(str_param(params, "grid").unwrap_or_default()))?.validate_latlon()?;
            match v {
                Value::Track(t) => {
                    let binned = regrid_to_grid(&t, target.axes())?;
                    if binned.dropped > 0 {
                        log::warn!("regrid_to_grid dropped {} records outside the grid", binned.dropped);
                    }
                    Value::Grid(binned.field)
                }
                Value::Grid(g) => Value::Grid(regrid_grid_to_grid(&g, target.axes())?),
                _ => unreachable!(),
            }
        }
        ("regrid_to_track", Value::Grid(g)) => {
            let track = read_track(ctx.resolve(str_param(params, "track").unwrap_or_default()))?;
            Value::Track(regrid_to_track(&g, &track)?)
        }
        ("fill_nans", Value::Grid(g)) => {
            let mut cfg = FillConfig::default();
            if let Some(tol) = num_param(params, "tol") {
                cfg.tol = tol;
            }
            if let Some(n) = count_param(params, "max_iters") {
                cfg.max_iters = n as usize;
            }
            let (filled, stats) = fill_nans_gauss_seidel(&g, cfg)?;
            if stats.converged.iter().any(|c| !c) {
                log::warn!("fill_nans did not converge on every slice");
            }
            Value::Grid(filled)
        }
        ("latlon_deg2m", Value::Grid(g)) => Value::Grid(latlon_deg2m(&g)?),
        ("derive", Value::Grid(g)) => {
            let var: DerivedVar = str_param(params, "var").unwrap_or_default().parse()?;
            let g = if g.lat().is_degrees() { latlon_deg2m(&g)? } else { g };
            Value::Grid(derive(&g, var)?)
        }
        (name @ ("psd_isotropic" | "psd_spacetime" | "psd_latlon"), Value::Grid(g)) => {
            let (geometry, base) = match name {
                "psd_isotropic" => (Geometry::Isotropic, Conditioning::SPATIAL),
                "psd_spacetime" => (Geometry::LonTime, Conditioning::SPACETIME),
                _ => (Geometry::LonLat, Conditioning::SPATIAL),
            };
            let cond = conditioning(params, base);
            match str_param(params, "reference") {
                Some(path) => {
                    let reference = align_reference(&read_grid(ctx.resolve(path))?, &g)?;
                    Value::Score(psd_score(&reference, &g, geometry, cond)?)
                }
                None => Value::Spectrum(match geometry {
                    Geometry::Isotropic => psd_isotropic(&g, cond)?,
                    Geometry::LonTime => psd_spacetime(&g, cond)?,
                    _ => psd_latlon(&g, cond)?,
                }),
            }
        }
        ("psd_alongtrack", Value::Track(pred)) => {
            let truth = read_track(ctx.resolve(str_param(params, "reference").unwrap_or_default()))?;
            let mut cfg = AlongTrackConfig::default();
            if let Some(n) = count_param(params, "segment_len") {
                cfg.segment_len = n as usize;
            }
            if str_param(params, "window") == Some("none") {
                cfg.window = Window::None;
            }
            Value::Score(psd_alongtrack(&truth, &pred, cfg)?.score)
        }
        ("resolved_scale", Value::Score(curve)) => {
            let scales = axis_scales(&curve)?;
            let summary = serde_json::to_value(scales).expect("scale serializes");
            return Ok((Value::Scale(scales), Some(summary)));
        }
        ("simulate_obs", Value::Grid(g)) => {
            let pattern = str_param(params, "pattern").unwrap_or_default();
            let constellation: Constellation = match Constellation::preset(pattern) {
                Some(c) => c,
                None => Constellation::from_json(&std::fs::read_to_string(ctx.resolve(pattern))?)?,
            };
            let std = num_param(params, "noise_std").unwrap_or(0.0);
            let noise = NoiseSpec::gaussian(std, count_param(params, "seed").unwrap_or(0))?;
            let sampled = simulate_over(&g.validate_latlon()?, &constellation, noise)?;
            let summary = json!({"samples": sampled.track.len(), "dropped": sampled.dropped});
            return Ok((Value::Track(sampled.track), Some(summary)));
        }
        (_, v) => return Err(kind_error(op, &v)),
    };
    Ok((out, None))
}

/// Brings a reference grid (read from disk, degree axes) onto the axes of
/// `current`, which may already be in meters and rescaled in time.
fn align_reference(reference: &GriddedField, current: &GriddedField) -> Result<GriddedField> {
    let reference = reference.validate_latlon()?;
    let axes = current.axes();
    let (lat, lon) = if axes.lat.is_meters() || axes.lon.is_meters() {
        degree_axes(current)?
    } else {
        (axes.lat.clone(), axes.lon.clone())
    };
    let ratio = time_unit_days(axes.time.units())? / time_unit_days(reference.time().units())?;
    let time = CoordAxis::new(
        axes.time.dim(),
        axes.time.values().iter().map(|t| t * ratio).collect(),
        reference.time().units(),
    )?;
    let target = GridAxes::new(axes.epoch, time, lat, lon)?;
    let data = if same_nodes(reference.axes(), &target) {
        reference.data().clone()
    } else {
        let mut g = regrid_grid_to_grid(&reference, &target)?;
        if g.data().iter().any(|v| v.is_nan()) {
            g = fill_nans_gauss_seidel(&g, FillConfig::default())?.0;
        }
        g.into_data()
    };
    reference.with_axes(axes.clone(), data)
}

/// Recovers degree axes of a meter-scaled grid from the anchor kept in its
/// attributes.
fn degree_axes(field: &GriddedField) -> Result<(CoordAxis, CoordAxis)> {
    let attr = |k: &str| -> Result<f64> {
        field
            .attrs()
            .get(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Coords(format!("meter-scaled grid lacks the `{k}` attribute")))
    };
    let (lat_min, lon_min, lat_mean) = (attr("lat_min_deg")?, attr("lon_min_deg")?, attr("lat_mean_deg")?);
    let m_per_deg = EARTH_RADIUS_M * PI / 180.0;
    let lat = field.lat().values().iter().map(|y| lat_min + y / m_per_deg).collect();
    let coslat = (lat_mean * PI / 180.0).cos();
    let lon = field.lon().values().iter().map(|x| lon_min + x / (m_per_deg * coslat)).collect();
    Ok((CoordAxis::lat_degrees(lat)?, CoordAxis::lon_degrees(lon)?))
}

/// Whether two axis sets name the same nodes up to roundoff.
fn same_nodes(a: &GridAxes, b: &GridAxes) -> bool {
    let close = |x: &CoordAxis, y: &CoordAxis, shift: f64| {
        x.units() == y.units()
            && x.len() == y.len()
            && x.values().iter().zip(y.values()).all(|(p, q)| (p - (q + shift)).abs() <= 1e-9 * (1.0 + p.abs()))
    };
    let shift = crate::grid::days_since(a.epoch, b.epoch) / time_unit_days(a.time.units()).unwrap_or(1.0);
    close(&a.time, &b.time, shift) && close(&a.lat, &b.lat, 0.0) && close(&a.lon, &b.lon, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{eddy_field, EddyConfig};

    fn small() -> GriddedField {
        eddy_field(&EddyConfig {
            nt: 4,
            ny: 16,
            nx: 16,
            ..EddyConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn schema_rejects_bad_types() {
        let mut p = Params::new();
        p.insert("lat".into(), Param::List(vec![Param::Int(33)]));
        p.insert("lon".into(), Param::List(vec![Param::Int(-65), Param::Int(-55)]));
        let e = validate_params("sel_domain", &p, "steps[0]").unwrap_err();
        assert!(e.to_string().contains("steps[0].params.lat"), "{e}");
        let e = validate_params("derive", &Params::new(), "steps[1]").unwrap_err();
        assert!(e.to_string().contains("steps[1].params.var"), "{e}");
    }

    #[test]
    fn every_op_has_a_kind_rule() {
        for op in op_names() {
            let any = [Kind::Grid, Kind::Track, Kind::Score]
                .iter()
                .any(|k| output_kind(op, &Params::new(), *k).is_some());
            assert!(any, "{op}");
        }
    }

    #[test]
    fn reference_aligns_onto_meter_grid() {
        let truth = small();
        let study = latlon_deg2m(&truth).unwrap().time_rescale(1.0, "hours").unwrap();
        let aligned = align_reference(&truth, &study).unwrap();
        assert_eq!(aligned.axes(), study.axes());
        assert_eq!(aligned.data(), truth.data());
    }

    #[test]
    fn degree_axes_invert_deg2m() {
        let truth = small();
        let m = latlon_deg2m(&truth).unwrap();
        let (lat, lon) = degree_axes(&m).unwrap();
        for (a, b) in lat.values().iter().zip(truth.lat().values()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in lon.values().iter().zip(truth.lon().values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
