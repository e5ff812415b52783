//! Train / evaluation partition of a reference field along time.

use std::ops::Range;

use chrono::{DateTime, Utc};
use ndarray::s;

use crate::grid::{days_since, time_unit_days, GridAxes, GriddedField};
use crate::{Error, Result};

/// Calendar windows of a twin experiment. All bounds are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub eval: [DateTime<Utc>; 2],
    /// Start of the observation-only period preceding evaluation.
    pub spinup_start: Option<DateTime<Utc>>,
    /// Training window; defaults to everything after the evaluation period.
    pub train: Option<[DateTime<Utc>; 2]>,
}

#[derive(Debug, Clone)]
pub struct OsseSplit {
    /// Reference available for training, if any time steps remain.
    pub train: Option<GriddedField>,
    /// Reference withheld for scoring.
    pub eval: GriddedField,
    pub eval_steps: Range<usize>,
    pub spinup_steps: Range<usize>,
}

fn steps_within(field: &GriddedField, lo: DateTime<Utc>, hi: DateTime<Utc>) -> Result<Range<usize>> {
    let unit = time_unit_days(field.time().units())?;
    let tol = 1e-9;
    let a = days_since(field.epoch(), lo) / unit - tol;
    let b = days_since(field.epoch(), hi) / unit + tol;
    let t = field.time().values();
    let start = t.partition_point(|v| *v < a);
    let end = t.partition_point(|v| *v <= b);
    Ok(start..end.max(start))
}

fn take(field: &GriddedField, r: Range<usize>) -> Result<GriddedField> {
    let axes = field.axes();
    let data = field.data().slice(s![r.clone(), .., ..]).to_owned();
    let axes = GridAxes::new(axes.epoch, axes.time.select(r), axes.lat.clone(), axes.lon.clone())?;
    field.with_axes(axes, data)
}

fn overlaps(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.start < b.end && b.start < a.end
}

pub fn osse_split(field: &GriddedField, cfg: &SplitConfig) -> Result<OsseSplit> {
    if !field.time().is_increasing() {
        return Err(Error::Coords("time axis must be increasing".into()));
    }
    let [e0, e1] = cfg.eval;
    if e0 > e1 {
        return Err(Error::InvalidArgument("evaluation period ends before it starts".into()));
    }
    let eval_steps = steps_within(field, e0, e1)?;
    if eval_steps.is_empty() {
        return Err(Error::EmptyDomain(format!("evaluation period {e0} .. {e1} does not overlap the time axis")));
    }
    let spinup_steps = match cfg.spinup_start {
        Some(s0) if s0 > e0 => {
            return Err(Error::InvalidArgument("spin-up must start before the evaluation period".into()))
        }
        Some(s0) => {
            let r = steps_within(field, s0, e0)?;
            r.start..eval_steps.start.max(r.start)
        }
        None => eval_steps.start..eval_steps.start,
    };
    let train_steps = match cfg.train {
        Some([t0, t1]) => {
            let r = steps_within(field, t0, t1)?;
            if overlaps(&r, &eval_steps) || overlaps(&r, &spinup_steps) {
                return Err(Error::InvalidArgument(
                    "training window overlaps the evaluation or spin-up period".into(),
                ));
            }
            r
        }
        None => eval_steps.end..field.time().len(),
    };
    Ok(OsseSplit {
        train: if train_steps.is_empty() {
            None
        } else {
            Some(take(field, train_steps)?)
        },
        eval: take(field, eval_steps.clone())?,
        eval_steps,
        spinup_steps,
    })
}
