//! Real-space skill scores.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::GriddedField;
use crate::{Error, Result};

fn joint(truth: &[f64], pred: &[f64]) -> Result<(f64, f64, usize)> {
    if truth.len() != pred.len() {
        return Err(Error::Shape(format!("{} truth values vs {} predictions", truth.len(), pred.len())));
    }
    let (mut se, mut st, mut n) = (0.0, 0.0, 0usize);
    for (t, p) in truth.iter().zip(pred) {
        if t.is_nan() || p.is_nan() {
            continue;
        }
        se += (t - p) * (t - p);
        st += t * t;
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no jointly valid cells".into()));
    }
    Ok((se, st, n))
}

/// Root mean squared difference over cells valid in both inputs.
pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    let (se, _, n) = joint(truth, pred)?;
    Ok((se / n as f64).sqrt())
}

/// RMSE divided by the RMS of the truth over the same cells.
pub fn nrmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    let (se, st, _) = joint(truth, pred)?;
    if st == 0.0 {
        return Err(Error::InvalidArgument("truth has zero RMS".into()));
    }
    Ok((se / st).sqrt())
}

/// Per-time-step `1 - nRMSE` scores with their mean and population std.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl ScoreSeries {
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidArgument("no time steps to score".into()));
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let std = (scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n).sqrt();
        Ok(ScoreSeries { scores, mean, std })
    }
}

impl fmt::Display for ScoreSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}

/// nRMSE score of every time slice, computed over the spatial cells only.
pub fn nrmse_score_series(truth: &GriddedField, pred: &GriddedField) -> Result<ScoreSeries> {
    if truth.shape() != pred.shape() {
        return Err(Error::Shape(format!(
            "truth shape {:?} vs prediction shape {:?}",
            truth.shape(),
            pred.shape()
        )));
    }
    let scores = truth
        .data()
        .outer_iter()
        .zip(pred.data().outer_iter())
        .enumerate()
        .map(|(t, (a, b))| {
            let a = a.as_standard_layout();
            let b = b.as_standard_layout();
            nrmse(a.as_slice().expect("standard"), b.as_slice().expect("standard"))
                .map(|e| 1.0 - e)
                .map_err(|e| Error::InvalidArgument(format!("time step {t}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreSeries::from_scores(scores)
}
