//! Harmonic infill of missing cells, one time slice at a time.

use ndarray::{Array2, ArrayViewMut2, Axis};
use rayon::prelude::*;

use crate::grid::GriddedField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillConfig {
    /// Stop once the largest update in a sweep is within `tol * std(valid)`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FillConfig {
    fn default() -> Self {
        FillConfig {
            tol: 1e-6,
            max_iters: 10_000,
        }
    }
}

/// Per-slice sweep counts and convergence flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FillStats {
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub filled_cells: usize,
}

/// Fills NaN cells by solving the discrete Laplace equation with the valid
/// cells as Dirichlet data. Sweeps are in-place and lexicographic (lat, then
/// lon); each missing cell becomes the mean of its in-grid 4-neighbours.
pub fn fill_nans_gauss_seidel(field: &GriddedField, config: FillConfig) -> Result<(GriddedField, FillStats)> {
    if !(config.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("fill tol must be >= 0, got {}", config.tol)));
    }
    let mut data = field.data().clone();
    let results: Vec<Result<(usize, bool, usize)>> = data
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(t, slice)| fill_slice(slice, config).map_err(|e| with_slice(e, t)))
        .collect();
    let mut stats = FillStats::default();
    for r in results {
        let (iters, converged, filled) = r?;
        stats.iterations.push(iters);
        stats.converged.push(converged);
        stats.filled_cells += filled;
    }
    Ok((field.with_data(data)?, stats))
}

fn with_slice(e: Error, t: usize) -> Error {
    match e {
        Error::InvalidArgument(msg) => Error::InvalidArgument(format!("time slice {t}: {msg}")),
        other => other,
    }
}

fn fill_slice(mut s: ArrayViewMut2<'_, f64>, config: FillConfig) -> Result<(usize, bool, usize)> {
    let (ny, nx) = s.dim();
    let missing: Vec<(usize, usize)> = s
        .indexed_iter()
        .filter(|(_, v)| v.is_nan())
        .map(|(ix, _)| ix)
        .collect();
    if missing.is_empty() {
        return Ok((0, true, 0));
    }
    let valid: Vec<f64> = s.iter().copied().filter(|v| !v.is_nan()).collect();
    if valid.is_empty() {
        return Err(Error::InvalidArgument("slice has no valid cells to fill from".into()));
    }
    let n = valid.len() as f64;
    let mean = valid.iter().sum::<f64>() / n;
    let std = (valid.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let threshold = config.tol * std;
    for &(j, i) in &missing {
        s[[j, i]] = mean;
    }
    let mut iters = 0;
    while iters < config.max_iters {
        iters += 1;
        let mut max_update = 0.0f64;
        for &(j, i) in &missing {
            let mut sum = 0.0;
            let mut k = 0.0;
            if j > 0 {
                sum += s[[j - 1, i]];
                k += 1.0;
            }
            if j + 1 < ny {
                sum += s[[j + 1, i]];
                k += 1.0;
            }
            if i > 0 {
                sum += s[[j, i - 1]];
                k += 1.0;
            }
            if i + 1 < nx {
                sum += s[[j, i + 1]];
                k += 1.0;
            }
            if k == 0.0 {
                continue;
            }
            let new = sum / k;
            max_update = max_update.max((new - s[[j, i]]).abs());
            s[[j, i]] = new;
        }
        if max_update <= threshold {
            return Ok((iters, true, missing.len()));
        }
    }
    Ok((iters, false, missing.len()))
}

/// Largest `|cell - mean of 4-neighbours|` over the given cells of a slice.
pub fn harmonic_residual(s: &Array2<f64>, cells: &[(usize, usize)]) -> f64 {
    let (ny, nx) = s.dim();
    cells
        .iter()
        .map(|&(j, i)| {
            let mut nb = Vec::with_capacity(4);
            if j > 0 {
                nb.push(s[[j - 1, i]]);
            }
            if j + 1 < ny {
                nb.push(s[[j + 1, i]]);
            }
            if i > 0 {
                nb.push(s[[j, i - 1]]);
            }
            if i + 1 < nx {
                nb.push(s[[j, i + 1]]);
            }
            (s[[j, i]] - nb.iter().sum::<f64>() / nb.len() as f64).abs()
        })
        .fold(0.0, f64::max)
}
