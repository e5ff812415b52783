//! Coordinate-aware sliding-window patches over a [`GriddedField`].
//!
//! A [`PatchSpec`] gives a window size and stride per dimension; dimensions it
//! does not mention span their full extent. Patches are linearized row-major
//! over the per-dimension window counts with dimensions in `(time, lat, lon)`
//! order. [`reconstruct`] recombines (possibly overlapping) patches with
//! uniform or triangular weights; cells covered by no patch become NaN.

use std::collections::{BTreeMap, HashSet};

use ndarray::{s, Array3};
use serde::{Deserialize, Serialize};

use crate::grid::{CoordAxis, Dim, GridAxes, GriddedField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimPatch {
    pub patch: usize,
    pub stride: usize,
}

/// Patch configuration, serialized as
/// `{"dims": {"lat": {"patch": 64, "stride": 32}}, "check_full_scan": true}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    #[serde(default)]
    pub dims: BTreeMap<String, DimPatch>,
    #[serde(default)]
    pub check_full_scan: bool,
}

impl PatchSpec {
    pub fn new() -> Self {
        PatchSpec::default()
    }

    pub fn dim(mut self, dim: Dim, patch: usize, stride: usize) -> Self {
        self.dims.insert(dim.as_str().to_string(), DimPatch { patch, stride });
        self
    }

    pub fn full_scan(mut self, check: bool) -> Self {
        self.check_full_scan = check;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("patch spec", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("patch spec serializes")
    }
}

/// A spec resolved against a concrete grid shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchLayout {
    shape: [usize; 3],
    patch: [usize; 3],
    stride: [usize; 3],
    counts: [usize; 3],
}

impl PatchLayout {
    pub fn new(spec: &PatchSpec, shape: [usize; 3]) -> Result<Self> {
        if let Some(name) = spec.dims.keys().find(|k| Dim::from_name(k).is_none()) {
            return Err(Error::InvalidArgument(format!(
                "patch spec names unknown dimension `{name}` (expected time, lat, lon)"
            )));
        }
        let mut patch = shape;
        let mut stride = shape;
        for dim in Dim::ALL {
            let d = dim.index();
            if let Some(p) = spec.dims.get(dim.as_str()) {
                if p.patch == 0 || p.stride == 0 {
                    return Err(Error::InvalidArgument(format!("{dim}: patch and stride must be positive")));
                }
                patch[d] = p.patch;
                stride[d] = p.stride;
            }
            if shape[d] == 0 {
                return Err(Error::Shape(format!("{dim} dimension is empty")));
            }
            if patch[d] > shape[d] {
                return Err(Error::InvalidArgument(format!(
                    "{dim}: patch {} exceeds dimension size {}",
                    patch[d], shape[d]
                )));
            }
            if spec.check_full_scan && (shape[d] - patch[d]) % stride[d] != 0 {
                return Err(Error::InvalidArgument(format!(
                    "{dim}: (size {} - patch {}) is not a multiple of stride {}; windows would not reach the last cells",
                    shape[d], patch[d], stride[d]
                )));
            }
        }
        let counts = std::array::from_fn(|d| (shape[d] - patch[d]) / stride[d] + 1);
        Ok(PatchLayout {
            shape,
            patch,
            stride,
            counts,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn patch_shape(&self) -> [usize; 3] {
        self.patch
    }

    pub fn strides(&self) -> [usize; 3] {
        self.stride
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn patch_volume(&self) -> usize {
        self.patch.iter().product()
    }

    /// Start offsets of patch `index`.
    pub fn offsets(&self, index: usize) -> Result<[usize; 3]> {
        let count = self.len();
        if index >= count {
            return Err(Error::PatchIndex { index, count });
        }
        let mut rest = index;
        let mut out = [0; 3];
        for d in (0..3).rev() {
            out[d] = (rest % self.counts[d]) * self.stride[d];
            rest /= self.counts[d];
        }
        Ok(out)
    }
}

/// One extracted window with the coordinates it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchView {
    pub index: usize,
    pub offsets: [usize; 3],
    pub data: Array3<f64>,
    pub time: CoordAxis,
    pub lat: CoordAxis,
    pub lon: CoordAxis,
}

/// Indexable patch sequence over a borrowed field.
#[derive(Debug, Clone)]
pub struct Patcher<'a> {
    field: &'a GriddedField,
    layout: PatchLayout,
}

impl<'a> Patcher<'a> {
    pub fn new(field: &'a GriddedField, spec: &PatchSpec) -> Result<Self> {
        Ok(Patcher {
            field,
            layout: PatchLayout::new(spec, field.shape())?,
        })
    }

    pub fn layout(&self) -> &PatchLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<PatchView> {
        let o = self.layout.offsets(index)?;
        let p = self.layout.patch;
        let data = self
            .field
            .data()
            .slice(s![o[0]..o[0] + p[0], o[1]..o[1] + p[1], o[2]..o[2] + p[2]])
            .to_owned();
        let axes = self.field.axes();
        Ok(PatchView {
            index,
            offsets: o,
            data,
            time: axes.time.select(o[0]..o[0] + p[0]),
            lat: axes.lat.select(o[1]..o[1] + p[1]),
            lon: axes.lon.select(o[2]..o[2] + p[2]),
        })
    }

    /// Patches in index order; each call starts a fresh pass.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = PatchView> + '_ {
        (0..self.len()).map(move |i| self.get(i).expect("index within patch count"))
    }

    /// Reassembles a field on this patcher's grid from `(index, data)` pairs.
    pub fn reconstruct(&self, patches: &[(usize, Array3<f64>)], weight: WeightMode) -> Result<GriddedField> {
        reconstruct(&self.layout, self.field.axes(), self.field, patches, weight)
    }
}

pub fn patch_count(spec: &PatchSpec, field: &GriddedField) -> Result<usize> {
    Ok(PatchLayout::new(spec, field.shape())?.len())
}

pub fn get_patch(spec: &PatchSpec, field: &GriddedField, index: usize) -> Result<PatchView> {
    Patcher::new(field, spec)?.get(index)
}

/// Per-cell weights used when overlapping patches are averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Uniform,
    /// Separable tent `min(j + 1, P - j)` per dimension, peak-normalized to 1.
    Triangular,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightMode::Uniform),
            "triangular" => Ok(WeightMode::Triangular),
            other => Err(Error::InvalidArgument(format!("unknown weight mode `{other}`"))),
        }
    }
}

fn tent(len: usize) -> Vec<f64> {
    let peak = len.div_ceil(2) as f64;
    (0..len).map(|j| (j + 1).min(len - j) as f64 / peak).collect()
}

fn weight_profile(mode: WeightMode, len: usize) -> Vec<f64> {
    match mode {
        WeightMode::Uniform => vec![1.0; len],
        WeightMode::Triangular => tent(len),
    }
}

/// Weighted reconstruction: `out[c] = sum w v / sum w` over covering patches.
///
/// `axes` gives the output geometry and `template` its metadata (variable,
/// units, attrs); the template payload is ignored.
pub fn reconstruct(
    layout: &PatchLayout,
    axes: &GridAxes,
    template: &GriddedField,
    patches: &[(usize, Array3<f64>)],
    weight: WeightMode,
) -> Result<GriddedField> {
    if axes.shape() != layout.shape {
        return Err(Error::Shape(format!(
            "layout shape {:?} does not match grid shape {:?}",
            layout.shape,
            axes.shape()
        )));
    }
    let p = layout.patch;
    let profiles: [Vec<f64>; 3] = std::array::from_fn(|d| weight_profile(weight, p[d]));
    let mut num = Array3::<f64>::zeros(layout.shape);
    let mut den = Array3::<f64>::zeros(layout.shape);
    let mut seen = HashSet::with_capacity(patches.len());

    for (index, data) in patches {
        if !seen.insert(*index) {
            return Err(Error::InvalidArgument(format!("patch index {index} supplied more than once")));
        }
        let o = layout.offsets(*index)?;
        if data.shape() != p {
            return Err(Error::Shape(format!(
                "patch {index} has shape {:?}, expected {:?}",
                data.shape(),
                p
            )));
        }
        for ((a, b, c), v) in data.indexed_iter() {
            if v.is_nan() {
                continue;
            }
            let w = profiles[0][a] * profiles[1][b] * profiles[2][c];
            let cell = [o[0] + a, o[1] + b, o[2] + c];
            num[cell] += w * v;
            den[cell] += w;
        }
    }

    let mut out = num;
    out.zip_mut_with(&den, |n, d| *n = if *d > 0.0 { *n / *d } else { f64::NAN });
    GriddedField::new(template.var(), template.units(), axes.clone(), out).map(|f| f.with_attrs(template.attrs().clone()))
}
