#![allow(dead_code)]

use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use obench::grid::{utc_date, CoordAxis, Dim, GridAxes, GriddedField, DAYS, DEGREES, METERS};

/// Daily grid with lat/lon in meters and a recorded mean latitude.
pub fn meter_field(nt: usize, ny: usize, nx: usize, dx: f64, f: impl Fn(f64, f64, f64) -> f64) -> GriddedField {
    let axes = GridAxes::new(
        utc_date(2012, 10, 1),
        CoordAxis::regular(Dim::Time, 0.0, 1.0, nt, DAYS).unwrap(),
        CoordAxis::regular(Dim::Lat, 0.0, dx, ny, METERS).unwrap(),
        CoordAxis::regular(Dim::Lon, 0.0, dx, nx, METERS).unwrap(),
    )
    .unwrap();
    let data = Array3::from_shape_fn((nt, ny, nx), |(t, j, i)| f(t as f64, j as f64 * dx, i as f64 * dx));
    GriddedField::new("ssh", "m", axes, data)
        .unwrap()
        .with_attr("lat_mean_deg", "38")
}

/// Daily grid on a 0.05 degree lattice starting at (36N, 62W).
pub fn degree_field(nt: usize, ny: usize, nx: usize, f: impl Fn(usize, usize, usize) -> f64) -> GriddedField {
    let axes = GridAxes::new(
        utc_date(2012, 10, 1),
        CoordAxis::regular(Dim::Time, 0.0, 1.0, nt, DAYS).unwrap(),
        CoordAxis::regular(Dim::Lat, 36.0, 0.05, ny, DEGREES).unwrap(),
        CoordAxis::regular(Dim::Lon, -62.0, 0.05, nx, DEGREES).unwrap(),
    )
    .unwrap();
    GriddedField::new("ssh", "m", axes, Array3::from_shape_fn((nt, ny, nx), |(t, j, i)| f(t, j, i))).unwrap()
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max |a - b| / max |b|`
pub fn max_rel_err(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
    let num = max_abs(a.iter().zip(b).map(|(x, y)| x - y));
    num / max_abs(b.iter().copied())
}

/// Naive DFT along one axis of a complex 2-D array (sign -1 forward).
pub fn dft_axis(re: &Array2<f64>, im: &Array2<f64>, axis: usize, sign: f64) -> (Array2<f64>, Array2<f64>) {
    let (ny, nx) = re.dim();
    let n = if axis == 0 { ny } else { nx };
    let mut ore = Array2::zeros((ny, nx));
    let mut oim = Array2::zeros((ny, nx));
    for j in 0..ny {
        for i in 0..nx {
            let m = if axis == 0 { j } else { i };
            let (mut sr, mut si) = (0.0, 0.0);
            for q in 0..n {
                let (a, b) = if axis == 0 { (re[[q, i]], im[[q, i]]) } else { (re[[j, q]], im[[j, q]]) };
                let ang = sign * 2.0 * PI * (m * q % n) as f64 / n as f64;
                sr += a * ang.cos() - b * ang.sin();
                si += a * ang.sin() + b * ang.cos();
            }
            ore[[j, i]] = sr;
            oim[[j, i]] = si;
        }
    }
    (ore, oim)
}

/// Ideal radial low-pass of a periodic plane: keeps |k| < 1 / cutoff.
pub fn low_pass(plane: &Array2<f64>, dx: f64, cutoff: f64) -> Array2<f64> {
    let (ny, nx) = plane.dim();
    let zero = Array2::zeros((ny, nx));
    let (r, i) = dft_axis(plane, &zero, 1, -1.0);
    let (mut r, mut i) = dft_axis(&r, &i, 0, -1.0);
    let signed = |m: usize, n: usize| if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    for j in 0..ny {
        for q in 0..nx {
            let k = (signed(j, ny) / (ny as f64 * dx)).hypot(signed(q, nx) / (nx as f64 * dx));
            if k >= 1.0 / cutoff {
                r[[j, q]] = 0.0;
                i[[j, q]] = 0.0;
            }
        }
    }
    let (r, i) = dft_axis(&r, &i, 0, 1.0);
    let (r, _) = dft_axis(&r, &i, 1, 1.0);
    r / (ny * nx) as f64
}

pub fn argmax(v: impl IntoIterator<Item = f64>) -> usize {
    v.into_iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}
