//! Property tests over randomly generated grids, tracks, patch specs and
//! recipes.

mod common;

use ndarray::{s, Array3};
use proptest::prelude::*;

use common::{degree_field, low_pass, meter_field};
use obench::grid::{
    decode_grid, encode_grid, latlon_deg2m, subset_track, utc_date, AlongTrackSet, CoordAxis, Dim, DomainBox,
    GeoData, GridAxes, GriddedField, TrackRecord, DAYS, DEGREES,
};
use obench::obs::{generate_tracks, Constellation, TrackPattern};
use obench::patcher::{reconstruct, PatchLayout, PatchSpec, Patcher, WeightMode};
use obench::physvars::{enstrophy, geostrophic_uv, kinetic_energy, okubo_weiss, relative_vorticity, sla, strain};
use obench::pipeline::{parse_config, run_steps, Context, Value};
use obench::prng::Prng;
use obench::regrid::{fill_nans_gauss_seidel, harmonic_residual, regrid_to_grid, regrid_to_track, FillConfig};
use obench::spectral::{axis_scales, psd_isotropic, psd_latlon, psd_score, Conditioning, Geometry, Scale};

fn noisy(field: GriddedField, seed: u64, nan_frac: f64) -> GriddedField {
    let mut rng = Prng::new(seed);
    let data = field.data().mapv(|_| {
        let v = rng.gaussian();
        if rng.uniform() < nan_frac {
            f64::NAN
        } else {
            v
        }
    });
    field.with_data(data).unwrap()
}

fn random_degree_field(nt: usize, ny: usize, nx: usize, seed: u64, nan_frac: f64) -> GriddedField {
    noisy(degree_field(nt, ny, nx, |_, _, _| 0.0), seed, nan_frac)
}

/// A slice with at least one valid cell everywhere it matters.
fn holed_field(ny: usize, nx: usize, seed: u64, nan_frac: f64) -> GriddedField {
    let mut f = random_degree_field(2, ny, nx, seed, nan_frac).into_data();
    f[[0, 0, 0]] = 1.5;
    f[[1, ny - 1, nx - 1]] = -0.5;
    degree_field(2, ny, nx, |t, j, i| f[[t, j, i]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_encoding_round_trips(nt in 1usize..4, ny in 1usize..7, nx in 1usize..7, seed: u64, nan in 0.0..0.5f64) {
        let f = random_degree_field(nt, ny, nx, seed, nan).with_attr("source", "prop");
        let back = decode_grid(&encode_grid(&f)).unwrap();
        prop_assert!(back.bit_eq(&f));
        prop_assert_eq!(back.attrs(), f.attrs());
    }

    #[test]
    fn validate_latlon_is_idempotent(
        lon0 in -180.0..330.0f64,
        dlon in 0.01..2.0f64,
        lat0 in -80.0..70.0f64,
        dlat in 0.01..1.0f64,
        flip_lat: bool,
        nx in 1usize..12,
        ny in 1usize..12,
    ) {
        let lon: Vec<f64> = (0..nx).map(|i| lon0 + i as f64 * dlon).collect();
        let mut lat: Vec<f64> = (0..ny).map(|j| lat0 + j as f64 * dlat).collect();
        if flip_lat {
            lat.reverse();
        }
        let axes = GridAxes::new(
            utc_date(2012, 10, 1),
            CoordAxis::regular(Dim::Time, 0.0, 1.0, 2, DAYS).unwrap(),
            CoordAxis::new(Dim::Lat, lat, DEGREES).unwrap(),
            CoordAxis::new(Dim::Lon, lon, DEGREES).unwrap(),
        ).unwrap();
        let f = GriddedField::new("ssh", "m", axes, Array3::from_shape_fn((2, ny, nx), |(t, j, i)| (t * 100 + j * 10 + i) as f64)).unwrap();
        let once = f.validate_latlon().unwrap();
        let twice = once.validate_latlon().unwrap();
        prop_assert!(twice.bit_eq(&once));
        prop_assert!(once.lon().values().iter().all(|v| (-180.0..180.0).contains(v)));
        prop_assert!(once.lat().is_increasing() && once.lon().is_increasing());
    }

    #[test]
    fn full_extent_selection_and_deg2m_keep_data(nt in 1usize..4, ny in 2usize..9, nx in 2usize..9, seed: u64) {
        let f = random_degree_field(nt, ny, nx, seed, 0.2);
        let lat = f.lat().values();
        let lon = f.lon().values();
        let full = DomainBox::new([lat[0], lat[ny - 1]], [lon[0], lon[nx - 1]], None).unwrap();
        prop_assert!(f.sel_domain(&full).unwrap().bit_eq(&f));
        let m = latlon_deg2m(&f).unwrap();
        prop_assert!(m.data().iter().zip(f.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert!(m.lat().is_meters() && m.lon().is_meters());
    }

    #[test]
    fn subset_is_a_pure_function(n in 0usize..60, k in 0usize..80, seed: u64) {
        let records: Vec<TrackRecord> = (0..n)
            .map(|i| TrackRecord { time: i as f64 * 0.01, lat: 35.0 + 0.01 * i as f64, lon: -60.0, value: i as f64 })
            .collect();
        let track = AlongTrackSet::new(utc_date(2012, 10, 1), records).unwrap();
        let a = subset_track(&track, k, seed);
        let b = subset_track(&track, k, seed);
        prop_assert_eq!(a.records(), b.records());
        prop_assert_eq!(a.len(), k.min(n));
    }

    #[test]
    fn full_coverage_patches_round_trip(
        shape in (1usize..10, 1usize..14, 1usize..14),
        picks in proptest::array::uniform3((0usize..100, 0usize..100)),
        seed: u64,
    ) {
        let shape = [shape.0, shape.1, shape.2];
        let mut spec = PatchSpec::new().full_scan(true);
        for (d, dim) in Dim::ALL.into_iter().enumerate() {
            let p = 1 + picks[d].0 % shape[d];
            let span = shape[d] - p;
            let strides: Vec<usize> = (1..=p).filter(|s| span % s == 0).collect();
            spec = spec.dim(dim, p, strides[picks[d].1 % strides.len()]);
        }
        let f = noisy(degree_field(shape[0], shape[1], shape[2], |_, _, _| 0.0), seed, 0.0);
        let layout = PatchLayout::new(&spec, shape).unwrap();
        prop_assert!(layout.len() * layout.patch_volume() >= shape.iter().product::<usize>());
        let patcher = Patcher::new(&f, &spec).unwrap();
        let items: Vec<(usize, Array3<f64>)> = patcher.iter().map(|v| (v.index, v.data)).collect();
        let ones: Vec<(usize, Array3<f64>)> = items.iter().map(|(i, d)| (*i, d.mapv(|_| 1.0))).collect();
        for mode in [WeightMode::Uniform, WeightMode::Triangular] {
            let rec = reconstruct(&layout, f.axes(), &f, &items, mode).unwrap();
            for (a, b) in rec.data().iter().zip(f.data()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) || (a - b).abs() <= 1e-15);
            }
            let rec = reconstruct(&layout, f.axes(), &f, &ones, mode).unwrap();
            prop_assert!(rec.data().iter().all(|v| *v == 1.0));
        }
    }

    #[test]
    fn patch_views_carry_contiguous_coordinates(
        shape in (1usize..8, 1usize..10, 1usize..10),
        p in (1usize..8, 1usize..10, 1usize..10),
        t in (1usize..5, 1usize..5, 1usize..5),
    ) {
        let shape = [shape.0, shape.1, shape.2];
        let p = [p.0.min(shape[0]), p.1.min(shape[1]), p.2.min(shape[2])];
        let spec = PatchSpec::new().dim(Dim::Time, p[0], t.0).dim(Dim::Lat, p[1], t.1).dim(Dim::Lon, p[2], t.2);
        let f = degree_field(shape[0], shape[1], shape[2], |a, b, c| (a * 10_000 + b * 100 + c) as f64);
        let patcher = Patcher::new(&f, &spec).unwrap();
        for v in patcher.iter() {
            prop_assert_eq!(v.data.shape(), &p[..]);
            let o = v.offsets;
            prop_assert_eq!(v.time.values(), &f.time().values()[o[0]..o[0] + p[0]]);
            prop_assert_eq!(v.lat.values(), &f.lat().values()[o[1]..o[1] + p[1]]);
            prop_assert_eq!(v.lon.values(), &f.lon().values()[o[2]..o[2] + p[2]]);
            prop_assert_eq!(v.data[[0, 0, 0]], f.data()[[o[0], o[1], o[2]]]);
        }
    }

    #[test]
    fn derived_quantities_keep_their_signs(ny in 3usize..12, nx in 3usize..12, seed: u64) {
        let eta = noisy(meter_field(2, ny, nx, 4_000.0, |_, _, _| 0.0), seed, 0.0);
        let eta = eta.with_data(eta.data().mapv(|v| 0.1 * v)).unwrap();
        let (u, v) = geostrophic_uv(&eta).unwrap();
        let zeta = relative_vorticity(&u, &v).unwrap();
        let st = strain(&u, &v).unwrap();
        let ow = okubo_weiss(&u, &v, &zeta).unwrap();
        prop_assert!(kinetic_energy(&u, &v).unwrap().data().iter().all(|v| *v >= 0.0));
        prop_assert!(enstrophy(&zeta).unwrap().data().iter().all(|v| *v >= 0.0));
        prop_assert!(st.magnitude.data().iter().all(|v| *v >= 0.0));
        for (((o, n), sh), z) in ow.data().iter().zip(&st.normal).zip(&st.shear).zip(zeta.data()) {
            prop_assert_eq!(o.to_bits(), (n * n + sh * sh - z * z).to_bits());
        }
        let anomaly = sla(&eta).unwrap();
        for t in 0..2 {
            let plane = anomaly.data().slice(s![t, .., ..]);
            let mean = plane.mean().unwrap();
            let std = plane.std(0.0);
            prop_assert!(mean.abs() <= 1e-10 * std.max(1e-300));
        }
    }

    #[test]
    fn nan_reaches_every_touching_stencil(ny in 5usize..10, nx in 5usize..10, j in 0usize..10, i in 0usize..10) {
        let (j, i) = (j % ny, i % nx);
        let mut eta = meter_field(1, ny, nx, 3_000.0, |_, y, x| 1e-6 * (x * x + y)).into_data();
        eta[[0, j, i]] = f64::NAN;
        let eta = meter_field(1, ny, nx, 3_000.0, |_, _, _| 0.0).with_data(eta).unwrap();
        let (u, v) = geostrophic_uv(&eta).unwrap();
        // v = d/dx: every cell in row j whose x-stencil includes column i.
        for c in 0..nx {
            let touches = if c == 0 { i <= 3 } else if c == nx - 1 { i + 3 >= nx - 1 } else { c.abs_diff(i) <= 1 };
            if touches {
                prop_assert!(v.data()[[0, j, c]].is_nan(), "v at column {} for NaN at {}", c, i);
            }
        }
        for r in 0..ny {
            let touches = if r == 0 { j <= 3 } else if r == ny - 1 { j + 3 >= ny - 1 } else { r.abs_diff(j) <= 1 };
            if touches {
                prop_assert!(u.data()[[0, r, i]].is_nan());
            }
        }
    }

    #[test]
    fn fill_respects_data_and_bounds(ny in 2usize..12, nx in 2usize..12, seed: u64, nan in 0.05..0.8f64) {
        let f = holed_field(ny, nx, seed, nan);
        let cfg = FillConfig::default();
        let (filled, _) = fill_nans_gauss_seidel(&f, cfg).unwrap();
        for t in 0..2 {
            let before = f.data().slice(s![t, .., ..]);
            let after = filled.data().slice(s![t, .., ..]).to_owned();
            let valid: Vec<f64> = before.iter().copied().filter(|v| !v.is_nan()).collect();
            let lo = valid.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = valid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = valid.iter().sum::<f64>() / valid.len() as f64;
            let std = (valid.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / valid.len() as f64).sqrt();
            let mut holes = Vec::new();
            for ((j, i), b) in before.indexed_iter() {
                let a = after[[j, i]];
                if b.is_nan() {
                    holes.push((j, i));
                    prop_assert!(a >= lo && a <= hi, "{} outside [{}, {}]", a, lo, hi);
                } else {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
            let residual = harmonic_residual(&after, &holes);
            prop_assert!(residual < 10.0 * cfg.tol * std.max(f64::MIN_POSITIVE), "{} vs std {}", residual, std);
        }
    }

    #[test]
    fn binning_then_sampling_at_centres_is_identity(nt in 1usize..4, ny in 1usize..8, nx in 1usize..8, seed: u64, keep in 0.1..1.0f64) {
        let grid = degree_field(nt, ny, nx, |_, _, _| 0.0);
        let mut rng = Prng::new(seed);
        let mut records = Vec::new();
        for t in 0..nt {
            for j in 0..ny {
                for i in 0..nx {
                    if rng.uniform() < keep {
                        records.push(TrackRecord {
                            time: grid.time().values()[t],
                            lat: grid.lat().values()[j],
                            lon: grid.lon().values()[i],
                            value: rng.gaussian(),
                        });
                    }
                }
            }
        }
        let track = AlongTrackSet::new(grid.epoch(), records).unwrap();
        let binned = regrid_to_grid(&track, grid.axes()).unwrap();
        prop_assert_eq!(binned.dropped, 0);
        let back = regrid_to_track(&binned.field, &track).unwrap();
        for (a, b) in back.records().iter().zip(track.records()) {
            prop_assert!((a.value - b.value).abs() <= 1e-12 * b.value.abs().max(1.0));
        }
    }

    #[test]
    fn psd_ignores_offsets_and_scales_quadratically(seed: u64, offset in -50.0..50.0f64, exp in -3i32..4) {
        let f = noisy(meter_field(2, 16, 20, 5_000.0, |_, _, _| 0.0), seed, 0.0);
        let shifted = f.with_data(f.data().mapv(|v| v + offset)).unwrap();
        let alpha = 2f64.powi(exp);
        let scaled = f.with_data(f.data().mapv(|v| alpha * v)).unwrap();
        for spectrum in [psd_latlon, psd_isotropic] {
            let base = spectrum(&f, Conditioning::SPATIAL).unwrap();
            let moved = spectrum(&shifted, Conditioning::SPATIAL).unwrap();
            let max = base.psd.iter().copied().fold(0.0, f64::max);
            for (a, b) in moved.psd.iter().zip(&base.psd) {
                prop_assert!((a - b).abs() <= 1e-9 * max);
            }
            let big = spectrum(&scaled, Conditioning::SPATIAL).unwrap();
            for (a, b) in big.psd.iter().zip(&base.psd) {
                prop_assert_eq!(*a, alpha * alpha * b);
            }
            prop_assert!(base.psd.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn tracks_are_deterministic_and_inside_the_box(
        lat0 in -60.0..50.0f64,
        lon0 in -180.0..160.0f64,
        size in 1.0..15.0f64,
        start in 0.0..20.0f64,
        len in 0.1..3.0f64,
        inc in 10.0..170.0f64,
    ) {
        let domain = DomainBox::new([lat0, lat0 + size], [lon0, lon0 + size.min(20.0)], None).unwrap();
        let constellation = Constellation {
            name: "prop".into(),
            patterns: vec![TrackPattern { repeat_cycle_days: 2.0, ..TrackPattern::nadir(inc) }],
        };
        let period = [start, start + len];
        let a = generate_tracks(&constellation, &domain, utc_date(2012, 10, 1), period).unwrap();
        let b = generate_tracks(&constellation, &domain, utc_date(2012, 10, 1), period).unwrap();
        prop_assert_eq!(&a, &b);
        for p in &a.points {
            prop_assert!(domain.contains(p.lat, p.lon));
            prop_assert!(p.time >= period[0] && p.time < period[1]);
        }
    }

    #[test]
    fn manifest_hashes_chain(ops in proptest::collection::vec(0usize..4, 1..7), seed: u64) {
        const STEPS: [&str; 4] = [
            "  - op: validate_latlon\n",
            "  - op: validate_time\n    params: {epoch: \"2012-09-30T00:00:00Z\"}\n",
            "  - op: sel_domain\n    params: {lat: [36.0, 36.2], lon: [-62.0, -61.8]}\n",
            "  - op: fill_nans\n",
        ];
        let mut text = String::from("input: in.obg\noutput: out.obg\nsteps:\n");
        for o in &ops {
            text.push_str(STEPS[*o]);
        }
        let cfg = parse_config(&text).unwrap();
        let f = holed_field(6, 6, seed, 0.3);
        let (out, manifest) = run_steps(&cfg.steps, Value::Grid(f.clone()), &Context::new(".")).unwrap();
        prop_assert_eq!(manifest.steps.len(), ops.len());
        prop_assert_eq!(&manifest.steps[0].in_hash, &Value::Grid(f).hash());
        for pair in manifest.steps.windows(2) {
            prop_assert_eq!(&pair[0].out_hash, &pair[1].in_hash);
        }
        prop_assert_eq!(&manifest.steps.last().unwrap().out_hash, &out.hash());
    }
}

#[test]
fn resolved_scale_grows_with_cutoff() {
    let (nt, n, dx) = (2, 64, 5_000.0);
    let truth = noisy(meter_field(nt, n, n, dx, |_, _, _| 0.0), 77, 0.0);
    let mut last = 0.0;
    for cutoff in [20e3, 30e3, 45e3, 65e3, 95e3] {
        let mut lp = truth.data().clone();
        for t in 0..nt {
            lp.slice_mut(s![t, .., ..]).assign(&low_pass(&truth.data().slice(s![t, .., ..]).to_owned(), dx, cutoff));
        }
        let pred = truth.with_data(lp).unwrap();
        let curve = psd_score(&truth, &pred, Geometry::Isotropic, Conditioning::SPATIAL).unwrap();
        let lambda = match axis_scales(&curve).unwrap().axis1 {
            Scale::Resolved(v) => v,
            other => panic!("cutoff {cutoff}: {other:?}"),
        };
        assert!(lambda > last, "cutoff {cutoff}: {lambda} after {last}");
        last = lambda;
    }
}

#[test]
fn constant_score_is_grid_scale() {
    let truth = noisy(meter_field(2, 16, 16, 5_000.0, |_, _, _| 0.0), 3, 0.0);
    let curve = psd_score(&truth, &truth, Geometry::Isotropic, Conditioning::SPATIAL).unwrap();
    assert!(matches!(axis_scales(&curve).unwrap().axis1, Scale::GridScale(_)));
}
