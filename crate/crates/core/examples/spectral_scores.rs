//! Power spectra, spectral scores and resolved scales of noisy estimates.

use obench::grid::latlon_deg2m;
use obench::prng::Prng;
use obench::spectral::{axis_scales, psd_isotropic, psd_score, Conditioning, Geometry, Scale};
use obench::synthetic::{eddy_field, EddyConfig};

fn show(s: Scale, unit: &str) -> String {
    match s {
        Scale::Resolved(v) => format!("{v:.1} {unit}"),
        Scale::GridScale(v) => format!("<={v:.1} {unit}"),
        Scale::Unresolved => "unresolved".into(),
    }
}

fn main() -> obench::Result<()> {
    let truth = latlon_deg2m(&eddy_field(&EddyConfig::default())?)?;
    let psd = psd_isotropic(&truth, Conditioning::SPATIAL)?;
    println!("isotropic PSD: {} bins, total power {:.3e} m^2", psd.axis1.len(), psd.total_power());

    // White noise swamps the small scales first, so the resolved scale grows
    // with the noise level.
    for std in [1e-4, 1e-3, 1e-2] {
        let mut rng = Prng::new(5);
        let pred = truth.with_data(truth.data().mapv(|v| v + std * rng.gaussian()))?;
        let iso = axis_scales(&psd_score(&truth, &pred, Geometry::Isotropic, Conditioning::SPATIAL)?)?;
        let st = axis_scales(&psd_score(&truth, &pred, Geometry::LonTime, Conditioning::SPACETIME)?)?;
        println!(
            "noise {std:.0e} m: lambda_r {}, lambda_x {}, lambda_t {}",
            show(iso.axis1, "km"),
            show(st.axis1, "km"),
            show(st.axis2.unwrap_or(Scale::Unresolved), "days")
        );
    }
    Ok(())
}
