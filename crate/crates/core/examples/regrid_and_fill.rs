//! Bin along-track samples onto a grid and fill the gaps.

use obench::grid::{CoordAxis, Dim, GridAxes, DAYS};
use obench::obs::{simulate_over, Constellation, NoiseSpec};
use obench::regrid::{fill_nans_gauss_seidel, regrid_to_grid, regrid_to_track, FillConfig};
use obench::synthetic::{eddy_field, EddyConfig};

fn main() -> obench::Result<()> {
    let truth = eddy_field(&EddyConfig::default())?;
    let obs = simulate_over(&truth, &Constellation::nadir_4sat(), NoiseSpec::gaussian(0.0, 1)?)?;
    println!("{} along-track samples", obs.track.len());

    // Five-day bins so that every slice sees a few passes.
    let axes = GridAxes::new(
        truth.epoch(),
        CoordAxis::regular(Dim::Time, 2.0, 5.0, 6, DAYS)?,
        truth.lat().clone(),
        truth.lon().clone(),
    )?;
    let binned = regrid_to_grid(&obs.track, &axes)?;
    println!(
        "{} of {} cells observed, {} samples dropped",
        binned.field.count_valid(),
        binned.field.data().len(),
        binned.dropped
    );

    let (filled, stats) = fill_nans_gauss_seidel(&binned.field, FillConfig::default())?;
    println!("filled {} cells, sweeps per slice {:?}", stats.filled_cells, stats.iterations);

    // Samples outside the first and last time node come back as NaN.
    let back = regrid_to_track(&filled, &obs.track)?;
    let misfit: Vec<f64> = back
        .records()
        .iter()
        .zip(obs.track.records())
        .map(|(a, b)| a.value - b.value)
        .filter(|d| d.is_finite())
        .collect();
    let rms = (misfit.iter().map(|d| d * d).sum::<f64>() / misfit.len() as f64).sqrt();
    println!("rms misfit at {} interior samples: {rms:.3} m", misfit.len());
    Ok(())
}
