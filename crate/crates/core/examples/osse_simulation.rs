//! Simulate a four-satellite nadir constellation over a synthetic truth.

use obench::obs::{daily_coverage, simulate_over, Constellation, NoiseSpec};
use obench::synthetic::{eddy_field, EddyConfig};

fn main() -> obench::Result<()> {
    let truth = eddy_field(&EddyConfig::default())?;
    let constellation = Constellation::nadir_4sat();
    let sampled = simulate_over(&truth, &constellation, NoiseSpec::gaussian(0.01, 7)?)?;
    println!(
        "{}: {} samples over {} days, {} dropped",
        constellation.name,
        sampled.track.len(),
        truth.shape()[0],
        sampled.dropped
    );
    let coverage = daily_coverage(&sampled.track, truth.axes())?;
    let max = coverage.iter().copied().fold(0.0, f64::max);
    let mean = coverage.iter().sum::<f64>() / coverage.len() as f64;
    println!("daily grid coverage: mean {:.2}%, max {:.2}%", 100.0 * mean, 100.0 * max);
    for r in sampled.track.records().iter().take(3) {
        println!("  t={:.4} d  lat={:.3}  lon={:.3}  ssh={:+.4}", r.time, r.lat, r.lon, r.value);
    }
    Ok(())
}
