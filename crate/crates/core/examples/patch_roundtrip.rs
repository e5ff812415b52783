//! Cut a field into overlapping patches and stitch it back together.

use obench::grid::Dim;
use obench::patcher::{PatchSpec, Patcher, WeightMode};
use obench::synthetic::{eddy_field, EddyConfig};

fn main() -> obench::Result<()> {
    let field = eddy_field(&EddyConfig::default())?;
    let spec = PatchSpec::new()
        .dim(Dim::Time, 5, 5)
        .dim(Dim::Lat, 32, 16)
        .dim(Dim::Lon, 32, 16)
        .full_scan(true);
    let patcher = Patcher::new(&field, &spec)?;
    println!("grid {:?} -> {} patches of {:?}", field.shape(), patcher.len(), patcher.layout().patch_shape());

    let first = patcher.get(0)?;
    println!("patch 0 covers lat {:.2}..{:.2}", first.lat.values()[0], first.lat.values()[31]);

    let items: Vec<_> = patcher.iter().map(|p| (p.index, p.data)).collect();
    for weight in [WeightMode::Uniform, WeightMode::Triangular] {
        let back = patcher.reconstruct(&items, weight)?;
        let err = back
            .data()
            .iter()
            .zip(field.data())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        println!("{weight:?}: max reconstruction error {err:.1e}");
    }
    Ok(())
}
