//! Geostrophic currents and eddy diagnostics from sea surface height.

use obench::grid::latlon_deg2m;
use obench::physvars::{derive, DerivedVar};
use obench::synthetic::{eddy_field, EddyConfig};

fn main() -> obench::Result<()> {
    let ssh = latlon_deg2m(&eddy_field(&EddyConfig::default())?)?;
    for var in DerivedVar::ALL {
        let f = derive(&ssh, var)?;
        let (lo, hi) = f
            .data()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        println!("{:>6} [{}]: {lo:+.3e} .. {hi:+.3e}", var.label(), var.units());
    }
    Ok(())
}
