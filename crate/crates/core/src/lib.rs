//! Benchmarking toolkit for gridded sea-surface-height (SSH) fields.
//!
//! The crate covers the full evaluation path for SSH reconstructions:
//!
//! - [`grid`]: the `(time, lat, lon)` data model, coordinate canonicalization,
//!   domain selection and the OBG binary / track CSV file formats.
//! - [`patcher`]: coordinate-aware sliding-window patches and weighted
//!   reconstruction of full fields from patches.
//! - [`physvars`]: geostrophic diagnostics derived from SSH (velocities,
//!   kinetic energy, vorticity, enstrophy, strain, Okubo-Weiss).
//! - [`regrid`]: along-track/grid regridding and Gauss-Seidel gap filling.
//! - [`spectral`]: skill scores, wavenumber spectra, PSD scores, resolved
//!   scales and leaderboard reports.
//! - [`obs`]: synthetic satellite tracks and pseudo-observation sampling.
//! - [`pipeline`]: declarative sequential recipes with a hashed manifest.
//! - [`eval`]: one-call evaluation of a study field against a reference.
//!
//! Runnable walk-throughs live in `examples/`; the `obench` binary exposes the
//! same functionality on the command line.

pub mod cli;
pub mod error;
pub mod eval;
pub mod grid;
pub mod obs;
pub mod patcher;
pub mod physvars;
pub mod pipeline;
pub mod prng;
pub mod regrid;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
pub use grid::{AlongTrackSet, CoordAxis, Dim, DomainBox, GridAxes, GriddedField, TrackRecord};
