//! Beyond-mean-field phase structure of a quasi-2D atomic Bose gas coupled
//! to molecules through a g-wave Feshbach resonance.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: spherical Bessel functions and spherical harmonics;
//! * [`model`], [`vertex`], [`mean_field`], [`bogoliubov`]: parameters,
//!   mean-field energy, Bogoliubov coefficients and spectra;
//! * [`lhy`]: the regularized Lee-Huang-Yang energy density and `α = ∂e_LHY/∂n₂₀`;
//! * [`phase`]: stationarity, critical detunings and sweeps;
//! * [`units`], [`io`]: laboratory units and file formats;
//! * [`pipeline`], [`selftest`]: config-driven runs and quick invariant checks.

pub mod bogoliubov;
pub mod error;
pub mod io;
pub mod lhy;
pub mod mean_field;
pub mod model;
pub mod phase;
pub mod pipeline;
pub mod quadrature;
pub mod selftest;
pub mod special;
pub mod units;
pub mod vertex;

pub use error::{Error, Result};
