//! Quantum spectrum and canonical thermodynamics of a one-dimensional array of
//! `N` identical rectangular barriers packed into a fixed length `L`.
//!
//! The pipeline is:
//!
//! 1. [`geometry`] fixes the array shape from `(L, N, c, v)` where `c` is the
//!    ratio of total gap length to total barrier width.
//! 2. [`transfer`] builds 2×2 transfer matrices for one barrier, the whole
//!    array, and the closed-form `N → ∞` limit.
//! 3. [`spectrum`] solves the periodic-boundary quantization condition on the
//!    ring `[-C, C]` by tracking the scattering eigenphases in `k`.
//! 4. [`thermo`] turns a spectrum into average energy, specific heat, entropy
//!    and free energy.
//! 5. [`analysis`] looks for peaks, double peaks and fits a square-root cusp
//!    near a critical temperature.
//!
//! [`oracle`] re-derives scattering amplitudes and quantized levels by direct
//! boundary matching, without transfer matrices, and exists to check the rest.
//!
//! Units are fixed: `ħ = 1`, `m = 1/2`, Boltzmann constant `1`, so `k = √e`.

pub mod analysis;
pub mod cache;
pub mod error;
pub mod geometry;
pub mod matrix;
pub mod oracle;
pub mod spectrum;
pub mod thermo;
pub mod transfer;

mod numeric;

pub use error::{Error, Result};
pub use geometry::{BarrierCount, BarrierGeometry, PhysicalConstants, SpectrumConfig};
pub use matrix::ComplexMatrix2;
pub use spectrum::{EnergySpectrum, RootFindReport};
pub use thermo::{Observables, ThermoCurve};


