//! Numerical core for the stochastic heat and cable equations driven by
//! symmetric Lévy generators on the line, and for the Gaussian field that
//! carries the local times of the symmetrized process.
//!
//! Everything here is `no_std` (with `alloc`): exponents and Lévy measures
//! ([`levy`]), Fourier-side kernels and variances ([`kernel`]), spectral
//! synthesis of the fields ([`synth`]), mode-exact torus simulation
//! ([`spde`]) and local-time Monte Carlo ([`localtime`]). File formats, the
//! command line and parallel drivers live in the `dynkin-lab` crate.
//!
//! Enable the `std` feature to route transcendental functions through the
//! platform math library instead of the pure-Rust `libm`.

#![no_std]
#![warn(missing_docs)]
// `!(x > 0.0)` range checks reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod kernel;
pub mod levy;
pub mod localtime;
pub mod quad;
pub mod rng;
pub mod spde;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use kernel::{AtomicMeasure, KernelKind, KernelQuery, VarianceProfile};
pub use levy::{ConditionReport, DensityFamily, LevyMeasure, LevyModel, Verdict};
pub use localtime::{LocalTimeEstimate, PathConfig};
pub use spde::{TorusConfig, TorusState};
pub use synth::{FieldKind, FieldSample, SpatialGrid, SpectralGrid};
