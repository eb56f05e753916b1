//! Numerical core for estimating Pickands' constants of fractional Brownian
//! motion through the ratio representation `E[M/S]`.
//!
//! Everything here is `no_std` with `alloc`: exact circulant-embedding
//! sampling of fractional Gaussian noise, the lattice path functionals, the
//! per-replication Monte Carlo kernels, the deterministic error-bound engine,
//! the mesh-extrapolation regression and the α = 2 quadrature identity.
//! Threading, caching and file formats live in the `pickands` crate.
#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod dft;
mod error;
pub mod estimator;
pub mod fgn;
pub mod identity;
pub mod oracle;
pub mod pathfun;
pub mod regress;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use fgn::{CirculantSpectrum, FbmPath, GridSpec, SeedVector};
pub use pathfun::{PathFunctionals, ZPath};

/// Prelude with the types needed by most callers.
pub mod prelude {
    pub use crate::bounds::{interval, BoundParams, IntervalReport};
    pub use crate::estimator::{EstimateRow, EstimatorConfig};
    pub use crate::fgn::{circulant_spectrum, CirculantSpectrum, FbmPath, GridSpec, SeedVector};
    pub use crate::pathfun::{functionals, z_from_fbm, PathFunctionals, ZPath};
    pub use crate::regress::{fit_eta_scaling, EtaScalingFit};
    pub use crate::{Error, Result};
}
