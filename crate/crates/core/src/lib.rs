//! Spectral singularities of a homogeneous planar slab of gain (or loss) medium.
//!
//! A slab of thickness `a` and complex index `n = η + iκ` emits purely outgoing
//! waves at real wavenumbers where its left and right scattering amplitudes
//! diverge. Without nonlinearity this happens at the classical lasing
//! threshold `g₀`. With an intensity-dependent index the condition picks up an
//! amplitude dependence, which fixes the emitted intensity above threshold.
//!
//! Modules:
//!
//! - [`slab_model`]: domain types, scaling to dimensionless variables, gain bookkeeping.
//! - [`linear_scattering`]: closed-form linear scattering and the threshold roots.
//! - [`nonlinear_bvp`]: direct RK4 integration of the nonlinear interior problem.
//! - [`perturbation`]: first-order corrections in the nonlinearity strength.
//! - [`singularity_finder`]: non-perturbative Newton search, inverse intensity problem, sweeps.
//! - [`cli`]: the `specsing` command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod linear_scattering;
pub mod nonlinear_bvp;
pub mod output;
pub mod perturbation;
pub mod quadrature;
pub mod singularity_finder;
pub mod slab_model;

pub use error::{Error, Result};
pub use linear_scattering::{find_linear_singularity, LinearSingularity};
pub use nonlinear_bvp::{GPair, ShootingConfig, Terminal};
pub use num_complex::Complex64;
pub use slab_model::{FieldState, GainReport, NonlinearitySpec, SlabMedium, WavePoint};
