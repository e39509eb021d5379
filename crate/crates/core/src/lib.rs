//! Pseudo-spectral Galerkin simulation of incompressible viscous, resistive
//! MHD on periodic tori, with magnetic helicity, gauge and mean-square
//! potential diagnostics and an ideal-limit sweep driver.
//!
//! Modules, bottom-up:
//!
//! - [`spectral`]: truncated Fourier fields, transforms, derivatives, Leray
//!   projection and dealiased products.
//! - [`gauge`]: harmonic/curl-range splitting, Coulomb potentials, stream
//!   functions, helicity with an explicit gauge shift.
//! - [`solver`]: integrating-factor RK4 for the Galerkin MHD system.
//! - [`diagnostics`]: energy, helicity and potential balances.
//! - [`initial`], [`sweep`]: initial data presets and ideal-limit sweeps.
//! - [`config`], [`checkpoint`]: JSON configuration and the binary checkpoint.

pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod gauge;
pub mod initial;
pub mod solver;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
