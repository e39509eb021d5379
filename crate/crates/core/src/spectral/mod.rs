//! Truncated Fourier field algebra on flat tori.

mod field;
mod grid;
mod ops;

pub use field::SpectralField;
pub use grid::{Grid, TorusSpec};
pub(crate) use ops::{cross_samples, leray_project_in_place};
pub use ops::{
    curl, dealiased_product, divergence, forward_transform, gradient, inner_product,
    inverse_transform, laplacian, leray_project, norm_sq, perp_grad, sample, GridValues,
    ProductKind,
};
