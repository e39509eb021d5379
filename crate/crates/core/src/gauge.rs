//! Decomposition of divergence-free fields into a curl-range part and a
//! harmonic part, Coulomb-gauge potentials, 2-D stream functions and the
//! gauge-shift arithmetic of magnetic helicity.
//!
//! On a torus the harmonic fields (curl-free and divergence-free) are exactly
//! the constants, so the harmonic part of `b` is its spatial mean. Constants
//! have no periodic vector potential: their contribution to `∫ψ·b` enters only
//! through an explicit constant gauge shift added to the Coulomb potential.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{inner_product, norm_sq, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative divergence accepted as "divergence-free".
pub const DIVERGENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GaugeDecomposition {
    /// Zero-mean, divergence-free part (the range of curl).
    pub sigma_part: SpectralField,
    /// Spatial mean of the input, the harmonic part.
    pub harmonic_part: Vec<f64>,
    /// Coulomb-gauge potential with `curl ψ = sigma_part` (3-D only).
    pub potential: Option<SpectralField>,
}

impl GaugeDecomposition {
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = self.sigma_part.clone();
        out.add_constant(&self.harmonic_part);
        out
    }
}

fn require_solenoidal(b: &SpectralField) -> Result<()> {
    let dim = b.grid().dim();
    if b.ncomp() != dim {
        return Err(Error::Precondition(format!(
            "expected a {dim}-component vector field"
        )));
    }
    let div = b.relative_divergence();
    if div > DIVERGENCE_TOLERANCE {
        return Err(Error::Precondition(format!(
            "field is not divergence-free (relative divergence {div:.3e})"
        )));
    }
    Ok(())
}

pub fn decompose(b: &SpectralField) -> Result<GaugeDecomposition> {
    require_solenoidal(b)?;
    let sigma_part = b.without_mean();
    let potential = if b.grid().dim() == 3 {
        Some(coulomb_potential(&sigma_part)?)
    } else {
        None
    };
    Ok(GaugeDecomposition {
        harmonic_part: b.mean(),
        sigma_part,
        potential,
    })
}

/// Projection onto the zero-mean (curl-range) subspace.
pub fn project_sigma(b: &SpectralField) -> SpectralField {
    b.without_mean()
}

/// Projection onto the harmonic (constant) subspace.
pub fn project_harmonic(b: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(b.grid(), b.ncomp());
    out.add_constant(&b.mean());
    out
}

/// Coulomb-gauge vector potential `ψ̂ = i k × b̂ / |k|²`, `ψ̂(0) = 0`.
pub fn coulomb_potential(b_sigma: &SpectralField) -> Result<SpectralField> {
    let grid = b_sigma.grid();
    if grid.dim() != 3 {
        return Err(Error::Usage(
            "vector potentials are 3-D; use stream_function in 2-D".into(),
        ));
    }
    require_solenoidal(b_sigma)?;
    let scale = b_sigma.max_abs_coefficient().max(f64::MIN_POSITIVE);
    if b_sigma.mean().iter().any(|m| m.abs() > 1e-14 * scale) {
        return Err(Error::Precondition(
            "a field with nonzero mean has no periodic vector potential".into(),
        ));
    }
    let c = b_sigma.components();
    let n = grid.len();
    let mut out = vec![vec![Complex64::default(); n]; 3];
    for idx in 1..n {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            continue;
        }
        let k = grid.k(idx);
        let s = I / k2;
        out[0][idx] = s * (k[1] * c[2][idx] - k[2] * c[1][idx]);
        out[1][idx] = s * (k[2] * c[0][idx] - k[0] * c[2][idx]);
        out[2][idx] = s * (k[0] * c[1][idx] - k[1] * c[0][idx]);
    }
    SpectralField::from_coefficients(grid, out)
}

/// Zero-mean stream function `φ` with `-∇⊥φ = b - mean(b)`.
pub fn stream_function(b: &SpectralField) -> Result<SpectralField> {
    let grid = b.grid();
    if grid.dim() != 2 {
        return Err(Error::Usage("stream functions are defined in 2-D only".into()));
    }
    require_solenoidal(b)?;
    let c = b.components();
    let n = grid.len();
    let mut phi = vec![Complex64::default(); n];
    for (idx, p) in phi.iter_mut().enumerate().skip(1) {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            continue;
        }
        let k = grid.k(idx);
        *p = I * (k[0] * c[1][idx] - k[1] * c[0][idx]) / k2;
    }
    SpectralField::from_coefficients(grid, vec![phi])
}

/// Magnetic helicity `∫(ψ + shift)·b` with `ψ` the Coulomb potential of the
/// zero-mean part of `b`.
pub fn helicity(b: &SpectralField, gauge_shift: &[f64]) -> Result<f64> {
    let grid = b.grid();
    if grid.dim() != 3 {
        return Err(Error::Usage("magnetic helicity is a 3-D quantity".into()));
    }
    if gauge_shift.len() != 3 {
        return Err(Error::Usage("gauge shift must have 3 components".into()));
    }
    let dec = decompose(b)?;
    let psi = dec.potential.as_ref().expect("3-D decomposition carries a potential");
    let coulomb = inner_product(psi, b)?;
    let shift: f64 = gauge_shift
        .iter()
        .zip(&dec.harmonic_part)
        .map(|(c, h)| c * h)
        .sum();
    Ok(coulomb + shift * b.spec().volume())
}

/// Mean-square magnetic potential `∫φ²` (2-D).
pub fn mean_square_potential(b: &SpectralField) -> Result<f64> {
    if b.grid().dim() != 2 {
        return Err(Error::Usage(
            "mean-square potential is defined in 2-D only".into(),
        ));
    }
    Ok(norm_sq(&stream_function(b)?))
}
