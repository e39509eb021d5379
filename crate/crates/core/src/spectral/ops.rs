//! Transforms, differential operators, Leray projection and dealiased products.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real samples on the uniform `N^dim` grid, one array per component.
pub type GridValues = Vec<Vec<f64>>;

/// Samples a vector-valued function at the grid points.
pub fn sample<F>(grid: &Grid, ncomp: usize, f: F) -> GridValues
where
    F: Fn([f64; 3]) -> [f64; 3],
{
    let mut out = vec![vec![0.0; grid.len()]; ncomp];
    for idx in 0..grid.len() {
        let v = f(grid.point(idx));
        for (c, comp) in out.iter_mut().enumerate() {
            comp[idx] = v[c];
        }
    }
    out
}

/// Grid samples to mean-normalised, dealiased Fourier coefficients.
pub fn forward_transform(grid: &Arc<Grid>, samples: &[Vec<f64>]) -> Result<SpectralField> {
    if samples.is_empty() || samples.iter().any(|s| s.len() != grid.len()) {
        return Err(Error::Config(format!(
            "expected one or more sample arrays of length {} for {}",
            grid.len(),
            grid.spec()
        )));
    }
    let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
    SpectralField::from_coefficients(grid, grid.forward_many(&refs))
}

pub fn inverse_transform(field: &SpectralField) -> GridValues {
    let refs: Vec<&[Complex64]> = field.components().iter().map(|c| c.as_slice()).collect();
    field.grid().inverse_many(&refs)
}

/// Leray projection `v̂ - k (k·v̂)/|k|²`; the mean mode passes through.
pub fn leray_project(v: &SpectralField) -> SpectralField {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

pub(crate) fn leray_project_in_place(v: &mut SpectralField) {
    let grid = Arc::clone(v.grid());
    let dim = grid.dim();
    let comps = v.components_mut();
    for idx in 1..grid.len() {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            continue;
        }
        let k = grid.k(idx);
        let mut kv = Complex64::default();
        for a in 0..dim {
            kv += k[a] * comps[a][idx];
        }
        let s = kv / k2;
        for a in 0..dim {
            comps[a][idx] -= k[a] * s;
        }
    }
}

/// Curl. In 3-D a vector field; in 2-D the scalar `∂₁v₂ - ∂₂v₁`.
pub fn curl(v: &SpectralField) -> Result<SpectralField> {
    let grid = v.grid();
    let dim = grid.dim();
    if v.ncomp() != dim {
        return Err(Error::Usage(format!(
            "curl needs a {dim}-component field, got {}",
            v.ncomp()
        )));
    }
    let c = v.components();
    let n = grid.len();
    let out = if dim == 3 {
        let mut out = vec![vec![Complex64::default(); n]; 3];
        for idx in 0..n {
            let k = grid.k(idx);
            out[0][idx] = I * (k[1] * c[2][idx] - k[2] * c[1][idx]);
            out[1][idx] = I * (k[2] * c[0][idx] - k[0] * c[2][idx]);
            out[2][idx] = I * (k[0] * c[1][idx] - k[1] * c[0][idx]);
        }
        out
    } else {
        let mut out = vec![vec![Complex64::default(); n]; 1];
        for idx in 0..n {
            let k = grid.k(idx);
            out[0][idx] = I * (k[0] * c[1][idx] - k[1] * c[0][idx]);
        }
        out
    };
    SpectralField::from_coefficients(grid, out)
}

/// 2-D perpendicular gradient `∇⊥φ = (-∂₂φ, ∂₁φ)` of a scalar.
pub fn perp_grad(phi: &SpectralField) -> Result<SpectralField> {
    let grid = phi.grid();
    if grid.dim() != 2 || phi.ncomp() != 1 {
        return Err(Error::Usage("perp_grad needs a 2-D scalar field".into()));
    }
    let p = phi.component(0);
    let n = grid.len();
    let mut out = vec![vec![Complex64::default(); n]; 2];
    for idx in 0..n {
        let k = grid.k(idx);
        out[0][idx] = -I * k[1] * p[idx];
        out[1][idx] = I * k[0] * p[idx];
    }
    SpectralField::from_coefficients(grid, out)
}

pub fn gradient(phi: &SpectralField) -> Result<SpectralField> {
    if phi.ncomp() != 1 {
        return Err(Error::Usage("gradient needs a scalar field".into()));
    }
    let grid = phi.grid();
    let p = phi.component(0);
    let out = (0..grid.dim())
        .map(|a| (0..grid.len()).map(|idx| I * grid.k(idx)[a] * p[idx]).collect())
        .collect();
    SpectralField::from_coefficients(grid, out)
}

pub fn divergence(v: &SpectralField) -> Result<SpectralField> {
    let grid = v.grid();
    let dim = grid.dim();
    if v.ncomp() != dim {
        return Err(Error::Usage("divergence needs a vector field".into()));
    }
    let c = v.components();
    let out = (0..grid.len())
        .map(|idx| {
            let k = grid.k(idx);
            (0..dim).map(|a| I * k[a] * c[a][idx]).sum()
        })
        .collect();
    SpectralField::from_coefficients(grid, vec![out])
}

pub fn laplacian(v: &SpectralField) -> SpectralField {
    let grid = Arc::clone(v.grid());
    let mut out = v.clone();
    for c in out.components_mut() {
        for (idx, x) in c.iter_mut().enumerate() {
            *x *= -grid.k2(idx);
        }
    }
    out
}

/// `∫_Ω a·b` by Parseval.
pub fn inner_product(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.same_grid(b)?;
    if a.ncomp() != b.ncomp() {
        return Err(Error::Config("component count mismatch".into()));
    }
    let s: f64 = a
        .components()
        .iter()
        .zip(b.components())
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum();
    Ok(s * a.spec().volume())
}

pub fn norm_sq(a: &SpectralField) -> f64 {
    a.coefficient_norm_sq() * a.spec().volume()
}

/// Quadratic products evaluated on the physical grid and truncated to the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    /// `a × b`; scalar `a₁b₂ - a₂b₁` in 2-D.
    Cross,
    /// `(a·∇) b`.
    Advective,
    /// `∇·(a ⊗ b)`, component `i` = `Σ_j ∂_j(a_j b_i)`.
    TensorDivergence,
}

pub fn dealiased_product(
    a: &SpectralField,
    b: &SpectralField,
    kind: ProductKind,
) -> Result<SpectralField> {
    a.same_grid(b)?;
    let grid = a.grid();
    let dim = grid.dim();
    if a.ncomp() != dim {
        return Err(Error::Config(format!(
            "first operand must have {dim} components"
        )));
    }
    let pa = inverse_transform(a);
    let n = grid.len();
    match kind {
        ProductKind::Cross => {
            if b.ncomp() != dim {
                return Err(Error::Config("cross product needs two vector fields".into()));
            }
            let pb = inverse_transform(b);
            let prod = cross_samples(&pa, &pb);
            forward_transform(grid, &prod)
        }
        ProductKind::Advective => {
            let mut prod = vec![vec![0.0; n]; b.ncomp()];
            for c in 0..b.ncomp() {
                let single = SpectralField::from_coefficients(grid, vec![b.component(c).to_vec()])?;
                let grad = inverse_transform(&gradient(&single)?);
                for (idx, p) in prod[c].iter_mut().enumerate() {
                    *p = (0..dim).map(|j| pa[j][idx] * grad[j][idx]).sum();
                }
            }
            forward_transform(grid, &prod)
        }
        ProductKind::TensorDivergence => {
            let pb = inverse_transform(b);
            let mut out = vec![vec![Complex64::default(); n]; b.ncomp()];
            for j in 0..dim {
                let flux: Vec<Vec<f64>> = pb
                    .iter()
                    .map(|bi| bi.iter().zip(&pa[j]).map(|(x, y)| x * y).collect())
                    .collect();
                let hat = forward_transform(grid, &flux)?;
                for (c, o) in out.iter_mut().enumerate() {
                    for (idx, x) in o.iter_mut().enumerate() {
                        *x += I * grid.k(idx)[j] * hat.component(c)[idx];
                    }
                }
            }
            SpectralField::from_coefficients(grid, out)
        }
    }
}

/// Pointwise cross product of sampled fields (scalar in 2-D).
pub(crate) fn cross_samples(a: &[Vec<f64>], b: &[Vec<f64>]) -> GridValues {
    let n = a[0].len();
    if a.len() == 3 {
        let mut out = vec![vec![0.0; n]; 3];
        for idx in 0..n {
            out[0][idx] = a[1][idx] * b[2][idx] - a[2][idx] * b[1][idx];
            out[1][idx] = a[2][idx] * b[0][idx] - a[0][idx] * b[2][idx];
            out[2][idx] = a[0][idx] * b[1][idx] - a[1][idx] * b[0][idx];
        }
        out
    } else {
        vec![(0..n)
            .map(|idx| a[0][idx] * b[1][idx] - a[1][idx] * b[0][idx])
            .collect()]
    }
}
