use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{Grid, TorusSpec};
use crate::error::{Error, Result};

/// Truncated Fourier representation of a real field on a torus.
///
/// Each component is a full `N^dim` coefficient array normalised so that the
/// zero mode is the spatial mean. Coefficients outside the 2/3 band are zero
/// and `c(-k) = conj(c(k))`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, ncomp: usize) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            comps: vec![vec![Complex64::default(); grid.len()]; ncomp],
        }
    }

    /// Builds a field from raw coefficient arrays. Modes outside the band are
    /// zeroed; conjugate symmetry is the caller's responsibility.
    pub fn from_coefficients(grid: &Arc<Grid>, mut comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Config(format!(
                "coefficient arrays must have {} entries",
                grid.len()
            )));
        }
        for c in comps.iter_mut() {
            for (idx, v) in c.iter_mut().enumerate() {
                if !grid.retained(idx) {
                    *v = Complex64::default();
                }
            }
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            comps,
        })
    }

    /// Field whose only nonzero modes are `k` (holding `value[c]` on component
    /// `c`) and its mirror `-k`.
    pub fn single_mode(
        grid: &Arc<Grid>,
        ncomp: usize,
        k: &[i64],
        value: &[Complex64],
    ) -> Result<Self> {
        let idx = grid
            .index_of(k)
            .filter(|&i| grid.retained(i))
            .ok_or_else(|| Error::Config(format!("wave vector {k:?} outside the retained band")))?;
        let mut f = SpectralField::zeros(grid, ncomp);
        let m = grid.mirror(idx);
        for (c, v) in value.iter().enumerate().take(ncomp) {
            if idx == m {
                f.comps[c][idx] = Complex64::new(v.re, 0.0);
            } else {
                f.comps[c][idx] = *v;
                f.comps[c][m] = v.conj();
            }
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn spec(&self) -> &TorusSpec {
        self.grid.spec()
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Coefficient of component `c` at integer wave vector `k`.
    pub fn coefficient(&self, c: usize, k: &[i64]) -> Option<Complex64> {
        self.grid.index_of(k).map(|idx| self.comps[c][idx])
    }

    /// Spatial mean of every component.
    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c[0].re).collect()
    }

    /// Copy with the zero mode of every component removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            c[0] = Complex64::default();
        }
        out
    }

    pub(crate) fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.spec() == other.spec() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "mismatched tori: {} vs {}",
                self.spec(),
                other.spec()
            )))
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) -> Result<()> {
        self.same_grid(other)?;
        if self.ncomp() != other.ncomp() {
            return Err(Error::Config("component count mismatch".into()));
        }
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Adds a constant vector to the zero mode.
    pub fn add_constant(&mut self, c: &[f64]) {
        for (comp, v) in self.comps.iter_mut().zip(c) {
            comp[0] += Complex64::new(*v, 0.0);
        }
    }

    /// `Σ_k Σ_c |ĉ(k)|²`, i.e. `‖f‖² / |Ω|`.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest `|ĉ(k) - conj ĉ(-k)|` over all modes.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for idx in 0..c.len() {
                let d = (c[idx] - c[self.grid.mirror(idx)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest coefficient magnitude outside the retained band.
    pub fn dealiased_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for (idx, v) in c.iter().enumerate() {
                if !self.grid.retained(idx) {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }

    /// `max_k |k·v̂(k)| / max_k |k||v̂(k)|`; zero for divergence-free fields.
    pub fn relative_divergence(&self) -> f64 {
        let dim = self.grid.dim();
        if self.ncomp() != dim {
            return f64::NAN;
        }
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let k = self.grid.k(idx);
            let mut div = Complex64::default();
            let mut mag = 0.0;
            for a in 0..dim {
                div += k[a] * self.comps[a][idx];
                mag += self.comps[a][idx].norm_sqr();
            }
            num = num.max(div.norm());
            den = den.max(self.grid.k2(idx).sqrt() * mag.sqrt());
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }
}
