//! Torus geometry, wavenumber tables and cached FFT plans.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat periodic box `[0, L)^dim` resolved with `N` grid points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub dim: usize,
    #[serde(default = "default_side")]
    pub side_length: f64,
    pub modes_per_axis: usize,
}

fn default_side() -> f64 {
    2.0 * PI
}

impl TorusSpec {
    /// Torus of side `2π`.
    pub fn new(dim: usize, modes_per_axis: usize) -> Result<Self> {
        Self::with_side(dim, 2.0 * PI, modes_per_axis)
    }

    pub fn with_side(dim: usize, side_length: f64, modes_per_axis: usize) -> Result<Self> {
        let spec = TorusSpec {
            dim,
            side_length,
            modes_per_axis,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Config(format!(
                "dim must be 2 or 3, got {}",
                self.dim
            )));
        }
        if self.modes_per_axis < 4 || self.modes_per_axis % 2 != 0 {
            return Err(Error::Config(format!(
                "modes_per_axis must be even and at least 4, got {}",
                self.modes_per_axis
            )));
        }
        if !(self.side_length.is_finite() && self.side_length > 0.0) {
            return Err(Error::Config("side_length must be positive".into()));
        }
        Ok(())
    }

    /// `|Ω| = L^dim`.
    pub fn volume(&self) -> f64 {
        self.side_length.powi(self.dim as i32)
    }

    pub fn points(&self) -> usize {
        self.modes_per_axis.pow(self.dim as u32)
    }

    /// Largest retained `|k_i|` (integer units) under the 2/3 rule: `3|k_i| < N`.
    pub fn max_retained(&self) -> i64 {
        ((self.modes_per_axis as i64) - 1) / 3
    }

    /// Integer wavenumber carried by FFT index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.modes_per_axis;
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// `2π / L`: physical wavenumber of integer mode 1.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.side_length
    }

    pub fn is_retained(&self, k: &[i64]) -> bool {
        let kmax = self.max_retained();
        k.iter().all(|&ki| ki.abs() <= kmax)
    }
}

impl fmt::Display for TorusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "T^{} (L = {}, N = {})",
            self.dim, self.side_length, self.modes_per_axis
        )
    }
}

/// Precomputed mode tables and FFT plans for one [`TorusSpec`].
///
/// Storage is row-major with axis 0 (x) slowest; along every axis index `i`
/// carries wavenumber `i` for `i < N/2` and `i - N` otherwise.
pub struct Grid {
    spec: TorusSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kint: Vec<[i64; 3]>,
    kvec: Vec<[f64; 3]>,
    k2: Vec<f64>,
    retained: Vec<bool>,
    mirror: Vec<usize>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: TorusSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let n = spec.modes_per_axis;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let total = spec.points();
        let k0 = spec.base_wavenumber();

        let mut kint = Vec::with_capacity(total);
        let mut kvec = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let mut retained = Vec::with_capacity(total);
        let mut mirror = Vec::with_capacity(total);
        for idx in 0..total {
            let ijk = unravel(idx, n, spec.dim);
            let mut ki = [0i64; 3];
            let mut kv = [0.0; 3];
            let mut neg = 0usize;
            for a in 0..spec.dim {
                ki[a] = spec.wavenumber(ijk[a]);
                kv[a] = k0 * ki[a] as f64;
                neg = neg * n + (n - ijk[a]) % n;
            }
            kint.push(ki);
            kvec.push(kv);
            k2.push(kv.iter().map(|x| x * x).sum());
            retained.push(spec.is_retained(&ki[..spec.dim]));
            mirror.push(neg);
        }
        Ok(Arc::new(Grid {
            spec,
            fwd,
            inv,
            kint,
            kvec,
            k2,
            retained,
            mirror,
        }))
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn len(&self) -> usize {
        self.kint.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kint.is_empty()
    }

    /// Integer wave vector at flat index `idx` (unused axes are 0).
    pub fn wave_vector(&self, idx: usize) -> [i64; 3] {
        self.kint[idx]
    }

    /// Physical wave vector `2π k / L`.
    pub fn k(&self, idx: usize) -> &[f64; 3] {
        &self.kvec[idx]
    }

    pub fn k2(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    pub fn retained(&self, idx: usize) -> bool {
        self.retained[idx]
    }

    /// Flat index of `-k`.
    pub fn mirror(&self, idx: usize) -> usize {
        self.mirror[idx]
    }

    /// Flat index of an integer wave vector, if it lies on the grid.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let n = self.spec.modes_per_axis as i64;
        if k.len() != self.spec.dim {
            return None;
        }
        let mut idx = 0usize;
        for &ki in k {
            if ki < -n / 2 || ki >= n / 2 {
                return None;
            }
            idx = idx * n as usize + ki.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.spec.modes_per_axis;
        let h = self.spec.side_length / n as f64;
        let ijk = unravel(idx, n, self.spec.dim);
        let mut x = [0.0; 3];
        for a in 0..self.spec.dim {
            x[a] = ijk[a] as f64 * h;
        }
        x
    }

    /// Unnormalised in-place multidimensional DFT.
    pub(crate) fn fft(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.spec.modes_per_axis;
        let dim = self.spec.dim;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];

        // Contiguous last axis.
        plan.process_with_scratch(data, &mut scratch);

        let total = data.len();
        let mut lines = vec![Complex64::default(); total];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            // Gather every line along `axis` into contiguous storage.
            let mut line = 0;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    let dst = &mut lines[line * n..(line + 1) * n];
                    for (j, d) in dst.iter_mut().enumerate() {
                        *d = data[start + j * stride];
                    }
                    line += 1;
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            let mut line = 0;
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    let src = &lines[line * n..(line + 1) * n];
                    for (j, s) in src.iter().enumerate() {
                        data[start + j * stride] = *s;
                    }
                    line += 1;
                }
            }
        }
    }

    /// Real samples of two fields from their (conjugate-symmetric) spectra,
    /// using one complex transform.
    pub(crate) fn inverse_pair(
        &self,
        a: &[Complex64],
        b: Option<&[Complex64]>,
    ) -> (Vec<f64>, Option<Vec<f64>>) {
        let i = Complex64::new(0.0, 1.0);
        let mut z: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(x, y)| x + i * y).collect(),
            None => a.to_vec(),
        };
        self.fft(&mut z, true);
        let re = z.iter().map(|c| c.re).collect();
        let im = b.map(|_| z.iter().map(|c| c.im).collect());
        (re, im)
    }

    /// Mean-normalised, dealiased spectra of two real sample arrays.
    pub(crate) fn forward_pair(
        &self,
        a: &[f64],
        b: Option<&[f64]>,
    ) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
        let scale = 1.0 / self.len() as f64;
        let mut z: Vec<Complex64> = match b {
            Some(b) => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        self.fft(&mut z, false);
        let total = self.len();
        let mut ahat = vec![Complex64::default(); total];
        let mut bhat = b.map(|_| vec![Complex64::default(); total]);
        for idx in 0..total {
            if !self.retained[idx] {
                continue;
            }
            let zk = z[idx];
            let zm = z[self.mirror[idx]].conj();
            match bhat.as_mut() {
                Some(bh) => {
                    ahat[idx] = 0.5 * (zk + zm) * scale;
                    bh[idx] = Complex64::new(0.0, -0.5) * (zk - zm) * scale;
                }
                None => ahat[idx] = 0.5 * (zk + zm) * scale,
            }
        }
        (ahat, bhat)
    }

    /// Inverse transform of several spectra, two at a time.
    pub(crate) fn inverse_many(&self, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(comps.len());
        for pair in comps.chunks(2) {
            let (a, b) = self.inverse_pair(pair[0], pair.get(1).copied());
            out.push(a);
            if let Some(b) = b {
                out.push(b);
            }
        }
        out
    }

    /// Forward transform of several real arrays, two at a time.
    pub(crate) fn forward_many(&self, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(comps.len());
        for pair in comps.chunks(2) {
            let (a, b) = self.forward_pair(pair[0], pair.get(1).copied());
            out.push(a);
            if let Some(b) = b {
                out.push(b);
            }
        }
        out
    }
}

fn unravel(mut idx: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut ijk = [0usize; 3];
    for a in (0..dim).rev() {
        ijk[a] = idx % n;
        idx /= n;
    }
    ijk
}
