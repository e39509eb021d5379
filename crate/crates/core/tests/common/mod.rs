#![allow(dead_code)]

use std::sync::Arc;

use hlx::spectral::{Grid, ProductKind, SpectralField, TorusSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid(dim: usize, n: usize) -> Arc<Grid> {
    Grid::new(TorusSpec::new(dim, n).unwrap()).unwrap()
}

/// Random real field (conjugate-symmetric coefficients) with modes
/// `|k_i| ≤ kmax`, not necessarily divergence-free.
pub fn random_field(grid: &Arc<Grid>, ncomp: usize, kmax: i64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let mut comps = vec![vec![Complex64::default(); n]; ncomp];
    for c in comps.iter_mut() {
        for (idx, v) in c.iter_mut().enumerate() {
            let k = grid.wave_vector(idx);
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            if k.iter().all(|&ki| ki.abs() <= kmax) && grid.retained(idx) {
                *v = Complex64::new(re, im);
            }
        }
        let raw = c.clone();
        for idx in 0..n {
            c[idx] = 0.5 * (raw[idx] + raw[grid.mirror(idx)].conj());
        }
    }
    SpectralField::from_coefficients(grid, comps).unwrap()
}

pub fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let d = a.sub(b).unwrap().coefficient_norm_sq().sqrt();
    let s = a.coefficient_norm_sq().sqrt().max(b.coefficient_norm_sq().sqrt());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// `∫ a·b` by direct summation over the physical grid.
pub fn grid_quadrature(a: &[Vec<f64>], b: &[Vec<f64>], volume: f64) -> f64 {
    let n = a[0].len();
    let s: f64 = a
        .iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q))
        .sum();
    s * volume / n as f64
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Exact product coefficients by direct convolution over retained modes,
/// truncated back to the band.
pub fn convolution_oracle(a: &SpectralField, b: &SpectralField, kind: ProductKind) -> Vec<Vec<Complex64>> {
    let g = a.grid();
    let dim = g.dim();
    let modes: Vec<usize> = (0..g.len()).filter(|&i| g.retained(i)).collect();
    let ncomp_out = match kind {
        ProductKind::Cross if dim == 2 => 1,
        ProductKind::Cross => 3,
        _ => b.ncomp(),
    };
    let mut out = vec![vec![Complex64::default(); g.len()]; ncomp_out];
    for &p in &modes {
        for &q in &modes {
            let kp = g.wave_vector(p);
            let kq = g.wave_vector(q);
            let k: Vec<i64> = (0..dim).map(|i| kp[i] + kq[i]).collect();
            let Some(idx) = g.index_of(&k).filter(|&i| g.retained(i)) else {
                continue;
            };
            let av = |c: usize| a.component(c)[p];
            let bv = |c: usize| b.component(c)[q];
            match kind {
                ProductKind::Cross if dim == 3 => {
                    out[0][idx] += av(1) * bv(2) - av(2) * bv(1);
                    out[1][idx] += av(2) * bv(0) - av(0) * bv(2);
                    out[2][idx] += av(0) * bv(1) - av(1) * bv(0);
                }
                ProductKind::Cross => out[0][idx] += av(0) * bv(1) - av(1) * bv(0),
                ProductKind::Advective => {
                    let qk = g.k(q);
                    for c in 0..b.ncomp() {
                        for j in 0..dim {
                            out[c][idx] += av(j) * I * qk[j] * bv(c);
                        }
                    }
                }
                ProductKind::TensorDivergence => {
                    let kk = g.k(idx);
                    for c in 0..b.ncomp() {
                        for j in 0..dim {
                            out[c][idx] += I * kk[j] * av(j) * bv(c);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn max_coeff_diff(x: &[Vec<Complex64>], y: &[Vec<Complex64>]) -> f64 {
    x.iter()
        .zip(y)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max)
}

