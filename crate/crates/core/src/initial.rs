//! Deterministic initial data presets.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::MhdState;
use crate::spectral::{forward_transform, leray_project, norm_sq, sample, Grid, SpectralField};

pub const PRESETS: [&str; 3] = ["beltrami-abc", "orszag-tang-like", "random-solenoidal"];

/// Preset id plus parameters. Unused parameters are ignored by a preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub preset: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Per-mode amplitude falls off as `|k|^-spectral_slope`.
    #[serde(default = "default_slope")]
    pub spectral_slope: f64,
    /// Largest integer `|k|` excited by `random-solenoidal`.
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    /// Target `½‖u‖²` for `random-solenoidal`.
    #[serde(default = "default_energy")]
    pub u_energy: f64,
    /// Target `½‖b - mean b‖²` for `random-solenoidal`.
    #[serde(default = "default_energy")]
    pub b_energy: f64,
    /// Prescribed mean of `b`, applied last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_mean: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}
fn default_slope() -> f64 {
    2.0
}
fn default_k_max() -> f64 {
    3.0
}
fn default_energy() -> f64 {
    0.5
}

impl InitialData {
    pub fn preset(name: &str) -> Self {
        InitialData {
            preset: name.to_string(),
            amplitude: 1.0,
            seed: 0,
            spectral_slope: default_slope(),
            k_max: default_k_max(),
            u_energy: default_energy(),
            b_energy: default_energy(),
            b_mean: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_b_mean(mut self, mean: Vec<f64>) -> Self {
        self.b_mean = Some(mean);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.preset.as_str() {
            "beltrami-abc" if dim != 3 => {
                return Err(Error::Usage("beltrami-abc is a 3-D preset".into()))
            }
            "beltrami-abc" | "orszag-tang-like" | "random-solenoidal" => {}
            other => {
                return Err(Error::Usage(format!(
                    "unknown preset '{other}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        }
        if let Some(m) = &self.b_mean {
            if m.len() != dim {
                return Err(Error::Config(format!(
                    "b_mean must have {dim} components"
                )));
            }
        }
        if !self.amplitude.is_finite() || self.u_energy < 0.0 || self.b_energy < 0.0 {
            return Err(Error::Config("initial-data amplitudes must be finite and non-negative".into()));
        }
        if !(self.k_max >= 1.0) {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// ABC field `(sin z + cos y, sin x + cos z, sin y + cos x)`, a curl eigenfield
/// with eigenvalue 1 (integer units).
pub fn abc_sample(x: [f64; 3], k0: f64) -> [f64; 3] {
    let (x, y, z) = (k0 * x[0], k0 * x[1], k0 * x[2]);
    [z.sin() + y.cos(), x.sin() + z.cos(), y.sin() + x.cos()]
}

pub fn make_initial_data(grid: &Arc<Grid>, data: &InitialData) -> Result<MhdState> {
    let dim = grid.dim();
    data.validate(dim)?;
    let k0 = grid.spec().base_wavenumber();
    let a = data.amplitude;
    let (u, b) = match data.preset.as_str() {
        "beltrami-abc" => {
            let b = forward_transform(grid, &sample(grid, 3, |x| {
                let v = abc_sample(x, k0);
                [a * v[0], a * v[1], a * v[2]]
            }))?;
            (SpectralField::zeros(grid, 3), b)
        }
        "orszag-tang-like" => orszag_tang_like(grid, a)?,
        "random-solenoidal" => {
            let mut rng = ChaCha8Rng::seed_from_u64(data.seed);
            let u = random_solenoidal(grid, &mut rng, data.spectral_slope, data.k_max, data.u_energy);
            let b = random_solenoidal(grid, &mut rng, data.spectral_slope, data.k_max, data.b_energy);
            (u, b)
        }
        _ => unreachable!("validated"),
    };
    // every preset is mean-free analytically; drop sampling roundoff
    let (u, mut b) = (u.without_mean(), b.without_mean());
    if let Some(mean) = &data.b_mean {
        // mean mode is written last so the prescription is exact
        for (c, m) in b.components_mut().iter_mut().zip(mean) {
            c[0] = Complex64::new(*m, 0.0);
        }
    }
    MhdState::new(u, b, 0.0)
}

/// Orszag–Tang style trigonometric data. 2-D: `u = (-sin y, sin x)`,
/// `b = (-sin y, sin 2x)`. 3-D: same velocity with `u_z = 0` and
/// `b = (-sin 2y + sin z, sin x + cos z, 0)`, which carries nonzero helicity.
fn orszag_tang_like(grid: &Arc<Grid>, a: f64) -> Result<(SpectralField, SpectralField)> {
    let k0 = grid.spec().base_wavenumber();
    let dim = grid.dim();
    let u = forward_transform(
        grid,
        &sample(grid, dim, |x| [-a * (k0 * x[1]).sin(), a * (k0 * x[0]).sin(), 0.0]),
    )?;
    let b = if dim == 2 {
        forward_transform(
            grid,
            &sample(grid, 2, |x| {
                [-a * (k0 * x[1]).sin(), a * (2.0 * k0 * x[0]).sin(), 0.0]
            }),
        )?
    } else {
        forward_transform(
            grid,
            &sample(grid, 3, |x| {
                let (x, y, z) = (k0 * x[0], k0 * x[1], k0 * x[2]);
                [a * (-(2.0 * y).sin() + z.sin()), a * (x.sin() + z.cos()), 0.0]
            }),
        )?
    };
    Ok((u, b))
}

/// Seeded random solenoidal field with zero mean, modes `0 < |k| ≤ k_max`
/// weighted by `|k|^-slope`, normalised to `½‖v‖² = energy`.
pub fn random_solenoidal<R: rand::Rng>(
    grid: &Arc<Grid>,
    rng: &mut R,
    slope: f64,
    k_max: f64,
    energy: f64,
) -> SpectralField {
    let dim = grid.dim();
    let n = grid.len();
    let mut raw = vec![vec![Complex64::default(); n]; dim];
    // draw in flat-index order for reproducibility, then symmetrise
    for idx in 1..n {
        let k = grid.wave_vector(idx);
        let kn = (k.iter().map(|c| (c * c) as f64).sum::<f64>()).sqrt();
        let keep = grid.retained(idx) && kn <= k_max;
        for comp in raw.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            if keep {
                comp[idx] = Complex64::new(re, im) * kn.powf(-slope);
            }
        }
    }
    let mut sym = vec![vec![Complex64::default(); n]; dim];
    for (s, r) in sym.iter_mut().zip(&raw) {
        for idx in 0..n {
            s[idx] = 0.5 * (r[idx] + r[grid.mirror(idx)].conj());
        }
    }
    let mut v = leray_project(
        &SpectralField::from_coefficients(grid, sym).expect("grid-sized arrays"),
    );
    let e = 0.5 * norm_sq(&v);
    if e > 0.0 {
        v.scale((energy / e).sqrt());
    }
    v
}

/// Adds `amplitude · √2 · sin(k x_last)` to the first velocity component:
/// a divergence-free shear of fixed `L²` norm `amplitude · |Ω|^½`.
pub fn add_shear_perturbation(state: &mut MhdState, k: i64, amplitude: f64) -> Result<()> {
    let grid = Arc::clone(state.grid());
    let spec = *grid.spec();
    if k < 1 || k > spec.max_retained() {
        return Err(Error::Config(format!(
            "perturbation wavenumber {k} outside the retained band 1..={}",
            spec.max_retained()
        )));
    }
    let dim = spec.dim;
    let k0 = spec.base_wavenumber();
    let s = amplitude * std::f64::consts::SQRT_2;
    let p = forward_transform(
        &grid,
        &sample(&grid, dim, |x| [s * (k as f64 * k0 * x[dim - 1]).sin(), 0.0, 0.0]),
    )?;
    state.u.axpy(1.0, &p)
}
