//! Galerkin-truncated viscous, resistive MHD on periodic tori.
//!
//! ```text
//! ∂t u = P[-(u·∇)u + (b·∇)b] + νΔu
//! ∂t b = curl(u × b) + μΔb
//! ```
//!
//! `P` is the Leray projection, which removes the pressure. The nonlinear
//! terms are evaluated pseudo-spectrally in divergence form,
//! `(u·∇)u - (b·∇)b = ∇·(u⊗u - b⊗b)`, and the stiff diffusion is integrated
//! exactly with an integrating factor inside classical RK4.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    cross_samples, curl, inverse_transform, laplacian, leray_project_in_place, Grid,
    SpectralField,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Velocity and magnetic field at time `t`.
#[derive(Debug, Clone)]
pub struct MhdState {
    pub u: SpectralField,
    pub b: SpectralField,
    pub t: f64,
}

impl MhdState {
    pub fn new(u: SpectralField, b: SpectralField, t: f64) -> Result<Self> {
        u.same_grid(&b)?;
        let dim = u.grid().dim();
        if u.ncomp() != dim || b.ncomp() != dim {
            return Err(Error::Config(format!(
                "state fields must have {dim} components"
            )));
        }
        Ok(MhdState { u, b, t })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let dim = grid.dim();
        MhdState {
            u: SpectralField::zeros(grid, dim),
            b: SpectralField::zeros(grid, dim),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    /// Largest pointwise `|u| + |b|` on the grid.
    pub fn max_signal_speed(&self) -> f64 {
        let pu = inverse_transform(&self.u);
        let pb = inverse_transform(&self.b);
        let n = pu[0].len();
        (0..n)
            .map(|i| {
                let u2: f64 = pu.iter().map(|c| c[i] * c[i]).sum();
                let b2: f64 = pb.iter().map(|c| c[i] * c[i]).sum();
                u2.sqrt() + b2.sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoTag {
    Auto,
}

/// Time-step rule: a fixed step or `"auto"` (advective CFL).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtRule {
    Fixed(f64),
    #[serde(with = "auto_dt")]
    Auto,
}

mod auto_dt {
    use super::AutoTag;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        AutoTag::Auto.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        AutoTag::deserialize(d).map(|_| ())
    }
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Viscosity ν.
    pub nu: f64,
    /// Resistivity μ.
    pub mu: f64,
    pub dt: DtRule,
    pub t_end: f64,
    pub record_every: f64,
    /// Advective Courant number used by [`DtRule::Auto`].
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

impl SolverConfig {
    pub fn new(nu: f64, mu: f64, dt: f64, t_end: f64, record_every: f64) -> Self {
        SolverConfig {
            nu,
            mu,
            dt: DtRule::Fixed(dt),
            t_end,
            record_every,
            cfl: default_cfl(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Config("nu must be non-negative".into()));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config("mu must be non-negative".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("t_end must be non-negative".into()));
        }
        if !(self.record_every > 0.0 && self.record_every.is_finite()) {
            return Err(Error::Config("record_every must be positive".into()));
        }
        if let DtRule::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config("dt must be positive".into()));
            }
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::Config("cfl must be positive".into()));
        }
        Ok(())
    }

    /// Largest step allowed by the advective CFL condition for `state`.
    pub fn cfl_step(&self, state: &MhdState) -> f64 {
        let spec = state.grid().spec();
        let speed = state.max_signal_speed();
        if speed == 0.0 {
            return f64::INFINITY;
        }
        self.cfl * 2.0 * spec.side_length / (spec.modes_per_axis as f64 * speed)
    }
}

/// Nonlinear tendencies of the Galerkin system (no diffusion).
fn nonlinear(state: &MhdState) -> (SpectralField, SpectralField) {
    let grid = state.grid();
    let dim = grid.dim();
    let n = grid.len();
    let pu = inverse_transform(&state.u);
    let pb = inverse_transform(&state.b);

    // Symmetric stress u⊗u - b⊗b, upper triangle, then the electric field u×b.
    let mut pairs = Vec::with_capacity(dim * (dim + 1) / 2);
    let mut products: Vec<Vec<f64>> = Vec::with_capacity(dim * (dim + 1) / 2 + dim);
    for i in 0..dim {
        for j in i..dim {
            pairs.push((i, j));
            products.push(
                (0..n)
                    .map(|x| pu[i][x] * pu[j][x] - pb[i][x] * pb[j][x])
                    .collect(),
            );
        }
    }
    let nstress = products.len();
    products.extend(cross_samples(&pu, &pb));
    let refs: Vec<&[f64]> = products.iter().map(|p| p.as_slice()).collect();
    let hats = grid.forward_many(&refs);

    let mut du = vec![vec![Complex64::default(); n]; dim];
    for (s, &(i, j)) in pairs.iter().enumerate() {
        let t = &hats[s];
        for idx in 0..n {
            let k = grid.k(idx);
            // -∂_j T_ij
            du[i][idx] -= I * k[j] * t[idx];
            if i != j {
                du[j][idx] -= I * k[i] * t[idx];
            }
        }
    }
    let e = &hats[nstress..];
    let mut db = vec![vec![Complex64::default(); n]; dim];
    for idx in 0..n {
        let k = grid.k(idx);
        if dim == 3 {
            db[0][idx] = I * (k[1] * e[2][idx] - k[2] * e[1][idx]);
            db[1][idx] = I * (k[2] * e[0][idx] - k[0] * e[2][idx]);
            db[2][idx] = I * (k[0] * e[1][idx] - k[1] * e[0][idx]);
        } else {
            // curl of (0, 0, E): (∂₂E, -∂₁E)
            db[0][idx] = I * k[1] * e[0][idx];
            db[1][idx] = -I * k[0] * e[0][idx];
        }
    }
    let mut du = SpectralField::from_coefficients(grid, du).expect("grid-sized arrays");
    leray_project_in_place(&mut du);
    let db = SpectralField::from_coefficients(grid, db).expect("grid-sized arrays");
    (du, db)
}

/// Full right-hand side `(∂t u, ∂t b)`.
pub fn rhs(state: &MhdState, cfg: &SolverConfig) -> (SpectralField, SpectralField) {
    let (mut du, mut db) = nonlinear(state);
    du.axpy(cfg.nu, &laplacian(&state.u)).expect("same grid");
    db.axpy(cfg.mu, &laplacian(&state.b)).expect("same grid");
    (du, db)
}

/// `x ← f(idx) * x` mode-wise.
fn apply_factor(field: &mut SpectralField, factor: &[f64]) {
    for c in field.components_mut() {
        for (x, f) in c.iter_mut().zip(factor) {
            *x *= *f;
        }
    }
}

fn decay_factors(grid: &Grid, coeff: f64, dt: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| (-coeff * grid.k2(idx) * dt).exp())
        .collect()
}

/// One integrating-factor RK4 step of size `dt`.
pub fn step_with(state: &MhdState, cfg: &SolverConfig, dt: f64) -> Result<MhdState> {
    let grid = Arc::clone(state.grid());
    let eu = decay_factors(&grid, cfg.nu, 0.5 * dt);
    let eb = decay_factors(&grid, cfg.mu, 0.5 * dt);

    // y ↦ E y for both fields
    let half = |u: &mut SpectralField, b: &mut SpectralField| {
        apply_factor(u, &eu);
        apply_factor(b, &eb);
    };

    let (k1u, k1b) = nonlinear(state);

    let mut ua = state.u.clone();
    let mut ba = state.b.clone();
    ua.axpy(0.5 * dt, &k1u)?;
    ba.axpy(0.5 * dt, &k1b)?;
    half(&mut ua, &mut ba);
    let (k2u, k2b) = nonlinear(&MhdState { u: ua, b: ba, t: state.t + 0.5 * dt });

    let mut eu_y = state.u.clone();
    let mut eb_y = state.b.clone();
    half(&mut eu_y, &mut eb_y);
    let mut ub = eu_y.clone();
    let mut bb = eb_y.clone();
    ub.axpy(0.5 * dt, &k2u)?;
    bb.axpy(0.5 * dt, &k2b)?;
    let (k3u, k3b) = nonlinear(&MhdState { u: ub, b: bb, t: state.t + 0.5 * dt });

    // E² y + dt E k3
    let mut uc = eu_y.clone();
    let mut bc = eb_y.clone();
    uc.axpy(dt, &k3u)?;
    bc.axpy(dt, &k3b)?;
    half(&mut uc, &mut bc);
    let (k4u, k4b) = nonlinear(&MhdState { u: uc, b: bc, t: state.t + dt });

    // y' = E²y + dt/6 (E²k1 + 2E(k2 + k3) + k4)
    let mut u = state.u.clone();
    let mut b = state.b.clone();
    u.axpy(dt / 6.0, &k1u)?;
    b.axpy(dt / 6.0, &k1b)?;
    half(&mut u, &mut b);
    u.axpy(dt / 3.0, &k2u)?;
    b.axpy(dt / 3.0, &k2b)?;
    u.axpy(dt / 3.0, &k3u)?;
    b.axpy(dt / 3.0, &k3b)?;
    half(&mut u, &mut b);
    u.axpy(dt / 6.0, &k4u)?;
    b.axpy(dt / 6.0, &k4b)?;

    let t = state.t + dt;
    if !(u.is_finite() && b.is_finite()) {
        return Err(Error::Diverged { t });
    }
    Ok(MhdState { u, b, t })
}

/// One step using the configured rule; `"auto"` takes the CFL-limited step.
pub fn step(state: &MhdState, cfg: &SolverConfig) -> Result<MhdState> {
    let dt = match cfg.dt {
        DtRule::Fixed(dt) => dt,
        DtRule::Auto => {
            let dt = cfg.cfl_step(state);
            if !dt.is_finite() {
                cfg.record_every
            } else {
                dt
            }
        }
    };
    step_with(state, cfg, dt)
}

/// Receives the state at every recording time.
pub trait Observer {
    fn observe(&mut self, state: &MhdState) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&MhdState) -> Result<()>,
{
    fn observe(&mut self, state: &MhdState) -> Result<()> {
        self(state)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: MhdState,
    pub steps: usize,
    pub records: usize,
    /// Smallest step taken.
    pub min_dt: f64,
}

/// Recording times `0, r, 2r, …, t_end` (the last interval may be shorter).
pub fn record_times(cfg: &SolverConfig) -> Vec<f64> {
    let mut times = vec![0.0];
    if cfg.t_end <= 0.0 {
        return times;
    }
    let n = (cfg.t_end / cfg.record_every - 1e-9).ceil().max(1.0) as usize;
    for r in 1..n {
        times.push(r as f64 * cfg.record_every);
    }
    times.push(cfg.t_end);
    times
}

/// Integrates from `initial` to `cfg.t_end`, calling every observer at each
/// recording time (including `t = 0` and `t_end`).
pub fn integrate(
    initial: &MhdState,
    cfg: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut state = initial.clone();
    let t0 = state.t;
    let mut steps = 0;
    let mut min_dt = f64::INFINITY;
    let times = record_times(cfg);
    for obs in observers.iter_mut() {
        obs.observe(&state)?;
    }
    for w in times.windows(2) {
        let target = t0 + w[1];
        let span = w[1] - w[0];
        match cfg.dt {
            DtRule::Fixed(dt) => {
                let m = (span / dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / m as f64;
                for s in 0..m {
                    let h = if s + 1 == m { target - state.t } else { h };
                    state = step_with(&state, cfg, h)?;
                    min_dt = min_dt.min(h);
                    steps += 1;
                }
            }
            DtRule::Auto => {
                while target - state.t > 1e-12 * span {
                    let remaining = target - state.t;
                    let h = cfg.cfl_step(&state).min(remaining);
                    // land exactly on the recording time without a sliver step
                    let h = if remaining - h < 1e-3 * h { remaining } else { h };
                    state = step_with(&state, cfg, h)?;
                    min_dt = min_dt.min(h);
                    steps += 1;
                }
            }
        }
        state.t = target;
        for obs in observers.iter_mut() {
            obs.observe(&state)?;
        }
    }
    Ok(Trajectory {
        final_state: state,
        steps,
        records: times.len(),
        min_dt,
    })
}

/// Kinetic-plus-magnetic energy `½∫|u|² + |b|²`.
pub fn energy(state: &MhdState) -> f64 {
    0.5 * (crate::spectral::norm_sq(&state.u) + crate::spectral::norm_sq(&state.b))
}

/// `curl b`, or the scalar current in 2-D.
pub fn current(state: &MhdState) -> SpectralField {
    curl(&state.b).expect("state fields are vectors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, sample, TorusSpec};
    use approx::assert_relative_eq;

    fn grid(dim: usize, n: usize) -> Arc<Grid> {
        Grid::new(TorusSpec::new(dim, n).unwrap()).unwrap()
    }

    fn abc_state(g: &Arc<Grid>) -> MhdState {
        let b = forward_transform(
            g,
            &sample(g, 3, |x| {
                [
                    x[2].sin() + x[1].cos(),
                    x[0].sin() + x[2].cos(),
                    x[1].sin() + x[0].cos(),
                ]
            }),
        )
        .unwrap();
        MhdState::new(SpectralField::zeros(g, 3), b, 0.0).unwrap()
    }

    #[test]
    fn beltrami_rhs() {
        let g = grid(3, 16);
        let s = abc_state(&g);
        let cfg = SolverConfig::new(0.05, 0.1, 1e-3, 1.0, 0.1);
        let (du, db) = rhs(&s, &cfg);
        assert!(du.max_abs_coefficient() < 1e-14);
        assert!(db.add(&s.b.scaled(0.1)).unwrap().max_abs_coefficient() < 1e-15);
    }

    #[test]
    fn zero_state_rhs() {
        let g = grid(2, 8);
        let (du, db) = rhs(&MhdState::zeros(&g), &SolverConfig::new(1.0, 1.0, 0.1, 1.0, 0.1));
        assert_eq!(du.max_abs_coefficient(), 0.0);
        assert_eq!(db.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn beltrami_step_is_exact_decay() {
        let g = grid(3, 16);
        let s0 = abc_state(&g);
        let cfg = SolverConfig::new(0.0, 0.1, 1e-3, 0.01, 0.01);
        let traj = integrate(&s0, &cfg, &mut []).unwrap();
        let want = s0.b.scaled((-0.1f64 * 0.01).exp());
        let err = traj.final_state.b.sub(&want).unwrap().coefficient_norm_sq().sqrt()
            / want.coefficient_norm_sq().sqrt();
        assert!(err < 1e-12, "err = {err}");
        assert_eq!(traj.steps, 10);
    }

    #[test]
    fn record_times_cover_horizon() {
        let cfg = SolverConfig::new(0.0, 0.0, 0.1, 1.0, 0.3);
        let t = record_times(&cfg);
        assert_eq!(t.len(), 5);
        assert_relative_eq!(*t.last().unwrap(), 1.0);
        let cfg = SolverConfig::new(0.0, 0.0, 0.1, 1.0, 0.1);
        assert_eq!(record_times(&cfg).len(), 11);
        let cfg = SolverConfig::new(0.0, 0.0, 0.1, 0.0, 0.1);
        assert_eq!(record_times(&cfg), vec![0.0]);
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let g = grid(3, 8);
        let s0 = abc_state(&g);
        let cfg = SolverConfig::new(0.0, 0.1, 1e-3, 0.0, 0.1);
        let mut calls = 0;
        let mut obs = |_: &MhdState| -> Result<()> {
            calls += 1;
            Ok(())
        };
        let traj = integrate(&s0, &cfg, &mut [&mut obs]).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(traj.steps, 0);
        assert_eq!(traj.final_state.t, 0.0);
    }

    #[test]
    fn nan_is_reported_as_divergence() {
        let g = grid(2, 8);
        let mut s = MhdState::zeros(&g);
        s.u.components_mut()[0][1] = Complex64::new(f64::NAN, 0.0);
        let err = step(&s, &SolverConfig::new(0.0, 0.0, 0.1, 1.0, 0.1)).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn dt_rule_serde() {
        let auto: DtRule = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(auto, DtRule::Auto);
        let fixed: DtRule = serde_json::from_str("0.25").unwrap();
        assert_eq!(fixed, DtRule::Fixed(0.25));
        assert_eq!(serde_json::to_string(&DtRule::Auto).unwrap(), "\"auto\"");
        assert!(serde_json::from_str::<DtRule>("\"fast\"").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(-1.0, 0.0, 0.1, 1.0, 0.1).validate().is_err());
        assert!(SolverConfig::new(0.0, -1.0, 0.1, 1.0, 0.1).validate().is_err());
        assert!(SolverConfig::new(0.0, 0.0, 0.0, 1.0, 0.1).validate().is_err());
        assert!(SolverConfig::new(0.0, 0.0, 0.1, 1.0, 0.1).validate().is_ok());
    }
}
