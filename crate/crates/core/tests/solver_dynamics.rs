mod common;

use common::{grid, rel_diff};
use hlx::diagnostics::{
    b_mean_variation, energy_balance_residual, helicity_balance_residual, msp_balance_residual,
    Recorder,
};
use hlx::gauge::stream_function;
use hlx::initial::{make_initial_data, InitialData};
use hlx::solver::{energy, integrate, rhs, step_with, DtRule, MhdState, SolverConfig};
use hlx::spectral::{forward_transform, norm_sq, sample, SpectralField};

fn random_state(dim: usize, n: usize, seed: u64) -> MhdState {
    let g = grid(dim, n);
    make_initial_data(&g, &InitialData::preset("random-solenoidal").with_seed(seed)).unwrap()
}

/// Random data with order-one rms velocity and field.
fn energetic_state(dim: usize, n: usize, seed: u64) -> MhdState {
    let g = grid(dim, n);
    let mut d = InitialData::preset("random-solenoidal").with_seed(seed);
    d.u_energy = 0.5 * g.spec().volume();
    d.b_energy = 0.5 * g.spec().volume();
    make_initial_data(&g, &d).unwrap()
}

#[test]
fn beltrami_energy_decay_to_t1() {
    let g = grid(3, 16);
    let s0 = make_initial_data(&g, &InitialData::preset("beltrami-abc")).unwrap();
    let cfg = SolverConfig::new(0.05, 0.1, 1e-3, 1.0, 0.1);
    let traj = integrate(&s0, &cfg, &mut []).unwrap();
    let ratio = norm_sq(&traj.final_state.b) / norm_sq(&s0.b);
    assert!((ratio / (-0.2f64).exp() - 1.0).abs() < 1e-8);
    assert!(traj.final_state.u.max_abs_coefficient() < 1e-12);
}

#[test]
fn two_dimensional_stream_function_decays() {
    let g = grid(2, 16);
    let b = forward_transform(&g, &sample(&g, 2, |x| [-x[1].sin(), x[0].sin(), 0.0])).unwrap();
    let s0 = MhdState::new(SpectralField::zeros(&g, 2), b, 0.0).unwrap();
    let mu = 0.2;
    let cfg = SolverConfig::new(0.0, mu, 1e-2, 0.5, 0.5);
    let traj = integrate(&s0, &cfg, &mut []).unwrap();
    let phi0 = stream_function(&s0.b).unwrap();
    let phi = stream_function(&traj.final_state.b).unwrap();
    assert!(rel_diff(&phi, &phi0.scaled((-mu * 0.5f64).exp())) < 1e-12);
}

#[test]
fn aligned_state_has_no_nonlinear_transfer() {
    let mut s = random_state(3, 16, 3);
    s.b = s.u.clone();
    let nu = 0.03;
    let cfg = SolverConfig::new(nu, nu, 1e-3, 1.0, 0.1);
    let (du, db) = rhs(&s, &cfg);
    let lap = hlx::spectral::laplacian(&s.u).scaled(nu);
    assert!(rel_diff(&du, &lap) < 1e-12);
    assert!(rel_diff(&db, &lap) < 1e-12);

    let cfg_run = SolverConfig { t_end: 0.2, record_every: 0.01, dt: DtRule::Fixed(0.01), ..cfg };
    let mut rec_run = Recorder::new(cfg_run);
    integrate(&s, &cfg_run, &mut [&mut rec_run]).unwrap();
    assert!(energy_balance_residual(&rec_run.series).unwrap() < 1e-6);
}

#[test]
fn rhs_is_solenoidal_and_b_mean_free() {
    for dim in [2, 3] {
        let mut s = random_state(dim, 16, 11);
        let mean = vec![0.4; dim];
        s.b.add_constant(&mean);
        let (du, db) = rhs(&s, &SolverConfig::new(0.01, 0.02, 1e-3, 1.0, 0.1));
        assert!(du.relative_divergence() < 1e-12);
        assert!(db.relative_divergence() < 1e-12);
        assert!(db.mean().iter().all(|m| *m == 0.0));
    }
}

#[test]
fn ideal_energy_error_per_step_is_fifth_order() {
    let s0 = energetic_state(3, 16, 5);
    let cfg = SolverConfig::new(0.0, 0.0, 1.0, 1.0, 1.0);
    let e0 = energy(&s0);
    let err = |dt: f64| (energy(&step_with(&s0, &cfg, dt).unwrap()) - e0).abs();
    let (a, b) = (err(0.1), err(0.05));
    let order = (a / b).log2();
    assert!(order > 4.5, "local order {order} ({a:e}, {b:e})");
}

#[test]
fn fourth_order_convergence_in_dt() {
    let s0 = energetic_state(3, 16, 9);
    let run = |dt: f64| {
        let cfg = SolverConfig::new(0.01, 0.01, dt, 0.4, 0.4);
        integrate(&s0, &cfg, &mut []).unwrap().final_state
    };
    let reference = run(0.0025);
    let e1 = {
        let s = run(0.04);
        rel_diff(&s.b, &reference.b) + rel_diff(&s.u, &reference.u)
    };
    let e2 = {
        let s = run(0.02);
        rel_diff(&s.b, &reference.b) + rel_diff(&s.u, &reference.u)
    };
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn random_run_energy_and_helicity_balance() {
    let s0 = random_state(3, 16, 21);
    let cfg = SolverConfig::new(0.01, 0.01, 5e-3, 0.5, 5e-3);
    let mut rec = Recorder::new(cfg);
    integrate(&s0, &cfg, &mut [&mut rec]).unwrap();
    assert!(energy_balance_residual(&rec.series).unwrap() < 1e-6);
    assert!(helicity_balance_residual(&rec.series).unwrap() < 1e-6);
}

#[test]
fn mean_field_is_stationary() {
    let g = grid(3, 16);
    let d = InitialData::preset("random-solenoidal")
        .with_seed(4)
        .with_b_mean(vec![0.1, -0.2, 0.3]);
    let s0 = make_initial_data(&g, &d).unwrap();
    let cfg = SolverConfig::new(0.02, 0.02, 1e-2, 0.5, 1e-2);
    let mut rec = Recorder::new(cfg);
    integrate(&s0, &cfg, &mut [&mut rec]).unwrap();
    assert!(b_mean_variation(&rec.series).unwrap() <= 1e-13 * 0.5);
}

#[test]
fn ideal_cross_helicity_is_conserved() {
    let s0 = random_state(3, 16, 8);
    let cfg = SolverConfig::new(0.0, 0.0, 5e-3, 1.0, 0.05);
    let mut rec = Recorder::new(cfg);
    integrate(&s0, &cfg, &mut [&mut rec]).unwrap();
    let c0 = rec.series[0].cross_helicity;
    let scale = rec.series[0].energy;
    for r in &rec.series {
        assert!((r.cross_helicity - c0).abs() <= 1e-6 * scale);
        assert!((r.energy - scale).abs() <= 1e-6 * scale);
    }
}

#[test]
fn two_dimensional_msp_balance() {
    let s0 = random_state(2, 32, 13);
    let cfg = SolverConfig::new(0.01, 0.01, 5e-3, 1.0, 5e-3);
    let mut rec = Recorder::new(cfg);
    integrate(&s0, &cfg, &mut [&mut rec]).unwrap();
    assert!(msp_balance_residual(&rec.series).unwrap() < 1e-6);
    assert!(energy_balance_residual(&rec.series).unwrap() < 1e-6);
}

#[test]
fn integration_is_deterministic() {
    let s0 = random_state(3, 16, 2);
    let cfg = SolverConfig::new(0.01, 0.01, 1e-2, 0.2, 0.05);
    let a = integrate(&s0, &cfg, &mut []).unwrap().final_state;
    let b = integrate(&s0, &cfg, &mut []).unwrap().final_state;
    assert_eq!(a.u.components(), b.u.components());
    assert_eq!(a.b.components(), b.b.components());
}

#[test]
fn auto_dt_respects_cfl() {
    let s0 = random_state(3, 16, 2);
    let mut cfg = SolverConfig::new(0.01, 0.01, 1.0, 0.3, 0.1);
    cfg.dt = DtRule::Auto;
    let mut seen = Vec::new();
    let mut obs = |s: &MhdState| -> hlx::Result<()> {
        seen.push(s.t);
        Ok(())
    };
    let traj = integrate(&s0, &cfg, &mut [&mut obs]).unwrap();
    assert_eq!(seen.len(), 4);
    assert!((traj.final_state.t - 0.3).abs() < 1e-15);
    let limit = cfg.cfl_step(&s0);
    assert!(traj.min_dt <= limit * 1.001);
    assert!(traj.steps >= (0.3 / limit).floor() as usize);
}
