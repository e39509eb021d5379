//! Ideal-limit sweeps: one trajectory per resistivity from identical initial
//! data, helicity (3-D) or mean-square potential (2-D) drift per run, and a
//! least-squares fit of `log drift` against `log μ`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    energy_balance_residual, helicity_balance_residual, max_helicity_drift, max_msp_drift,
    msp_balance_residual, sqrt_mu_bound_check, DiagnosticsRecord, Recorder, SqrtMuVerdict,
};
use crate::error::{Error, Result};
use crate::initial::{add_shear_perturbation, make_initial_data, InitialData};
use crate::solver::{integrate, DtRule, MhdState, SolverConfig};
use crate::spectral::{Grid, TorusSpec};

/// Drifts at or below this are excluded from the fit.
pub const DRIFT_FLOOR: f64 = 1e-14;
/// Sweeps with a larger fraction of flagged rows are reported as failed.
pub const MAX_FLAGGED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuRule {
    EqualToMu,
    Fixed(f64),
}

impl NuRule {
    pub fn nu(&self, mu: f64) -> f64 {
        match *self {
            NuRule::EqualToMu => mu,
            NuRule::Fixed(nu) => nu,
        }
    }
}

/// Optional high-frequency velocity perturbation of fixed norm whose
/// wavenumber rises along the ladder, `k_j = base_k + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    pub base_k: i64,
}

/// `μ_j = 10^(-1 - j/2)`, `j = 0..6`.
pub fn default_mu_ladder() -> Vec<f64> {
    (0..7).map(|j| 10f64.powf(-1.0 - j as f64 / 2.0)).collect()
}

fn default_record_every() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub torus: TorusSpec,
    #[serde(default = "default_mu_ladder")]
    pub mu_values: Vec<f64>,
    #[serde(default = "default_nu_rule")]
    pub nu_rule: NuRule,
    pub initial: InitialData,
    pub t_end: f64,
    pub dt: DtRule,
    #[serde(default = "default_record_every")]
    pub record_every: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
}

fn default_nu_rule() -> NuRule {
    NuRule::EqualToMu
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        self.torus.validate()?;
        self.initial.validate(self.torus.dim)?;
        if self.mu_values.len() < 3 {
            return Err(Error::Config(format!(
                "a scaling fit needs at least 3 mu values, got {}",
                self.mu_values.len()
            )));
        }
        self.check_ladder()?;
        if let NuRule::Fixed(nu) = self.nu_rule {
            if !(nu >= 0.0) {
                return Err(Error::Config("nu must be non-negative".into()));
            }
        }
        self.solver_config(self.mu_values[0]).validate()?;
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if let Some(p) = self.perturbation {
            let top = p.base_k + self.mu_values.len() as i64 - 1;
            if p.base_k < 1 || top > self.torus.max_retained() {
                return Err(Error::Config(format!(
                    "perturbation wavenumbers {}..={top} exceed the retained band",
                    p.base_k
                )));
            }
        }
        Ok(())
    }

    fn check_ladder(&self) -> Result<()> {
        if self.mu_values.iter().any(|&m| !(m >= 1e-8 && m.is_finite())) {
            return Err(Error::Config("mu values must be at least 1e-8".into()));
        }
        if self.mu_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("mu values must be strictly decreasing".into()));
        }
        Ok(())
    }

    pub fn solver_config(&self, mu: f64) -> SolverConfig {
        SolverConfig {
            nu: self.nu_rule.nu(mu),
            mu,
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            cfl: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub nu: f64,
    pub max_helicity_drift: f64,
    /// 2-D only.
    pub max_msp_drift: Option<f64>,
    pub energy_balance_residual: f64,
    pub helicity_balance_residual: f64,
    /// 2-D only.
    pub msp_balance_residual: Option<f64>,
    pub sqrt_mu_bound: SqrtMuVerdict,
    /// `2·(√μ/2)(∫‖b‖² + μ∫‖curl b‖²)`, the per-run drift envelope.
    pub bound_rhs: f64,
    /// Integer shell where the ohmic dissipation spectrum peaks.
    pub dissipation_peak_shell: usize,
    pub resolved: bool,
    pub diverged: bool,
    pub steps: usize,
}

impl SweepRow {
    pub fn flagged(&self) -> bool {
        self.diverged || !self.resolved
    }

    /// Drift of the quantity the sweep targets: helicity in 3-D, mean-square
    /// potential in 2-D.
    pub fn drift(&self) -> f64 {
        self.max_msp_drift.unwrap_or(self.max_helicity_drift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub dim: usize,
    pub rows: Vec<SweepRow>,
    /// `None` when fewer than 3 usable points remain.
    pub fit: Option<PowerFit>,
    /// `max_μ drift / √μ` over unflagged rows.
    pub bound_constant: f64,
    pub flagged_fraction: f64,
    #[serde(skip)]
    pub series: Vec<Vec<DiagnosticsRecord>>,
}

impl SweepResult {
    pub fn failed(&self) -> bool {
        self.flagged_fraction > MAX_FLAGGED_FRACTION
    }
}

/// Least-squares line through `(log10 μ, log10 drift)`; drifts at or below
/// [`DRIFT_FLOOR`] are skipped.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(m, d)| *m > 0.0 && *d > DRIFT_FLOOR && d.is_finite())
        .map(|(m, d)| (m.log10(), d.log10()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(PowerFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Shell index of the peak of `Σ_{|k|∈shell} μ|k|²|b̂|²`.
pub fn dissipation_peak_shell(state: &MhdState) -> usize {
    let grid = state.grid();
    let k0 = grid.spec().base_wavenumber();
    let mut shells = vec![0.0; grid.spec().modes_per_axis];
    for idx in 0..grid.len() {
        let k2 = grid.k2(idx);
        let e: f64 = state.b.components().iter().map(|c| c[idx].norm_sqr()).sum();
        let shell = ((k2.sqrt() / k0).round() as usize).min(shells.len() - 1);
        shells[shell] += k2 * e;
    }
    shells
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Resolution threshold `2N/9` on the dissipation peak shell.
pub fn resolution_limit(spec: &TorusSpec) -> f64 {
    2.0 * spec.modes_per_axis as f64 / 9.0
}

fn run_row(plan: &SweepPlan, grid: &Arc<Grid>, j: usize, mu: f64) -> Result<(SweepRow, Vec<DiagnosticsRecord>)> {
    let cfg = plan.solver_config(mu);
    let mut initial = make_initial_data(grid, &plan.initial)?;
    if let Some(p) = plan.perturbation {
        add_shear_perturbation(&mut initial, p.base_k + j as i64, p.amplitude)?;
    }
    let mut rec = Recorder::new(cfg);
    let outcome = integrate(&initial, &cfg, &mut [&mut rec]);
    let series = rec.series;
    let (final_state, steps, diverged) = match outcome {
        Ok(traj) => (Some(traj.final_state), traj.steps, false),
        Err(Error::Diverged { .. }) => (None, 0, true),
        Err(e) => return Err(e),
    };
    let e0 = series[0].energy;
    let sqrt_mu_bound = sqrt_mu_bound_check(&series, &cfg, e0)?;
    let peak = final_state.as_ref().map(dissipation_peak_shell).unwrap_or(usize::MAX);
    let dim = grid.dim();
    let row = SweepRow {
        mu,
        nu: cfg.nu,
        max_helicity_drift: max_helicity_drift(&series)?,
        max_msp_drift: (dim == 2).then(|| max_msp_drift(&series)).transpose()?,
        energy_balance_residual: energy_balance_residual(&series)?,
        helicity_balance_residual: helicity_balance_residual(&series)?,
        msp_balance_residual: (dim == 2).then(|| msp_balance_residual(&series)).transpose()?,
        bound_rhs: 2.0 * sqrt_mu_bound.rhs,
        sqrt_mu_bound,
        dissipation_peak_shell: peak,
        resolved: !diverged && (peak as f64) < resolution_limit(grid.spec()),
        diverged,
        steps,
    };
    Ok((row, series))
}

/// Runs every row of the plan (concurrently on the current rayon pool) and
/// fits the drift scaling.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    plan.check_ladder()?;
    plan.torus.validate()?;
    let grid = Grid::new(plan.torus)?;
    let outcomes: Vec<Result<(SweepRow, Vec<DiagnosticsRecord>)>> = plan
        .mu_values
        .par_iter()
        .enumerate()
        .map(|(j, &mu)| run_row(plan, &grid, j, mu))
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut series = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (r, s) = o?;
        rows.push(r);
        series.push(s);
    }
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.flagged())
        .map(|r| (r.mu, r.drift()))
        .collect();
    let fit = fit_power_law(&usable);
    let bound_constant = usable
        .iter()
        .map(|(m, d)| d / m.sqrt())
        .fold(0.0, f64::max);
    let flagged = rows.iter().filter(|r| r.flagged()).count();
    Ok(SweepResult {
        dim: plan.torus.dim,
        flagged_fraction: flagged as f64 / rows.len().max(1) as f64,
        rows,
        fit,
        bound_constant,
        series,
    })
}

/// CSV summary, one line per row.
pub fn write_summary_csv<W: std::io::Write>(result: &SweepResult, mut w: W) -> Result<()> {
    use crate::diagnostics::format_float as f;
    writeln!(
        w,
        "mu,nu,max_helicity_drift,max_msp_drift,energy_balance_residual,helicity_balance_residual,sqrt_mu_lhs,sqrt_mu_rhs,sqrt_mu_holds,bound_rhs,dissipation_peak_shell,resolved,diverged"
    )?;
    for r in &result.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f(r.mu),
            f(r.nu),
            f(r.max_helicity_drift),
            r.max_msp_drift.map(f).unwrap_or_default(),
            f(r.energy_balance_residual),
            f(r.helicity_balance_residual),
            f(r.sqrt_mu_bound.lhs),
            f(r.sqrt_mu_bound.rhs),
            r.sqrt_mu_bound.holds,
            f(r.bound_rhs),
            r.dissipation_peak_shell,
            r.resolved,
            r.diverged
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law_slope() {
        let pts = [(1e-2, 1e-1), (1e-3, 10f64.powf(-1.5)), (1e-4, 1e-2)];
        let fit = fit_power_law(&pts).unwrap();
        assert_relative_eq!(fit.slope, 0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 0.0, epsilon = 1e-12);
        assert_eq!(fit.points, 3);
    }

    #[test]
    fn fit_refused_below_three_points() {
        assert!(fit_power_law(&[(1e-2, 1e-1), (1e-3, 1e-2)]).is_none());
        assert!(fit_power_law(&[(1e-2, 1e-1), (1e-3, 1e-2), (1e-4, 0.0)]).is_none());
    }

    #[test]
    fn default_ladder() {
        let l = default_mu_ladder();
        assert_eq!(l.len(), 7);
        assert_relative_eq!(l[0], 0.1);
        assert_relative_eq!(l[6], 1e-4, max_relative = 1e-12);
    }

    fn plan(mu: Vec<f64>) -> SweepPlan {
        SweepPlan {
            torus: TorusSpec::new(3, 8).unwrap(),
            mu_values: mu,
            nu_rule: NuRule::EqualToMu,
            initial: InitialData::preset("beltrami-abc"),
            t_end: 0.1,
            dt: DtRule::Fixed(0.01),
            record_every: 0.01,
            perturbation: None,
        }
    }

    #[test]
    fn plan_validation() {
        assert!(plan(vec![1e-1, 1e-2, 1e-3]).validate().is_ok());
        assert!(plan(vec![1e-1, 1e-2]).validate().is_err());
        assert!(plan(vec![1e-1, 1e-1, 1e-3]).validate().is_err());
        assert!(plan(vec![1e-1, 1e-2, 1e-9]).validate().is_err());
    }

    #[test]
    fn two_value_ladder_emits_rows_without_fit() {
        let r = run_sweep(&plan(vec![1e-1, 1e-2])).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.fit.is_none());
    }

    #[test]
    fn beltrami_sweep_slope_near_one() {
        let r = run_sweep(&plan(vec![1e-1, 1e-2, 1e-3])).unwrap();
        let slope = r.fit.unwrap().slope;
        assert!((slope - 1.0).abs() < 0.02, "slope {slope}");
        for row in &r.rows {
            assert!(row.sqrt_mu_bound.holds);
            assert!(row.max_helicity_drift <= row.bound_rhs);
            assert!(!row.flagged());
        }
    }

    #[test]
    fn nu_rule_serde() {
        assert_eq!(
            serde_json::from_str::<NuRule>("\"equal-to-mu\"").unwrap(),
            NuRule::EqualToMu
        );
        assert_eq!(
            serde_json::from_str::<NuRule>("{\"fixed\": 0.5}").unwrap(),
            NuRule::Fixed(0.5)
        );
    }
}
