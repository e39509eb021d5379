//! Conserved and dissipated quantities along a trajectory.
//!
//! Time integrals are accumulated with the trapezoid rule on the recording
//! grid, so `record_every` should not exceed a few time steps when tight
//! balance residuals are expected.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge;
use crate::solver::{current, energy, MhdState, Observer, SolverConfig};
use crate::spectral::{inner_product, inverse_transform, norm_sq};

/// Instantaneous integrands of the cumulative columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// `ν‖∇u‖²`
    pub visc: f64,
    /// `μ‖curl b‖²`
    pub ohmic: f64,
    /// `2μ∫b·curl b`
    pub helicity_flux: f64,
    /// `μ∫|b·curl b|`
    pub abs_helicity_flux: f64,
    /// `‖b‖²`
    pub b_norm_sq: f64,
    /// `2μ‖∇φ‖²` (2-D)
    pub msp_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub cross_helicity: f64,
    /// Coulomb-gauge magnetic helicity (3-D; zero in 2-D).
    pub helicity: f64,
    /// Mean-square magnetic potential (2-D; zero in 3-D).
    pub msp: f64,
    pub visc_diss: f64,
    pub ohmic_diss: f64,
    pub helicity_flux: f64,
    pub b_mean: Vec<f64>,
    /// Cumulative `μ∫∫|b·curl b|`.
    pub abs_helicity_flux: f64,
    /// Cumulative `∫‖b‖² dτ`.
    pub b_norm_sq_integral: f64,
    /// Cumulative `2μ∫∫|∇φ|²` (2-D).
    pub msp_flux: f64,
    pub rates: Rates,
}

fn rates(state: &MhdState, cfg: &SolverConfig) -> Rates {
    let grid = state.grid();
    let vol = grid.spec().volume();
    let u = state.u.components();
    let mut grad_u = 0.0;
    for c in u {
        for (idx, v) in c.iter().enumerate() {
            grad_u += grid.k2(idx) * v.norm_sqr();
        }
    }
    let j = current(state);
    let curl_b_sq = norm_sq(&j);
    let b_norm_sq = norm_sq(&state.b);
    let mut r = Rates {
        visc: cfg.nu * grad_u * vol,
        ohmic: cfg.mu * curl_b_sq,
        b_norm_sq,
        ..Rates::default()
    };
    if grid.dim() == 3 {
        let b_dot_j = inner_product(&state.b, &j).expect("same grid");
        r.helicity_flux = 2.0 * cfg.mu * b_dot_j;
        if cfg.mu > 0.0 {
            let pb = inverse_transform(&state.b);
            let pj = inverse_transform(&j);
            let sum: f64 = (0..pb[0].len())
                .map(|i| (pb[0][i] * pj[0][i] + pb[1][i] * pj[1][i] + pb[2][i] * pj[2][i]).abs())
                .sum();
            r.abs_helicity_flux = cfg.mu * sum * vol / pb[0].len() as f64;
        }
    } else {
        // |∇φ| = |b - mean b|
        r.msp_flux = 2.0 * cfg.mu * norm_sq(&state.b.without_mean());
    }
    r
}

fn trapezoid(prev: f64, now: f64, h: f64) -> f64 {
    0.5 * h * (prev + now)
}

/// Diagnostics at `state`, with cumulative integrals continued from `running`.
pub fn record(
    state: &MhdState,
    cfg: &SolverConfig,
    running: Option<&DiagnosticsRecord>,
) -> DiagnosticsRecord {
    let dim = state.grid().dim();
    let r = rates(state, cfg);
    let (helicity, msp) = if dim == 3 {
        (gauge::helicity(&state.b, &[0.0; 3]).unwrap_or(f64::NAN), 0.0)
    } else {
        (0.0, gauge::mean_square_potential(&state.b).unwrap_or(f64::NAN))
    };
    let mut rec = DiagnosticsRecord {
        t: state.t,
        energy: energy(state),
        cross_helicity: inner_product(&state.u, &state.b).expect("same grid"),
        helicity,
        msp,
        visc_diss: 0.0,
        ohmic_diss: 0.0,
        helicity_flux: 0.0,
        b_mean: state.b.mean(),
        abs_helicity_flux: 0.0,
        b_norm_sq_integral: 0.0,
        msp_flux: 0.0,
        rates: r,
    };
    if let Some(p) = running {
        let h = state.t - p.t;
        let q = &p.rates;
        rec.visc_diss = p.visc_diss + trapezoid(q.visc, r.visc, h);
        rec.ohmic_diss = p.ohmic_diss + trapezoid(q.ohmic, r.ohmic, h);
        rec.helicity_flux = p.helicity_flux + trapezoid(q.helicity_flux, r.helicity_flux, h);
        rec.abs_helicity_flux =
            p.abs_helicity_flux + trapezoid(q.abs_helicity_flux, r.abs_helicity_flux, h);
        rec.b_norm_sq_integral =
            p.b_norm_sq_integral + trapezoid(q.b_norm_sq, r.b_norm_sq, h);
        rec.msp_flux = p.msp_flux + trapezoid(q.msp_flux, r.msp_flux, h);
    }
    rec
}

/// Observer collecting a diagnostics time series.
#[derive(Debug, Clone)]
pub struct Recorder {
    cfg: SolverConfig,
    pub series: Vec<DiagnosticsRecord>,
}

impl Recorder {
    pub fn new(cfg: SolverConfig) -> Self {
        Recorder {
            cfg,
            series: Vec::new(),
        }
    }
}

impl Observer for Recorder {
    fn observe(&mut self, state: &MhdState) -> Result<()> {
        let rec = record(state, &self.cfg, self.series.last());
        self.series.push(rec);
        Ok(())
    }
}

fn non_empty(series: &[DiagnosticsRecord]) -> Result<&DiagnosticsRecord> {
    series
        .first()
        .ok_or_else(|| Error::Usage("empty diagnostics series".into()))
}

/// `max_t |H(t) - H(0) + flux(t)| / max(1, |H(0)|)`.
pub fn helicity_balance_residual(series: &[DiagnosticsRecord]) -> Result<f64> {
    let first = non_empty(series)?;
    let h0 = first.helicity;
    let worst = series
        .iter()
        .map(|r| (r.helicity - h0 + r.helicity_flux).abs())
        .fold(0.0, f64::max);
    Ok(worst / h0.abs().max(1.0))
}

/// `max_t |E(t) + visc(t) + ohmic(t) - E(0)| / E(0)` (absolute if `E(0) = 0`).
pub fn energy_balance_residual(series: &[DiagnosticsRecord]) -> Result<f64> {
    let first = non_empty(series)?;
    let e0 = first.energy;
    let worst = series
        .iter()
        .map(|r| (r.energy + r.visc_diss + r.ohmic_diss - e0).abs())
        .fold(0.0, f64::max);
    Ok(if e0 > 0.0 { worst / e0 } else { worst })
}

/// 2-D analogue: `max_t |msp(t) - msp(0) + 2μ∫∫|∇φ|²| / max(1, msp(0))`.
pub fn msp_balance_residual(series: &[DiagnosticsRecord]) -> Result<f64> {
    let first = non_empty(series)?;
    let m0 = first.msp;
    let worst = series
        .iter()
        .map(|r| (r.msp - m0 + r.msp_flux).abs())
        .fold(0.0, f64::max);
    Ok(worst / m0.abs().max(1.0))
}

/// `max_t |H(t) - H(0)|`.
pub fn max_helicity_drift(series: &[DiagnosticsRecord]) -> Result<f64> {
    let h0 = non_empty(series)?.helicity;
    Ok(series
        .iter()
        .map(|r| (r.helicity - h0).abs())
        .fold(0.0, f64::max))
}

pub fn max_msp_drift(series: &[DiagnosticsRecord]) -> Result<f64> {
    let m0 = non_empty(series)?.msp;
    Ok(series.iter().map(|r| (r.msp - m0).abs()).fold(0.0, f64::max))
}

/// Largest componentwise deviation of `b_mean` from its initial value.
pub fn b_mean_variation(series: &[DiagnosticsRecord]) -> Result<f64> {
    let m0 = &non_empty(series)?.b_mean;
    Ok(series
        .iter()
        .flat_map(|r| r.b_mean.iter().zip(m0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max))
}

/// Outcome of the Young-inequality chain behind the `√μ` helicity bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqrtMuVerdict {
    pub holds: bool,
    /// `μ∫₀ᵀ∫|b·curl b|`
    pub lhs: f64,
    /// `(√μ/2)(∫₀ᵀ‖b‖² + μ∫₀ᵀ‖curl b‖²)`
    pub rhs: f64,
    /// `(√μ/2)(2T + 1)E₀`, the a-priori bound from the energy inequality.
    pub envelope: f64,
}

pub const SQRT_MU_SLACK: f64 = 1e-9;

pub fn sqrt_mu_bound_check(
    series: &[DiagnosticsRecord],
    cfg: &SolverConfig,
    e0: f64,
) -> Result<SqrtMuVerdict> {
    if cfg.mu <= 0.0 {
        return Err(Error::Usage("the √μ bound needs mu > 0".into()));
    }
    let first = non_empty(series)?;
    let last = series.last().expect("non-empty");
    let s = cfg.mu.sqrt();
    let lhs = last.abs_helicity_flux;
    let rhs = 0.5 * s * (last.b_norm_sq_integral + last.ohmic_diss);
    let horizon = last.t - first.t;
    Ok(SqrtMuVerdict {
        holds: lhs <= rhs * (1.0 + SQRT_MU_SLACK),
        lhs,
        rhs,
        envelope: 0.5 * s * (2.0 * horizon + 1.0) * e0,
    })
}

/// Writes the series as CSV with the fixed column contract.
pub fn write_csv<W: Write>(series: &[DiagnosticsRecord], mut w: W) -> Result<()> {
    let dim = series.first().map(|r| r.b_mean.len()).unwrap_or(3);
    let mut header = String::from(
        "t,energy,cross_helicity,helicity,msp,visc_diss,ohmic_diss,helicity_flux,b_mean_x,b_mean_y",
    );
    if dim == 3 {
        header.push_str(",b_mean_z");
    }
    writeln!(w, "{header}")?;
    for r in series {
        let mut cols = vec![
            r.t,
            r.energy,
            r.cross_helicity,
            r.helicity,
            r.msp,
            r.visc_diss,
            r.ohmic_diss,
            r.helicity_flux,
        ];
        cols.extend(&r.b_mean);
        let line: Vec<String> = cols.iter().map(|v| format_float(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
