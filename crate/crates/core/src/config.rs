//! JSON run and sweep configurations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::solver::SolverConfig;
use crate::spectral::TorusSpec;
use crate::sweep::SweepPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub torus: TorusSpec,
    pub solver: SolverConfig,
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge_shift: Option<Vec<f64>>,
}

fn check_torus(t: &TorusSpec) -> Result<()> {
    if t.modes_per_axis % 2 != 0 {
        return Err(Error::Config(format!(
            "modes_per_axis must be even, got {}",
            t.modes_per_axis
        )));
    }
    t.validate()
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        check_torus(&self.torus)?;
        if !(self.solver.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        self.solver.validate()?;
        self.initial.validate(self.torus.dim)?;
        if let Some(s) = &self.gauge_shift {
            if s.len() != self.torus.dim {
                return Err(Error::Config(format!(
                    "gauge_shift must have {} components",
                    self.torus.dim
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub plan: SweepPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_torus(&self.plan.torus)?;
        self.plan.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid sweep config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::DtRule;
    use crate::sweep::{NuRule, Perturbation};
    use proptest::prelude::*;

    fn beltrami() -> RunConfig {
        RunConfig {
            torus: TorusSpec::new(3, 16).unwrap(),
            solver: SolverConfig::new(0.1, 0.1, 1e-3, 1.0, 1e-3),
            initial: InitialData::preset("beltrami-abc"),
            out_dir: None,
            gauge_shift: None,
        }
    }

    #[test]
    fn validation_messages() {
        let mut c = beltrami();
        c.solver.t_end = 0.0;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("t_end must be positive"), "{msg}");

        let mut c = beltrami();
        c.torus.modes_per_axis = 15;
        assert!(c.validate().is_err());

        let mut c = beltrami();
        c.solver.mu = -0.1;
        assert!(c.validate().is_err());

        assert!(beltrami().validate().is_ok());
    }

    #[test]
    fn parses_documented_example() {
        let text = r#"{
            "torus": {"dim": 3, "modes_per_axis": 16},
            "solver": {"nu": 0.1, "mu": 0.1, "dt": "auto", "t_end": 1.0, "record_every": 0.01},
            "initial": {"preset": "random-solenoidal", "seed": 7, "b_mean": [0, 0, 0.3]},
            "gauge_shift": [0, 0, 1]
        }"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(c.solver.dt, DtRule::Auto);
        assert_eq!(c.torus.side_length, 2.0 * std::f64::consts::PI);
        c.validate().unwrap();
        assert!(RunConfig::from_json("{").is_err());
    }

    fn arb_run() -> impl Strategy<Value = RunConfig> {
        (
            prop_oneof![Just(2usize), Just(3usize)],
            (2usize..20).prop_map(|h| 2 * h),
            0.0f64..1.0,
            0.0f64..1.0,
            prop_oneof![(1e-4f64..0.1).prop_map(DtRule::Fixed), Just(DtRule::Auto)],
            0.01f64..5.0,
            any::<u64>(),
            proptest::option::of(-1.0f64..1.0),
        )
            .prop_map(|(dim, n, nu, mu, dt, t_end, seed, shift)| RunConfig {
                torus: TorusSpec::new(dim, n).unwrap(),
                solver: SolverConfig {
                    nu,
                    mu,
                    dt,
                    t_end,
                    record_every: t_end / 10.0,
                    cfl: 0.5,
                },
                initial: InitialData::preset("random-solenoidal").with_seed(seed),
                out_dir: Some(format!("out/{seed}")),
                gauge_shift: shift.map(|s| vec![s; dim]),
            })
    }

    proptest! {
        #[test]
        fn run_config_round_trip(c in arb_run()) {
            prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        }
    }

    #[test]
    fn sweep_config_round_trip() {
        let c = SweepConfig {
            plan: SweepPlan {
                torus: TorusSpec::new(2, 32).unwrap(),
                mu_values: vec![0.1, 0.01, 0.001],
                nu_rule: NuRule::Fixed(0.02),
                initial: InitialData::preset("orszag-tang-like"),
                t_end: 1.0,
                dt: DtRule::Fixed(0.01),
                record_every: 0.01,
                perturbation: Some(Perturbation {
                    amplitude: 0.05,
                    base_k: 4,
                }),
            },
            out_dir: Some("sweep".into()),
        };
        assert_eq!(SweepConfig::from_json(&c.to_json()).unwrap(), c);
        c.validate().unwrap();
    }
}
