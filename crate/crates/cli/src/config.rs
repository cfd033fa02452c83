//! Run configuration loaded from JSON.
//!
//! `model`, `curve` and `sim` are required; each subcommand has an optional
//! section of its own whose fields all have defaults.

use std::path::Path;

use qghjm_core::criteria::{A5Grid, ConditionKind, LyapunovSpec, VerifyGrid};
use qghjm_core::{ForwardCurve, ModelParams, SimConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub curve: ForwardCurve,
    pub sim: SimConfig,
    #[serde(default)]
    pub simulate: SimulateOptions,
    #[serde(default)]
    pub region: RegionOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub ode: OdeSettings,
    #[serde(default)]
    pub price: PriceOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateOptions {
    /// Times at which the cumulative explosion fraction is reported;
    /// ten even steps up to the horizon when empty.
    pub checkpoints: Vec<f64>,
    /// Paths written to `paths.csv` (all paths still enter `explosions.csv`).
    pub recorded_paths: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            checkpoints: Vec::new(),
            recorded_paths: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionOptions {
    pub gammas: Vec<f64>,
    /// Volatilities of each curve; `0.01, 0.02, ..., 1.45` when empty.
    pub sigma_grid: Vec<f64>,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            gammas: vec![0.6, 0.75, 0.9, 1.0],
            sigma_grid: Vec::new(),
        }
    }
}

impl RegionOptions {
    pub fn sigmas(&self) -> Vec<f64> {
        if self.sigma_grid.is_empty() {
            (1..=145).map(|k| k as f64 / 100.0).collect()
        } else {
            self.sigma_grid.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub condition: ConditionKind,
    /// Certificate to check instead of building one.
    pub lyapunov: Option<LyapunovSpec>,
    pub grid: VerifyGrid,
    pub a5_grid: A5Grid,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            condition: ConditionKind::II,
            lyapunov: None,
            grid: VerifyGrid::default(),
            a5_grid: A5Grid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeSettings {
    /// Integration horizon; the simulation horizon when absent.
    pub horizon: Option<f64>,
    pub tol: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            horizon: None,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuturesSpec {
    #[serde(rename = "T")]
    pub maturity: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriceOptions {
    pub futures: Vec<FuturesSpec>,
    /// Maturities of the bond table; tenors within the simulation horizon
    /// also get a Monte Carlo discount estimate.
    pub bond_tenors: Vec<f64>,
}

impl Default for PriceOptions {
    fn default() -> Self {
        Self {
            futures: Vec::new(),
            bond_tenors: vec![0.25, 0.5, 1.0, 2.0, 5.0, 10.0],
        }
    }
}

impl RunConfig {
    /// Parses and validates; `--seed` overrides `sim.seed`.
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text).map_err(|message| CliError::Config {
            path: path.display().to_string(),
            message,
        })?;
        if let Some(s) = seed {
            cfg.sim.seed = s;
        }
        Ok(cfg)
    }

    /// Parse errors carry serde's line and column.
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        self.model.validate().map_err(|e| format!("model: {e}"))?;
        self.sim
            .validate(&self.model)
            .map_err(|e| format!("sim: {e}"))?;
        let l0 = self.curve.value(0.0);
        if (l0 - self.model.lambda0).abs() > 1e-12 * l0.abs().max(1.0) {
            return Err(format!(
                "model.lambda0 = {} differs from the curve at t = 0 ({l0})",
                self.model.lambda0
            ));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        for &t in &self.simulate.checkpoints {
            positive("simulate.checkpoints", t)?;
            if t > self.sim.horizon {
                return Err(format!(
                    "simulate.checkpoints: {t} lies beyond sim.horizon = {}",
                    self.sim.horizon
                ));
            }
        }
        for &s in &self.region.sigma_grid {
            positive("region.sigma_grid", s)?;
        }
        if let Some(h) = self.ode.horizon {
            positive("ode.horizon", h)?;
        }
        positive("ode.tol", self.ode.tol)?;
        for f in &self.price.futures {
            positive("price.futures.T", f.maturity)?;
            positive("price.futures.delta", f.delta)?;
            if f.maturity + f.delta > self.sim.horizon {
                return Err(format!(
                    "price.futures: T + delta = {} lies beyond sim.horizon = {}",
                    f.maturity + f.delta,
                    self.sim.horizon
                ));
            }
        }
        for &t in &self.price.bond_tenors {
            positive("price.bond_tenors", t)?;
        }
        Ok(())
    }

    pub fn checkpoints(&self) -> Vec<f64> {
        if self.simulate.checkpoints.is_empty() {
            (1..=10)
                .map(|k| self.sim.horizon * k as f64 / 10.0)
                .collect()
        } else {
            self.simulate.checkpoints.clone()
        }
    }
}
