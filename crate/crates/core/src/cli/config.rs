use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lyapunov::DEFAULT_FIT_RANGE;
use crate::models::{LorenzParams, Model, StateVector, EXPERIMENT_H, EXPERIMENT_T_FINAL, EXPERIMENT_Y0};
use crate::odecore::{ButcherTableau, StepperConfig};
use crate::orbits::RoundingPolicy;
use crate::rounding::RoundingBackend;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterSwitch {
    On,
    Off,
}

impl FilterSwitch {
    pub fn is_on(self) -> bool {
        self == FilterSwitch::On
    }
}

impl FromStr for FilterSwitch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on" => Ok(FilterSwitch::On),
            "off" => Ok(FilterSwitch::Off),
            other => Err(format!("filter must be `on` or `off`, got `{other}`")),
        }
    }
}

impl fmt::Display for FilterSwitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_on() { "on" } else { "off" })
    }
}

/// Every knob of a run, stored as flat `key = value` TOML.
///
/// `lyapunov_tau`, `lyapunov_m` and `lyapunov_theiler` are chosen from the
/// series when absent. `lyapunov_transient` seconds are dropped from the
/// start of a series before estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub h: f64,
    pub t_final: f64,
    pub method: String,
    pub filter: FilterSwitch,
    pub rounding_backend: RoundingBackend,
    pub policy: RoundingPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_tau: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_theiler: Option<usize>,
    pub lyapunov_fit_min: usize,
    pub lyapunov_fit_max: usize,
    pub lyapunov_neighbors: usize,
    pub lyapunov_transient: f64,
    pub output: PathBuf,
    pub report: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let LorenzParams { sigma, rho, beta } = LorenzParams::EXPERIMENT;
        let StateVector { x, y, z } = EXPERIMENT_Y0;
        ExperimentConfig {
            model: "lorenz".into(),
            sigma,
            rho,
            beta,
            x0: x,
            y0: y,
            z0: z,
            h: EXPERIMENT_H,
            t_final: EXPERIMENT_T_FINAL,
            method: "rk4".into(),
            filter: FilterSwitch::Off,
            rounding_backend: RoundingBackend::HardwareEnv,
            policy: RoundingPolicy::Strict,
            lyapunov_tau: None,
            lyapunov_m: None,
            lyapunov_theiler: None,
            lyapunov_fit_min: DEFAULT_FIT_RANGE.0,
            lyapunov_fit_max: DEFAULT_FIT_RANGE.1,
            lyapunov_neighbors: 1,
            lyapunov_transient: 50.0,
            output: PathBuf::from("orbit.csv"),
            report: PathBuf::from("reproduction.json"),
        }
    }
}

fn field_err(field: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn params(&self) -> LorenzParams {
        LorenzParams {
            sigma: self.sigma,
            rho: self.rho,
            beta: self.beta,
        }
    }

    pub fn initial_state(&self) -> [f64; 3] {
        [self.x0, self.y0, self.z0]
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        Model::by_name(&self.model, self.params()).map_err(|e| field_err("model", e))
    }

    pub fn stepper(&self) -> Result<StepperConfig, CliError> {
        let tableau = ButcherTableau::by_name(&self.method).ok_or_else(|| {
            field_err(
                "method",
                format!(
                    "unknown method `{}` (known: {})",
                    self.method,
                    ButcherTableau::REGISTERED.join(", ")
                ),
            )
        })?;
        let cfg = StepperConfig {
            h: self.h,
            t_final: self.t_final,
            tableau,
        };
        cfg.validate().map_err(|e| {
            let field = if self.h.is_finite() && self.h > 0.0 {
                "t_final"
            } else {
                "h"
            };
            field_err(field, e)
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.build_model()?;
        self.stepper()?;
        for (name, v) in [("x0", self.x0), ("y0", self.y0), ("z0", self.z0)] {
            if !v.is_finite() {
                return Err(field_err(name, "must be finite"));
            }
        }
        if self.lyapunov_fit_min >= self.lyapunov_fit_max {
            return Err(field_err(
                "lyapunov_fit_min",
                format!("must be below lyapunov_fit_max ({})", self.lyapunov_fit_max),
            ));
        }
        if self.lyapunov_tau == Some(0) {
            return Err(field_err("lyapunov_tau", "must be at least 1"));
        }
        if matches!(self.lyapunov_m, Some(m) if m < 2) {
            return Err(field_err("lyapunov_m", "must be at least 2"));
        }
        if self.lyapunov_neighbors == 0 {
            return Err(field_err("lyapunov_neighbors", "must be at least 1"));
        }
        if !(self.lyapunov_transient.is_finite() && self.lyapunov_transient >= 0.0) {
            return Err(field_err(
                "lyapunov_transient",
                "must be a non-negative number of seconds",
            ));
        }
        Ok(())
    }
}
