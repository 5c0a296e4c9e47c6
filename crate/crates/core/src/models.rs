//! Vector fields. The Lorenz system is the one that matters; `zero` and
//! `linear` exist as reference fields for testing the machinery around it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::odecore::{ButcherTableau, StepperConfig};
use crate::rounding::Fp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (known: lorenz, zero, linear)")]
    UnknownModel(String),
    #[error("invalid Lorenz parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl LorenzParams {
    /// σ = 7.6, ρ = 65, β = 5.3.
    pub const EXPERIMENT: LorenzParams = LorenzParams {
        sigma: 7.6,
        rho: 65.0,
        beta: 5.3,
    };

    /// σ = 10, ρ = 28, β = 8/3.
    pub fn classic() -> Self {
        LorenzParams {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let LorenzParams { sigma, rho, beta } = *self;
        if !(sigma.is_finite() && rho.is_finite() && beta.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "parameters must be finite: sigma={sigma}, rho={rho}, beta={beta}"
            )));
        }
        if sigma <= 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if beta <= 0.0 {
            return Err(ModelError::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        Ok(())
    }
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self::EXPERIMENT
    }
}

/// Lorenz state: x is the convection intensity, y the temperature
/// difference between rising and falling currents, z the distortion of the
/// vertical temperature profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl StateVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        StateVector { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        StateVector::new(s[0], s[1], s[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// (σ(y−x), x(ρ−z)−y, xy−βz), each operation through `fp` in exactly this
/// order.
pub fn lorenz_field(p: &LorenzParams, s: &StateVector, fp: &Fp) -> StateVector {
    let dx = fp.mul(p.sigma, fp.sub(s.y, s.x));
    let dy = fp.sub(fp.mul(s.x, fp.sub(p.rho, s.z)), s.y);
    let dz = fp.sub(fp.mul(s.x, s.y), fp.mul(p.beta, s.z));
    StateVector::new(dx, dy, dz)
}

/// Default initial state x₀ = 0.06735, y₀ = 1.8841, z₀ = 15.7734.
pub const EXPERIMENT_Y0: StateVector = StateVector::new(0.06735, 1.8841, 15.7734);
pub const EXPERIMENT_H: f64 = 0.01;
pub const EXPERIMENT_T_FINAL: f64 = 100.0;

/// Parameters, initial state and stepper for the chaos-suppression
/// experiment (10 ms steps over 100 s, RK4).
pub fn default_experiment() -> (LorenzParams, StateVector, StepperConfig) {
    (
        LorenzParams::EXPERIMENT,
        EXPERIMENT_Y0,
        StepperConfig {
            h: EXPERIMENT_H,
            t_final: EXPERIMENT_T_FINAL,
            tableau: ButcherTableau::rk4(),
        },
    )
}

/// A named vector field. Every variant is autonomous; `t` is accepted for
/// the stepper's benefit only.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Lorenz(LorenzParams),
    /// ẏ = 0 in `dim` dimensions.
    Zero {
        dim: usize,
    },
    /// ẏ = rate·y componentwise.
    Linear {
        dim: usize,
        rate: f64,
    },
}

impl Model {
    pub const REGISTERED: [&'static str; 3] = ["lorenz", "zero", "linear"];

    /// Resolves a registry name. All registered models are three-dimensional
    /// so they share the Lorenz CSV layout; `linear` uses rate 1.
    pub fn by_name(name: &str, params: LorenzParams) -> Result<Self, ModelError> {
        match name {
            "lorenz" => {
                params.validate()?;
                Ok(Model::Lorenz(params))
            }
            "zero" => Ok(Model::Zero { dim: 3 }),
            "linear" => Ok(Model::Linear { dim: 3, rate: 1.0 }),
            other => Err(ModelError::UnknownModel(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Lorenz(_) => "lorenz",
            Model::Zero { .. } => "zero",
            Model::Linear { .. } => "linear",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Lorenz(_) => 3,
            Model::Zero { dim } | Model::Linear { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64], fp: &Fp) {
        match self {
            Model::Lorenz(p) => {
                let d = lorenz_field(p, &StateVector::from_slice(y), fp);
                dy[..3].copy_from_slice(&d.to_array());
            }
            Model::Zero { .. } => dy.fill(0.0),
            Model::Linear { rate, .. } => {
                for (d, &v) in dy.iter_mut().zip(y) {
                    *d = fp.mul(*rate, v);
                }
            }
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
