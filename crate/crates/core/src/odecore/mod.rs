//! Fixed-step explicit Runge-Kutta integration with every combination
//! operation routed through a rounding-mode handle.
//!
//! Accumulation order is part of the contract because directed rounding makes
//! it observable: a stage state is `y + h * (a₀k₀ + a₁k₁ + …)` summed left to
//! right in stage index, and the update is `y + h * (b₀k₀ + b₁k₁ + …)` in the
//! same order.

mod tableau;

pub use tableau::ButcherTableau;

use thiserror::Error;

use crate::rounding::{with_mode, Fp, RoundingBackend, RoundingError, RoundingMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid tableau `{name}`: {reason}")]
    InvalidTableau { name: String, reason: String },
    #[error("invalid stepper configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite state produced at step {step}")]
    NonFiniteState { step: usize },
    #[error(transparent)]
    Rounding(#[from] RoundingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub h: f64,
    pub t_final: f64,
    pub tableau: ButcherTableau,
}

impl StepperConfig {
    pub fn new(h: f64, t_final: f64, tableau: ButcherTableau) -> Result<Self, OdeError> {
        let cfg = StepperConfig { h, t_final, tableau };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(OdeError::InvalidConfig(format!(
                "step h must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(OdeError::InvalidConfig(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if (self.t_final / self.h).round() < 1.0 {
            return Err(OdeError::InvalidConfig(format!(
                "t_final {} is shorter than half a step of {}",
                self.t_final, self.h
            )));
        }
        Ok(())
    }

    /// N = round(t_final / h).
    pub fn steps(&self) -> usize {
        (self.t_final / self.h).round() as usize
    }

    /// Time of grid point `k`, computed to-nearest as `k * h`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }
}

/// Vector-field callback used by the stepper: `(t, y, dy, fp)`.
///
/// `fp` is the handle the stepper itself is using. A field may evaluate under
/// it, open its own nested scope, or call [`Fp::setround`]; which of these it
/// does is the field's contract, not the stepper's.
pub trait StageField: FnMut(f64, &[f64], &mut [f64], &Fp) {}
impl<F: FnMut(f64, &[f64], &mut [f64], &Fp)> StageField for F {}

/// One step `y + h Σ bᵢkᵢ` with `kᵢ = f(t + cᵢh, y + h Σⱼ aᵢⱼkⱼ)`.
///
/// A non-finite stage or result is reported as `NonFiniteState { step: 0 }`;
/// [`integrate`] substitutes the real step index.
pub fn rk_step(
    tableau: &ButcherTableau,
    f: &mut impl StageField,
    t: f64,
    y: &[f64],
    h: f64,
    fp: &Fp,
) -> Result<Vec<f64>, OdeError> {
    let dim = y.len();
    let stages = tableau.stages();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(stages);
    let mut stage_y = vec![0.0; dim];

    for i in 0..stages {
        let row = tableau.a(i);
        let ti = fp.add(t, fp.mul(tableau.c()[i], h));
        if i == 0 {
            stage_y.copy_from_slice(y);
        } else {
            for d in 0..dim {
                let mut acc = fp.mul(row[0], k[0][d]);
                for (j, &a) in row.iter().enumerate().skip(1) {
                    acc = fp.add(acc, fp.mul(a, k[j][d]));
                }
                stage_y[d] = fp.add(y[d], fp.mul(h, acc));
            }
        }
        let mut ki = vec![0.0; dim];
        f(ti, &stage_y, &mut ki, fp);
        if ki.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFiniteState { step: 0 });
        }
        k.push(ki);
    }

    let b = tableau.b();
    let mut out = vec![0.0; dim];
    for d in 0..dim {
        let mut acc = fp.mul(b[0], k[0][d]);
        for (i, &bi) in b.iter().enumerate().skip(1) {
            acc = fp.add(acc, fp.mul(bi, k[i][d]));
        }
        out[d] = fp.add(y[d], fp.mul(h, acc));
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFiniteState { step: 0 });
    }
    Ok(out)
}

/// Integrates from `y0` over `config.steps()` steps, each step evaluated in
/// its own rounding scope. Returns `N + 1` states including `y0`.
pub fn integrate(
    config: &StepperConfig,
    mut f: impl StageField,
    y0: &[f64],
    mode: RoundingMode,
    backend: RoundingBackend,
) -> Result<Vec<Vec<f64>>, OdeError> {
    config.validate()?;
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::NonFiniteState { step: 0 });
    }
    let n = config.steps();
    let mut states = Vec::with_capacity(n + 1);
    states.push(y0.to_vec());
    for step in 0..n {
        let t = config.time(step);
        let next = with_mode(mode, backend, |fp| {
            rk_step(&config.tableau, &mut f, t, &states[step], config.h, fp)
        })?
        .map_err(|e| match e {
            OdeError::NonFiniteState { .. } => OdeError::NonFiniteState { step },
            other => other,
        })?;
        states.push(next);
    }
    Ok(states)
}
