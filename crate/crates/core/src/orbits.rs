//! Pseudo-orbits and the rounding-mode averaging filter.
//!
//! A pseudo-orbit is the finite-precision sequence a particular
//! (initial condition, method, rounding environment) combination produces.
//! The filtered simulation runs two of them side by side, one rounded toward
//! −∞ and one toward +∞, couples each derivative evaluation to the partner's
//! current state, and reports their per-step midpoint as a third orbit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::Model;
use crate::odecore::{rk_step, OdeError, StepperConfig};
use crate::rounding::{with_mode, Fp, RoundingBackend, RoundingError, RoundingMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("{which} orbit: non-finite state produced at step {step}")]
    NonFiniteState { which: &'static str, step: usize },
    #[error("initial state has {got} components, model `{model}` expects {expected}")]
    DimensionMismatch { model: String, expected: usize, got: usize },
    #[error(transparent)]
    Ode(OdeError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
}

impl From<OdeError> for OrbitError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::Rounding(r) => OrbitError::Rounding(r),
            other => OrbitError::Ode(other),
        }
    }
}

/// Where the directed mode applies inside one coupled step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingPolicy {
    /// Stage assembly and the final update use the orbit's directed mode;
    /// the partner midpoint and the derivative itself are evaluated to-nearest
    /// in a nested scope, after which the directed mode is back in force.
    #[default]
    Strict,
    /// The directed mode is set once at the start of the step; the derivative
    /// switches to to-nearest and never switches back, so everything after
    /// the first derivative call in the step runs to-nearest.
    MatlabFaithful,
}

impl RoundingPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundingPolicy::Strict => "strict",
            RoundingPolicy::MatlabFaithful => "matlab_faithful",
        }
    }
}

impl fmt::Display for RoundingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoundingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(RoundingPolicy::Strict),
            "matlab_faithful" => Ok(RoundingPolicy::MatlabFaithful),
            other => Err(format!(
                "unknown rounding policy `{other}` (expected `strict` or `matlab_faithful`)"
            )),
        }
    }
}

/// Provenance of an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitMeta {
    pub tableau: String,
    pub h: f64,
    pub backend: RoundingBackend,
    /// `None` for a traditional single-orbit run.
    pub policy: Option<RoundingPolicy>,
}

/// Time-indexed states of one pseudo-orbit, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit {
    /// Rounding direction the orbit was integrated under; `None` for the
    /// averaged orbit, which is a derived sequence.
    pub mode: Option<RoundingMode>,
    pub meta: OrbitMeta,
    dim: usize,
    data: Vec<f64>,
}

impl PseudoOrbit {
    pub fn from_states(
        mode: Option<RoundingMode>,
        meta: OrbitMeta,
        dim: usize,
        states: impl IntoIterator<Item = Vec<f64>>,
    ) -> Self {
        let mut data = Vec::new();
        for s in states {
            assert_eq!(s.len(), dim, "state dimension mismatch");
            data.extend_from_slice(&s);
        }
        PseudoOrbit { mode, meta, dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of states, N + 1 for N steps.
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// One coordinate as a scalar series.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.states().map(|s| s[c]).collect()
    }

    /// Time of state `k` on the shared grid.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.meta.h
    }
}

/// The lower (−∞), upper (+∞) and averaged orbits of one filtered run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledOrbitPair {
    pub lower: PseudoOrbit,
    pub upper: PseudoOrbit,
    pub averaged: PseudoOrbit,
}

impl CoupledOrbitPair {
    pub fn len(&self) -> usize {
        self.averaged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.averaged.is_empty()
    }
}

/// δₖ = ‖upperₖ − lowerₖ‖∞, the observable spread of the two directed
/// pseudo-orbits. It is a lower-bound proxy for the (unknowable) distance of
/// either one from the true orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSeries {
    pub values: Vec<f64>,
    /// Always `"max"`.
    pub norm: &'static str,
}

/// Component-wise (a + b) / 2, rounded to-nearest.
pub fn average_filter(lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let fp = Fp::emulated(RoundingMode::ToNearestEven);
    midpoint(lower, upper, &fp)
}

fn midpoint(a: &[f64], b: &[f64], fp: &Fp) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let sum = fp.add(x, y);
            if sum.is_finite() {
                fp.div(sum, 2.0)
            } else {
                // only reached when x + y overflows
                fp.add(fp.div(x, 2.0), fp.div(y, 2.0))
            }
        })
        .collect()
}

pub fn divergence(pair: &CoupledOrbitPair) -> DivergenceSeries {
    let values = pair
        .lower
        .states()
        .zip(pair.upper.states())
        .map(|(lo, hi)| lo.iter().zip(hi).map(|(a, b)| (b - a).abs()).fold(0.0, f64::max))
        .collect();
    DivergenceSeries { values, norm: "max" }
}

fn check_dim(model: &Model, y0: &[f64]) -> Result<(), OrbitError> {
    if y0.len() != model.dim() {
        return Err(OrbitError::DimensionMismatch {
            model: model.name().to_string(),
            expected: model.dim(),
            got: y0.len(),
        });
    }
    Ok(())
}

/// Single orbit with every operation, derivative included, rounded in `mode`.
pub fn run_traditional(
    model: &Model,
    y0: &[f64],
    config: &StepperConfig,
    mode: RoundingMode,
    backend: RoundingBackend,
) -> Result<PseudoOrbit, OrbitError> {
    check_dim(model, y0)?;
    let field = |t: f64, y: &[f64], dy: &mut [f64], fp: &Fp| model.eval(t, y, dy, fp);
    let states = crate::odecore::integrate(config, field, y0, mode, backend).map_err(|e| match e {
        OdeError::NonFiniteState { step } => OrbitError::NonFiniteState {
            which: "traditional",
            step,
        },
        other => other.into(),
    })?;
    let meta = OrbitMeta {
        tableau: config.tableau.name().to_string(),
        h: config.h,
        backend,
        policy: None,
    };
    Ok(PseudoOrbit::from_states(Some(mode), meta, model.dim(), states))
}

/// What stays fixed across the coupled steps of one filtered run.
struct Coupling<'a, F> {
    field: &'a F,
    config: &'a StepperConfig,
    policy: RoundingPolicy,
    backend: RoundingBackend,
}

impl<F> Coupling<'_, F>
where
    F: Fn(f64, &[f64], &mut [f64], &Fp),
{
    /// Advances `own` by one step in `mode`, evaluating the field at the
    /// midpoint of each stage state and the frozen `partner` state.
    fn step(&self, mode: RoundingMode, t: f64, own: &[f64], partner: &[f64]) -> Result<Vec<f64>, OrbitError> {
        let field_fn = self.field;
        let policy = self.policy;
        let result = with_mode(mode, self.backend, |fp| {
            let mut field = |t: f64, s: &[f64], dy: &mut [f64], fp: &Fp| match policy {
                RoundingPolicy::Strict => {
                    with_mode(RoundingMode::ToNearestEven, fp.backend(), |inner| {
                        let m = midpoint(s, partner, inner);
                        field_fn(t, &m, dy, inner);
                    })
                    .expect("backend already active in the enclosing scope");
                }
                RoundingPolicy::MatlabFaithful => {
                    fp.setround(RoundingMode::ToNearestEven);
                    let m = midpoint(s, partner, fp);
                    field_fn(t, &m, dy, fp);
                }
            };
            rk_step(&self.config.tableau, &mut field, t, own, self.config.h, fp)
        })?;
        Ok(result?)
    }
}

/// The averaging filter: two directed pseudo-orbits advanced in lockstep,
/// each coupled to the other's pre-update state, plus their midpoint orbit.
///
/// Per step k the lower orbit takes one step under −∞ with partner
/// `upper[k]`, then the upper orbit takes one step under +∞ with partner
/// `lower[k]` (the value before this step's update), then
/// `averaged[k+1] = midpoint(lower[k+1], upper[k+1])` to-nearest.
pub fn run_filtered(
    model: &Model,
    y0: &[f64],
    config: &StepperConfig,
    policy: RoundingPolicy,
    backend: RoundingBackend,
) -> Result<CoupledOrbitPair, OrbitError> {
    check_dim(model, y0)?;
    run_filtered_with(|t, y, dy, fp| model.eval(t, y, dy, fp), y0, config, policy, backend)
}

/// [`run_filtered`] over an arbitrary vector field of dimension `y0.len()`.
pub fn run_filtered_with<F>(
    field: F,
    y0: &[f64],
    config: &StepperConfig,
    policy: RoundingPolicy,
    backend: RoundingBackend,
) -> Result<CoupledOrbitPair, OrbitError>
where
    F: Fn(f64, &[f64], &mut [f64], &Fp),
{
    config.validate()?;
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OrbitError::NonFiniteState {
            which: "initial",
            step: 0,
        });
    }
    let n = config.steps();
    let mut lower = Vec::with_capacity(n + 1);
    let mut upper = Vec::with_capacity(n + 1);
    let mut averaged = Vec::with_capacity(n + 1);
    lower.push(y0.to_vec());
    upper.push(y0.to_vec());
    averaged.push(average_filter(y0, y0));

    let coupling = Coupling {
        field: &field,
        config,
        policy,
        backend,
    };
    for k in 0..n {
        let t = config.time(k);
        let tag = |which: &'static str| {
            move |e: OrbitError| match e {
                OrbitError::Ode(OdeError::NonFiniteState { .. }) => OrbitError::NonFiniteState { which, step: k },
                other => other,
            }
        };
        let lo = coupling
            .step(RoundingMode::TowardNegInf, t, &lower[k], &upper[k])
            .map_err(tag("lower"))?;
        let hi = coupling
            .step(RoundingMode::TowardPosInf, t, &upper[k], &lower[k])
            .map_err(tag("upper"))?;
        averaged.push(average_filter(&lo, &hi));
        lower.push(lo);
        upper.push(hi);
    }

    let meta = OrbitMeta {
        tableau: config.tableau.name().to_string(),
        h: config.h,
        backend,
        policy: Some(policy),
    };
    let dim = y0.len();
    Ok(CoupledOrbitPair {
        lower: PseudoOrbit::from_states(Some(RoundingMode::TowardNegInf), meta.clone(), dim, lower),
        upper: PseudoOrbit::from_states(Some(RoundingMode::TowardPosInf), meta.clone(), dim, upper),
        averaged: PseudoOrbit::from_states(None, meta, dim, averaged),
    })
}
