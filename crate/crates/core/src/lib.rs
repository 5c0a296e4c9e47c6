//! Chaos suppression in fixed-step ODE simulation by averaging pseudo-orbits
//! computed under opposite directed rounding modes.
//!
//! * [`rounding`] scoped rounding-direction control (hardware or emulated)
//! * [`odecore`] fixed-step explicit Runge-Kutta methods
//! * [`models`] the Lorenz vector field and reference fields
//! * [`orbits`] pseudo-orbits and the averaging filter
//! * [`lyapunov`] largest Lyapunov exponent from a scalar series
//! * [`cli`] configuration, CSV output and the experiment commands

pub mod cli;
pub mod lyapunov;
pub mod models;
pub mod odecore;
pub mod orbits;
pub mod rounding;
