//! Scoped control of the binary64 rounding direction.
//!
//! Two backends are provided. [`RoundingBackend::HardwareEnv`] switches the
//! thread's floating-point environment (`fesetround`) for the duration of a
//! scope and evaluates every operation behind an optimization barrier so the
//! compiler cannot fold or hoist it out of the scope.
//! [`RoundingBackend::SoftwareEmulated`] never touches the environment: it
//! evaluates to-nearest and corrects the result with an error-free
//! transformation (see [`emulated`]).
//!
//! Code that wants its arithmetic rounded in a given direction receives an
//! [`Fp`] handle from [`with_mode`] and performs every `+ - * /` through it.

pub mod emulated;
mod hardware;

use std::cell::Cell;
use std::fmt;
use std::hint::black_box;
use std::marker::PhantomData;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emulated::{dir_add, dir_div, dir_mul, dir_sub};

/// IEEE-754 rounding direction. Toward-zero is deliberately absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    TowardNegInf,
    TowardPosInf,
    ToNearestEven,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 3] = [
        RoundingMode::TowardNegInf,
        RoundingMode::ToNearestEven,
        RoundingMode::TowardPosInf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoundingMode::TowardNegInf => "toward_neg_inf",
            RoundingMode::TowardPosInf => "toward_pos_inf",
            RoundingMode::ToNearestEven => "to_nearest_even",
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingBackend {
    #[serde(rename = "hardware")]
    HardwareEnv,
    #[serde(rename = "emulated")]
    SoftwareEmulated,
}

impl RoundingBackend {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundingBackend::HardwareEnv => "hardware",
            RoundingBackend::SoftwareEmulated => "emulated",
        }
    }

    /// The hardware backend when this platform supports it, otherwise the
    /// emulated one.
    pub fn preferred() -> Self {
        if hardware_available() {
            RoundingBackend::HardwareEnv
        } else {
            RoundingBackend::SoftwareEmulated
        }
    }
}

impl fmt::Display for RoundingBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoundingBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hardware" => Ok(RoundingBackend::HardwareEnv),
            "emulated" => Ok(RoundingBackend::SoftwareEmulated),
            other => Err(format!(
                "unknown rounding backend `{other}` (expected `hardware` or `emulated`)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundingError {
    #[error("hardware floating-point environment is not settable on this platform")]
    HardwareUnavailable,
}

/// True when [`RoundingBackend::HardwareEnv`] can be used on this thread.
pub fn hardware_available() -> bool {
    hardware::available()
}

/// The rounding direction currently installed in this thread's hardware
/// environment, or `None` when the environment cannot be queried or holds a
/// mode outside [`RoundingMode`].
pub fn active_hardware_mode() -> Option<RoundingMode> {
    hardware::current()
}

/// Arithmetic handle valid for the duration of one rounding scope.
///
/// Not `Send`/`Sync`: a scope belongs to the thread that opened it.
pub struct Fp {
    mode: Cell<RoundingMode>,
    backend: RoundingBackend,
    _thread_bound: PhantomData<*const ()>,
}

impl Fp {
    /// A stateless software handle; usable anywhere without opening a scope.
    pub fn emulated(mode: RoundingMode) -> Self {
        Fp {
            mode: Cell::new(mode),
            backend: RoundingBackend::SoftwareEmulated,
            _thread_bound: PhantomData,
        }
    }

    pub fn mode(&self) -> RoundingMode {
        self.mode.get()
    }

    pub fn backend(&self) -> RoundingBackend {
        self.backend
    }

    /// Changes the active direction for the remainder of the enclosing scope
    /// without restoring it afterwards. The scope itself still restores the
    /// mode that was active before it was entered.
    pub fn setround(&self, mode: RoundingMode) {
        self.mode.set(mode);
        if self.backend == RoundingBackend::HardwareEnv {
            hardware::set(mode);
        }
    }

    #[inline]
    pub fn add(&self, a: f64, b: f64) -> f64 {
        match self.backend {
            RoundingBackend::HardwareEnv => black_box(black_box(a) + black_box(b)),
            RoundingBackend::SoftwareEmulated => dir_add(a, b, self.mode.get()),
        }
    }

    #[inline]
    pub fn sub(&self, a: f64, b: f64) -> f64 {
        match self.backend {
            RoundingBackend::HardwareEnv => black_box(black_box(a) - black_box(b)),
            RoundingBackend::SoftwareEmulated => dir_sub(a, b, self.mode.get()),
        }
    }

    #[inline]
    pub fn mul(&self, a: f64, b: f64) -> f64 {
        match self.backend {
            RoundingBackend::HardwareEnv => black_box(black_box(a) * black_box(b)),
            RoundingBackend::SoftwareEmulated => dir_mul(a, b, self.mode.get()),
        }
    }

    #[inline]
    pub fn div(&self, a: f64, b: f64) -> f64 {
        match self.backend {
            RoundingBackend::HardwareEnv => black_box(black_box(a) / black_box(b)),
            RoundingBackend::SoftwareEmulated => dir_div(a, b, self.mode.get()),
        }
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fp")
            .field("mode", &self.mode.get())
            .field("backend", &self.backend)
            .finish()
    }
}

/// Restores the saved hardware mode on drop, including during unwinding.
struct EnvGuard {
    saved: i32,
}

impl Drop for EnvGuard {
    fn drop(&mut self) {
        hardware::restore_raw(self.saved);
    }
}

/// Runs `computation` with every operation performed through the supplied
/// [`Fp`] rounded in direction `mode`.
///
/// With the hardware backend the previous environment mode is reinstated when
/// the scope exits, whether `computation` returns normally or panics. The
/// emulated backend has no global state; it assumes the ambient environment
/// is the default to-nearest mode.
pub fn with_mode<R>(
    mode: RoundingMode,
    backend: RoundingBackend,
    computation: impl FnOnce(&Fp) -> R,
) -> Result<R, RoundingError> {
    match backend {
        RoundingBackend::SoftwareEmulated => Ok(computation(&Fp::emulated(mode))),
        RoundingBackend::HardwareEnv => {
            if !hardware::available() {
                return Err(RoundingError::HardwareUnavailable);
            }
            let _guard = EnvGuard {
                saved: hardware::get_raw(),
            };
            hardware::set(mode);
            let fp = Fp {
                mode: Cell::new(mode),
                backend,
                _thread_bound: PhantomData,
            };
            Ok(computation(&fp))
        }
    }
}
