// Thin binding to the C99 <fenv.h> rounding controls.

use super::RoundingMode;

#[cfg(all(target_os = "linux", any(target_arch = "x86_64", target_arch = "aarch64")))]
mod sys {
    use std::ffi::c_int;

    #[cfg(target_arch = "x86_64")]
    pub const FE_TONEAREST: c_int = 0x000;
    #[cfg(target_arch = "x86_64")]
    pub const FE_DOWNWARD: c_int = 0x400;
    #[cfg(target_arch = "x86_64")]
    pub const FE_UPWARD: c_int = 0x800;

    #[cfg(target_arch = "aarch64")]
    pub const FE_TONEAREST: c_int = 0x000000;
    #[cfg(target_arch = "aarch64")]
    pub const FE_UPWARD: c_int = 0x400000;
    #[cfg(target_arch = "aarch64")]
    pub const FE_DOWNWARD: c_int = 0x800000;

    #[link(name = "m")]
    extern "C" {
        pub fn fesetround(round: c_int) -> c_int;
        pub fn fegetround() -> c_int;
    }
}

#[cfg(all(target_os = "linux", any(target_arch = "x86_64", target_arch = "aarch64")))]
mod imp {
    use std::hint::black_box;
    use std::sync::OnceLock;

    use super::sys;
    use super::RoundingMode;

    fn code(mode: RoundingMode) -> i32 {
        match mode {
            RoundingMode::TowardNegInf => sys::FE_DOWNWARD,
            RoundingMode::TowardPosInf => sys::FE_UPWARD,
            RoundingMode::ToNearestEven => sys::FE_TONEAREST,
        }
    }

    pub fn available() -> bool {
        static PROBE: OnceLock<bool> = OnceLock::new();
        *PROBE.get_or_init(|| {
            // The probe must observe a directed result, not just a successful
            // return code: some emulators accept fesetround and ignore it.
            let saved = get_raw();
            let ok_set = unsafe { sys::fesetround(sys::FE_UPWARD) } == 0;
            let up = black_box(black_box(1.0f64) + black_box(1e-20f64));
            restore_raw(saved);
            ok_set && up > 1.0
        })
    }

    pub fn set(mode: RoundingMode) {
        unsafe {
            sys::fesetround(code(mode));
        }
    }

    pub fn get_raw() -> i32 {
        unsafe { sys::fegetround() }
    }

    pub fn restore_raw(raw: i32) {
        unsafe {
            sys::fesetround(raw);
        }
    }

    pub fn current() -> Option<RoundingMode> {
        match get_raw() {
            r if r == sys::FE_DOWNWARD => Some(RoundingMode::TowardNegInf),
            r if r == sys::FE_UPWARD => Some(RoundingMode::TowardPosInf),
            r if r == sys::FE_TONEAREST => Some(RoundingMode::ToNearestEven),
            _ => None,
        }
    }
}

#[cfg(not(all(target_os = "linux", any(target_arch = "x86_64", target_arch = "aarch64"))))]
mod imp {
    use super::RoundingMode;

    pub fn available() -> bool {
        false
    }
    pub fn set(_mode: RoundingMode) {}
    pub fn get_raw() -> i32 {
        0
    }
    pub fn restore_raw(_raw: i32) {}
    pub fn current() -> Option<RoundingMode> {
        None
    }
}

pub(super) use imp::{available, current, get_raw, restore_raw, set};
