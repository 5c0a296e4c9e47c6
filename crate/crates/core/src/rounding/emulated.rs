//! Correctly rounded directed `+ - * /` computed under the default
//! to-nearest environment.
//!
//! Each operation first produces the to-nearest result `q`, then recovers the
//! sign of the exact residual `exact - q` with an error-free transformation
//! (two-sum for addition, an FMA residual for multiplication, the FMA
//! remainder for division). When the residual points the other way from the
//! requested direction, `q` is stepped to its neighbour. Products and
//! quotients are formed on normalized significands so the residual stays
//! exact even when the final result is subnormal.

use std::cmp::Ordering;

use super::RoundingMode;

pub fn dir_add(a: f64, b: f64, mode: RoundingMode) -> f64 {
    let s = a + b;
    if mode == RoundingMode::ToNearestEven || !a.is_finite() || !b.is_finite() {
        return s;
    }
    if s.is_infinite() {
        return clamp_overflow(s, mode);
    }
    // Knuth two-sum: s + err == a + b exactly.
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err == 0.0 {
        if s == 0.0 {
            return exact_zero_sum(a, b, mode);
        }
        return s;
    }
    step(s, err.partial_cmp(&0.0).unwrap_or(Ordering::Equal), mode)
}

pub fn dir_sub(a: f64, b: f64, mode: RoundingMode) -> f64 {
    dir_add(a, -b, mode)
}

pub fn dir_mul(a: f64, b: f64, mode: RoundingMode) -> f64 {
    if mode == RoundingMode::ToNearestEven || !a.is_finite() || !b.is_finite() || a == 0.0 || b == 0.0 {
        return a * b;
    }
    let (ma, ea) = split(a);
    let (mb, eb) = split(b);
    let hi = ma * mb;
    let lo = ma.mul_add(mb, -hi);
    round_scaled(hi, sign_of(lo), ea + eb, mode)
}

pub fn dir_div(a: f64, b: f64, mode: RoundingMode) -> f64 {
    if mode == RoundingMode::ToNearestEven || !a.is_finite() || !b.is_finite() || a == 0.0 || b == 0.0 {
        return a / b;
    }
    let (ma, ea) = split(a);
    let (mb, eb) = split(b);
    let hi = ma / mb;
    // ma - hi*mb is representable, so the FMA gives it exactly.
    let rem = (-hi).mul_add(mb, ma);
    let lo = match sign_of(rem) {
        Ordering::Equal => Ordering::Equal,
        s if mb > 0.0 => s,
        s => s.reverse(),
    };
    round_scaled(hi, lo, ea - eb, mode)
}

/// `exact = (hi + lo) * 2^exp` where `hi` is the to-nearest value of the
/// normalized exact result and `lo` carries the sign of its residual.
fn round_scaled(hi: f64, lo: Ordering, exp: i32, mode: RoundingMode) -> f64 {
    let q = scale_to_nearest(hi, exp);
    if q.is_infinite() {
        return clamp_overflow(q, mode);
    }
    // Scaling back up is exact; hi - back is exact because back is hi
    // rounded onto a coarser grid (or zero).
    let back = scale_exact_up(q, -exp);
    let d = hi - back;
    let residual = if d != 0.0 { sign_of(d) } else { lo };
    step(q, residual, mode)
}

fn step(q: f64, residual: Ordering, mode: RoundingMode) -> f64 {
    match (mode, residual) {
        (RoundingMode::TowardNegInf, Ordering::Less) => q.next_down(),
        (RoundingMode::TowardPosInf, Ordering::Greater) => q.next_up(),
        _ => q,
    }
}

fn clamp_overflow(inf: f64, mode: RoundingMode) -> f64 {
    match mode {
        RoundingMode::TowardNegInf if inf > 0.0 => f64::MAX,
        RoundingMode::TowardPosInf if inf < 0.0 => f64::MIN,
        _ => inf,
    }
}

/// Exactly-zero sums: equal-signed zeros keep their sign, every other exact
/// cancellation is +0 except when rounding toward -inf.
fn exact_zero_sum(a: f64, b: f64, mode: RoundingMode) -> f64 {
    if a == 0.0 && b == 0.0 && a.is_sign_negative() == b.is_sign_negative() {
        return a;
    }
    if mode == RoundingMode::TowardNegInf {
        -0.0
    } else {
        0.0
    }
}

fn sign_of(x: f64) -> Ordering {
    if x > 0.0 {
        Ordering::Greater
    } else if x < 0.0 {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Splits finite nonzero `x` into a signed significand in [1, 2) and an
/// exponent: `x == m * 2^e`.
fn split(x: f64) -> (f64, i32) {
    let (x, bias) = if x.abs() < f64::MIN_POSITIVE {
        (x * pow2(54), 54)
    } else {
        (x, 0)
    };
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32 - 1023;
    let m = f64::from_bits((bits & !(0x7ff_u64 << 52)) | (1023_u64 << 52));
    (m, e - bias)
}

/// To-nearest value of `x * 2^e` for |x| in [0.25, 4), using a single
/// rounding.
fn scale_to_nearest(x: f64, e: i32) -> f64 {
    if e >= -1022 {
        let mut x = x;
        let mut e = e;
        while e > 1023 {
            x *= pow2(1023);
            e -= 1023;
        }
        x * pow2(e)
    } else if e < -1077 {
        // |x * 2^e| < 2^-1075: below half the smallest subnormal.
        0.0_f64.copysign(x)
    } else {
        (x * pow2(-60)) * pow2(e + 60)
    }
}

fn scale_exact_up(x: f64, e: i32) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1023 {
        x *= pow2(1023);
        e -= 1023;
    }
    while e < -1022 {
        x *= pow2(-1022);
        e += 1022;
    }
    x * pow2(e)
}
