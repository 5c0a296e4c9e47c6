//! Helpers shared by the integration tests and the acceptance target.
#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use rand::Rng;

use roundavg::odecore::{integrate, ButcherTableau, StepperConfig};
use roundavg::rounding::{dir_add, dir_div, dir_mul, dir_sub, Fp, RoundingBackend, RoundingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Div];

    pub fn emulated(self, a: f64, b: f64, mode: RoundingMode) -> f64 {
        match self {
            Op::Add => dir_add(a, b, mode),
            Op::Sub => dir_sub(a, b, mode),
            Op::Mul => dir_mul(a, b, mode),
            Op::Div => dir_div(a, b, mode),
        }
    }

    pub fn on(self, fp: &Fp, a: f64, b: f64) -> f64 {
        match self {
            Op::Add => fp.add(a, b),
            Op::Sub => fp.sub(a, b),
            Op::Mul => fp.mul(a, b),
            Op::Div => fp.div(a, b),
        }
    }

    pub fn native(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Div => a / b,
        }
    }

    /// Orders `x` against the exact value of `a ∘ b` (`b ≠ 0` for division).
    pub fn cmp_exact(self, x: f64, a: f64, b: f64) -> Ordering {
        if x == f64::INFINITY {
            return Ordering::Greater;
        }
        if x == f64::NEG_INFINITY {
            return Ordering::Less;
        }
        let (x, da, db) = (Dyadic::from(x), Dyadic::from(a), Dyadic::from(b));
        match self {
            Op::Add => x.cmp(&da.add(&db)),
            Op::Sub => x.cmp(&da.add(&db.neg())),
            Op::Mul => x.cmp(&da.mul(&db)),
            // x ? a/b  <=>  x·b ? a, flipped when b < 0
            Op::Div if b > 0.0 => x.mul(&db).cmp(&da),
            Op::Div => da.cmp(&x.mul(&db)),
        }
    }
}

/// Exact binary64 value `m·2^e`.
#[derive(Debug, Clone)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

impl From<f64> for Dyadic {
    fn from(x: f64) -> Self {
        assert!(x.is_finite());
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1 << 52) - 1);
        let (m, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1 << 52), exp - 1075)
        };
        let m = BigInt::from(m);
        Dyadic {
            m: if x.is_sign_negative() { -m } else { m },
            e,
        }
    }
}

impl Dyadic {
    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt) {
        let e = self.e.min(other.e);
        (&self.m << (self.e - e) as usize, &other.m << (other.e - e) as usize)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let (a, b) = self.aligned(other);
        Dyadic {
            m: a + b,
            e: self.e.min(other.e),
        }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { m: -&self.m, e: self.e }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic {
            m: &self.m * &other.m,
            e: self.e + other.e,
        }
    }

    pub fn cmp(&self, other: &Dyadic) -> Ordering {
        let (a, b) = self.aligned(other);
        a.cmp(&b)
    }
}

/// Checks that `lo`/`hi` are the correctly rounded downward/upward results
/// of `a ∘ b`: they enclose the exact value and are either equal to it or
/// adjacent binary64 values.
pub fn check_directed(op: Op, a: f64, b: f64, lo: f64, hi: f64) -> Result<(), String> {
    let ctx = || format!("{op:?}({a:e}, {b:e}): lo={lo:e} hi={hi:e}");
    if lo.is_nan() || hi.is_nan() {
        return Err(format!("NaN result in {}", ctx()));
    }
    let lo_vs = op.cmp_exact(lo, a, b);
    if lo_vs == Ordering::Greater || op.cmp_exact(hi, a, b) == Ordering::Less {
        return Err(format!("exact value not enclosed in {}", ctx()));
    }
    if lo_vs == Ordering::Equal {
        if lo != hi {
            return Err(format!("exact result not returned by both directions in {}", ctx()));
        }
    } else if lo.next_up() != hi {
        return Err(format!("results are not adjacent in {}", ctx()));
    }
    Ok(())
}

fn scaled(rng: &mut impl Rng, exp_range: std::ops::RangeInclusive<i32>) -> f64 {
    let m: f64 = rng.gen_range(1.0..2.0);
    let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    s * m * 2f64.powi(rng.gen_range(exp_range))
}

/// A finite operand drawn from a mix of raw bit patterns, moderate
/// magnitudes, short dyadic values (exact cases) and subnormals.
pub fn operand(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..5) {
        0 => loop {
            let x = f64::from_bits(rng.gen());
            if x.is_finite() {
                break x;
            }
        },
        1 | 2 => scaled(rng, -40..=40),
        3 => rng.gen_range(-4096i32..4096) as f64 / 64.0,
        _ => {
            let x = f64::from_bits(rng.gen_range(1..1u64 << 52));
            if rng.gen::<bool>() {
                x
            } else {
                -x
            }
        }
    }
}

/// Operand pair for `op`, with extra weight on cancellation for ±.
pub fn operand_pair(op: Op, rng: &mut impl Rng) -> (f64, f64) {
    let a = operand(rng);
    let mut b = operand(rng);
    if matches!(op, Op::Add | Op::Sub) && rng.gen_range(0..4) == 0 {
        let near = a * (1.0 + rng.gen_range(-1e-12..1e-12));
        b = if op == Op::Add { -near } else { near };
    }
    if op == Op::Div && b == 0.0 {
        b = 1.5;
    }
    (a, b)
}

/// Final-state error of `tableau` on y' = y over [0, 1] at step `h`.
pub fn exp_error(tableau: &ButcherTableau, h: f64) -> f64 {
    let cfg = StepperConfig::new(h, 1.0, tableau.clone()).unwrap();
    let states = integrate(
        &cfg,
        |_t: f64, y: &[f64], dy: &mut [f64], _fp: &Fp| dy[0] = y[0],
        &[1.0],
        RoundingMode::ToNearestEven,
        RoundingBackend::SoftwareEmulated,
    )
    .unwrap();
    (states.last().unwrap()[0] - std::f64::consts::E).abs()
}

/// Observed orders log2(e(h)/e(h/2)) for h = 0.1 → 0.05 → 0.025.
pub fn observed_orders(tableau: &ButcherTableau) -> [f64; 2] {
    let e = [0.1, 0.05, 0.025].map(|h| exp_error(tableau, h));
    [(e[0] / e[1]).log2(), (e[1] / e[2]).log2()]
}

/// `sin(2πk/period)` for k in 0..n.
pub fn sinusoid(n: usize, period: f64) -> Vec<f64> {
    (0..n)
        .map(|k| (2.0 * std::f64::consts::PI * k as f64 / period).sin())
        .collect()
}
