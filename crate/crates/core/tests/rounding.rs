mod common;

use common::{check_directed, operand_pair, Op};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roundavg::rounding::{active_hardware_mode, hardware_available, with_mode, RoundingBackend, RoundingMode};

use RoundingMode::{ToNearestEven as Rne, TowardNegInf as Down, TowardPosInf as Up};

const PAIRS_PER_OP: usize = 100_000;

#[test]
fn emulated_results_are_correctly_rounded() {
    for (seed, op) in Op::ALL.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + seed as u64);
        for _ in 0..PAIRS_PER_OP {
            let (a, b) = operand_pair(op, &mut rng);
            let lo = op.emulated(a, b, Down);
            let hi = op.emulated(a, b, Up);
            let mid = op.emulated(a, b, Rne);
            if let Err(e) = check_directed(op, a, b, lo, hi) {
                panic!("{e}");
            }
            assert!(lo <= mid && mid <= hi, "{op:?}({a:e}, {b:e}) not bracketed");
            assert_eq!(
                mid.to_bits(),
                op.native(a, b).to_bits(),
                "{op:?}({a:e}, {b:e}) to-nearest"
            );
        }
    }
}

#[test]
fn hardware_matches_emulated_bit_for_bit() {
    if !hardware_available() {
        eprintln!("notice: hardware rounding control unavailable, backend comparison skipped");
        return;
    }
    for (seed, op) in Op::ALL.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbacc + seed as u64);
        for _ in 0..PAIRS_PER_OP / 4 {
            let (a, b) = operand_pair(op, &mut rng);
            for mode in RoundingMode::ALL {
                let hw = with_mode(mode, RoundingBackend::HardwareEnv, |fp| op.on(fp, a, b)).unwrap();
                let em = op.emulated(a, b, mode);
                assert_eq!(hw.to_bits(), em.to_bits(), "{op:?}({a:e}, {b:e}) under {mode:?}");
            }
        }
    }
}

#[test]
fn spec_examples() {
    for backend in [RoundingBackend::SoftwareEmulated, RoundingBackend::preferred()] {
        assert_eq!(with_mode(Down, backend, |fp| fp.add(1.0, 1e-20)).unwrap(), 1.0);
        assert_eq!(
            with_mode(Up, backend, |fp| fp.add(1.0, 1e-20)).unwrap(),
            1.0000000000000002
        );
        assert_eq!(with_mode(Rne, backend, |fp| fp.add(0.5, 0.25)).unwrap(), 0.75);
        assert_eq!(with_mode(Up, backend, |fp| fp.mul(2.0, 4.0)).unwrap(), 8.0);
    }
}

#[test]
fn nested_scopes_restore_the_outer_mode() {
    if !hardware_available() {
        eprintln!("notice: hardware rounding control unavailable, restoration probe skipped");
        return;
    }
    let hw = RoundingBackend::HardwareEnv;
    let before = active_hardware_mode();
    with_mode(Up, hw, |_| {
        assert_eq!(active_hardware_mode(), Some(Up));
        with_mode(Down, hw, |_| assert_eq!(active_hardware_mode(), Some(Down))).unwrap();
        assert_eq!(active_hardware_mode(), Some(Up));
    })
    .unwrap();
    assert_eq!(active_hardware_mode(), before);
}

#[test]
fn overflow_follows_the_direction() {
    let big = f64::MAX;
    assert_eq!(Op::Add.emulated(big, big, Down), f64::MAX);
    assert_eq!(Op::Add.emulated(big, big, Up), f64::INFINITY);
    assert_eq!(Op::Add.emulated(-big, -big, Up), -f64::MAX);
    assert_eq!(Op::Add.emulated(-big, -big, Down), f64::NEG_INFINITY);
    assert_eq!(Op::Mul.emulated(1e300, -1e300, Up), -f64::MAX);
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4096))]

    #[test]
    fn bracketing_holds_for_arbitrary_finite_operands(a in finite(), b in finite()) {
        for op in Op::ALL {
            if op == Op::Div && b == 0.0 {
                continue;
            }
            let lo = op.emulated(a, b, Down);
            let mid = op.emulated(a, b, Rne);
            let hi = op.emulated(a, b, Up);
            prop_assert!(lo <= mid && mid <= hi);
            prop_assert!(check_directed(op, a, b, lo, hi).is_ok(), "{:?}", check_directed(op, a, b, lo, hi));
        }
    }

    #[test]
    fn exact_results_are_mode_independent(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000, s in -30i32..30) {
        let (a, b) = (a as f64 * 2f64.powi(s), b as f64);
        for op in [Op::Add, Op::Sub, Op::Mul] {
            let r = op.native(a, b);
            for mode in RoundingMode::ALL {
                prop_assert_eq!(op.emulated(a, b, mode), r);
            }
        }
        if b != 0.0 {
            let p = a * b;
            for mode in RoundingMode::ALL {
                prop_assert_eq!(Op::Div.emulated(p, b, mode), a);
            }
        }
    }
}

#[test]
fn oracle_rejects_wrong_results() {
    let exact = (0.1f64 + 0.2).next_down();
    assert!(check_directed(Op::Add, 0.1, 0.2, exact, 0.1 + 0.2).is_ok());
    assert!(check_directed(Op::Add, 0.1, 0.2, 0.1 + 0.2, 0.1 + 0.2).is_err());
    assert!(check_directed(Op::Add, 0.1, 0.2, exact.next_down(), 0.1 + 0.2).is_err());
    assert!(check_directed(Op::Div, 1.0, 3.0, 1.0 / 3.0, (1.0f64 / 3.0).next_up()).is_ok());
    assert!(check_directed(Op::Div, 1.0, -3.0, -1.0 / 3.0, (-1.0f64 / 3.0).next_up()).is_err());
    assert!(check_directed(Op::Mul, 3.0, 5.0, 15.0, 15.0).is_ok());
}
