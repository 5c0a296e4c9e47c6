use proptest::prelude::*;
use roundavg::models::{lorenz_field, LorenzParams, StateVector};
use roundavg::rounding::{Fp, RoundingMode};

fn field(p: &LorenzParams, s: &StateVector, mode: RoundingMode) -> [f64; 3] {
    lorenz_field(p, s, &Fp::emulated(mode)).to_array()
}

/// Directed rounding brackets a composition only while every step is
/// monotone in its rounded input. σ(y − x) qualifies (σ > 0); the other two
/// components subtract a rounded product, which reverses the direction.
#[test]
fn subtracted_product_breaks_component_bracketing() {
    let p = LorenzParams::EXPERIMENT;
    let s = StateVector::new(0.0, 0.0, 191.05881041635922);
    let lo = field(&p, &s, RoundingMode::TowardNegInf)[2];
    let mid = field(&p, &s, RoundingMode::ToNearestEven)[2];
    assert!(lo > mid, "{lo} {mid}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn x_component_brackets_to_nearest(x in -100.0f64..100.0, y in -100.0f64..100.0, z in -50.0f64..250.0) {
        let p = LorenzParams::EXPERIMENT;
        let s = StateVector::new(x, y, z);
        let lo = field(&p, &s, RoundingMode::TowardNegInf)[0];
        let mid = field(&p, &s, RoundingMode::ToNearestEven)[0];
        let hi = field(&p, &s, RoundingMode::TowardPosInf)[0];
        prop_assert!(lo <= mid && mid <= hi, "{} {} {}", lo, mid, hi);
    }

    #[test]
    fn directed_fields_stay_close_to_nearest(x in -100.0f64..100.0, y in -100.0f64..100.0, z in -50.0f64..250.0) {
        let p = LorenzParams::EXPERIMENT;
        let s = StateVector::new(x, y, z);
        let mid = field(&p, &s, RoundingMode::ToNearestEven);
        for mode in [RoundingMode::TowardNegInf, RoundingMode::TowardPosInf] {
            let d = field(&p, &s, mode);
            for c in 0..3 {
                let scale = 8.0 * f64::EPSILON * (x.abs() + y.abs() + z.abs() + 1.0) * 100.0;
                prop_assert!((d[c] - mid[c]).abs() <= scale, "component {}: {} vs {}", c, d[c], mid[c]);
            }
        }
    }
}
