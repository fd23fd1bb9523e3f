use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use duality_core::bell::{chsh, CorrelationModel, NetworkModel};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_depends_on_the_difference(a in -7.0..7.0f64, b in -7.0..7.0f64, shift in -7.0..7.0f64) {
        let m = NetworkModel::b1().unwrap();
        let e = m.correlation(a, b).unwrap();
        prop_assert!((e - m.correlation(a + shift, b + shift).unwrap()).abs() < 1e-12);
        prop_assert!((e - (a - b).cos()).abs() < 1e-12);
    }

    #[test]
    fn chsh_respects_tsirelson_and_duality(q in prop::array::uniform4(-7.0..7.0f64)) {
        let (b1, b2) = (NetworkModel::b1().unwrap(), NetworkModel::b2().unwrap());
        let s1 = chsh(&b1, q[0], q[1], q[2], q[3]).unwrap();
        let s2 = chsh(&b2, q[0], q[1], q[2], q[3]).unwrap();
        prop_assert!(s1.abs() <= 2.0 * SQRT_2 + 1e-9);
        prop_assert!((s1 - s2).abs() < 1e-12);
    }
}

#[test]
fn canonical_settings_reach_tsirelson() {
    let s = chsh(&NetworkModel::b2().unwrap(), 0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
    assert!((s - 2.0 * SQRT_2).abs() < 1e-12);
}
