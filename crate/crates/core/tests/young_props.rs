use proptest::prelude::*;
use symlab::young::luxemburg_norm_values;
use symlab::YoungFunction;

fn young() -> impl Strategy<Value = YoungFunction> {
    prop_oneof![
        (1.0..5.0f64).prop_map(|p| YoungFunction::power(p).unwrap()),
        Just(YoungFunction::SqrtShift),
        prop::collection::vec(0.1..2.0f64, 1..5).prop_map(|slopes| {
            let mut sorted = slopes;
            sorted.sort_by(f64::total_cmp);
            let mut pts = vec![(0.0, 0.0)];
            let (mut t, mut v) = (0.0, 0.0);
            for s in sorted {
                t += 0.5;
                v += 0.5 * s;
                pts.push((t, v));
            }
            YoungFunction::piecewise(pts).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn convex_and_nondecreasing(phi in young(), s in 0.0..4.0f64, t in 0.0..4.0f64) {
        let (a, b) = (phi.value(s), phi.value(t));
        let mid = phi.value(0.5 * (s + t));
        prop_assert!(mid <= 0.5 * (a + b) + 1e-9 * (1.0 + a + b));
        prop_assert!(phi.value(s.max(t)) >= phi.value(s.min(t)));
        prop_assert_eq!(phi.value(0.0), 0.0);
    }

    #[test]
    fn young_inequality(phi in young(), s in 0.0..4.0f64, t in 0.0..4.0f64) {
        let psi = phi.conjugate().unwrap();
        let bound = phi.value(s) + psi.value(t);
        prop_assert!(s * t <= bound + 1e-6 * (1.0 + s * t));
    }

    #[test]
    fn power_biconjugate(p in 1.1..5.0f64, t in 0.0..3.0f64) {
        let phi = YoungFunction::power(p).unwrap();
        let back = phi.conjugate().unwrap().conjugate().unwrap();
        prop_assert!((back.value(t) - phi.value(t)).abs() <= 1e-9 * (1.0 + phi.value(t)));
    }

    #[test]
    fn luxemburg_is_homogeneous(phi in young(), values in prop::collection::vec(-2.0..2.0f64, 1..40), c in 0.1..10.0f64) {
        let n = luxemburg_norm_values(&phi, &values, 0.1);
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let m = luxemburg_norm_values(&phi, &scaled, 0.1);
        prop_assert!((m - c * n).abs() <= 1e-8 * (1.0 + c * n));
    }

    #[test]
    fn truncation_has_linear_bounds(p in 1.0..4.0f64, r in 0.5..3.0f64, t in 0.0..10.0f64) {
        let phi = YoungFunction::power(p).unwrap().truncate(r).unwrap();
        let (t0, delta) = phi.linear_bounds().unwrap();
        prop_assert!(delta > 0.0);
        let v = phi.value(t);
        if t >= t0 {
            prop_assert!(delta * (t - t0) <= v + 1e-9 && v <= (t - t0) / delta + 1e-9);
        } else {
            prop_assert!(v.abs() <= 1e-12);
        }
    }
}
