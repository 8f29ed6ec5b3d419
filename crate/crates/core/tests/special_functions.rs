use proptest::prelude::*;
use twave_core::special_functions::{lambert_w, lambert_w0_of_exp, residual, WBranch};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Bisection on `y e^y = x` over a bracket where it is monotone.
fn bisect(x: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |y: f64| y * y.exp() - x;
    let increasing = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn spot_values_against_bisection() {
    for &x in &[-0.3, -0.1, 0.2, 1.0, 5.0, 100.0, 1e6] {
        let w = lambert_w(WBranch::Principal, x).unwrap();
        let b = bisect(x, -1.0, 20.0);
        assert!(
            (w - b).abs() <= 1e-14 * b.abs().max(1.0),
            "W0({x}) = {w}, bisection {b}"
        );
    }
    for &x in &[-0.35, -0.2, -1e-3, -1e-9] {
        let w = lambert_w(WBranch::Lower, x).unwrap();
        let b = bisect(x, -50.0, -1.0);
        assert!(
            (w - b).abs() <= 1e-14 * b.abs(),
            "W-1({x}) = {w}, bisection {b}"
        );
    }
}

#[test]
fn exp_form_agrees_with_direct_form() {
    for &l in &[-5.0, 0.0, 10.0, 200.0] {
        let a = lambert_w0_of_exp(l).unwrap();
        let b = lambert_w(WBranch::Principal, f64::exp(l)).unwrap();
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
    }
    // Beyond the double range: w + ln w = ln x.
    let w = lambert_w0_of_exp(1e4).unwrap();
    assert!((w + w.ln() - 1e4).abs() < 1e-11);
}

proptest! {
    #[test]
    fn principal_round_trip(y in -0.99f64..700.0) {
        let w = lambert_w(WBranch::Principal, y * y.exp()).unwrap();
        prop_assert!((w - y).abs() <= 1e-12 * y.abs().max(1.0), "y = {}, w = {}", y, w);
    }

    #[test]
    fn lower_round_trip(y in -700.0f64..-1.01) {
        let w = lambert_w(WBranch::Lower, y * y.exp()).unwrap();
        prop_assert!((w - y).abs() <= 1e-12 * y.abs(), "y = {}, w = {}", y, w);
    }

    #[test]
    fn defining_identity(t in 0.0f64..1.0, e in -300.0f64..300.0) {
        let x0 = -INV_E * (1.0 - t);
        let w0 = lambert_w(WBranch::Principal, x0).unwrap();
        prop_assert!(residual(w0, x0) <= 1e-13);
        let x1 = 10f64.powf(e);
        let w1 = lambert_w(WBranch::Principal, x1).unwrap();
        prop_assert!(residual(w1, x1) <= 1e-13);
        if x0 < 0.0 {
            let wl = lambert_w(WBranch::Lower, x0).unwrap();
            prop_assert!(residual(wl, x0) <= 1e-13);
        }
    }

    #[test]
    fn principal_inequalities(e in -300.0f64..300.0) {
        let x = 10f64.powf(e);
        let w = lambert_w(WBranch::Principal, x).unwrap();
        prop_assert!(w > 0.0);
        if x > std::f64::consts::E {
            prop_assert!(w < x.ln());
        }
    }

    #[test]
    fn branch_monotonicity(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        // Map [0, 1) onto [-1/e, 0).
        let xl = -INV_E * (1.0 - lo);
        let xh = -INV_E * (1.0 - hi);
        prop_assert!(lambert_w(WBranch::Principal, xl).unwrap() < lambert_w(WBranch::Principal, xh).unwrap());
        prop_assert!(lambert_w(WBranch::Lower, xl).unwrap() > lambert_w(WBranch::Lower, xh).unwrap());
    }
}
