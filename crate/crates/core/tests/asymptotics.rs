use proptest::prelude::*;
use twave_core::asymptotics::{
    ds_dxi, leading_order, make_profile, make_w_transform, phi_of_s, phi_of_xi, reduced_orbit,
    verify_xi_divergence, xi_of_phi, xi_of_s_closed_form,
};
use twave_core::params::ModelParams;

fn even_p() -> impl Strategy<Value = u32> {
    (1u32..=3).prop_map(|k| 2 * k)
}

/// `(params, phi0)` with `phi0` inside the admissible anchor range.
fn admissible() -> impl Strategy<Value = (ModelParams, f64)> {
    (even_p(), 0.3f64..4.0, 0.02f64..0.95).prop_map(|(p, c, f)| {
        let pr = ModelParams::new(p, c, 1).unwrap();
        let phi0 = f * pr.anchor_bound();
        (pr, phi0)
    })
}

proptest! {
    #[test]
    fn profile_is_increasing_and_regular((pr, phi0) in admissible(), t in -60.0f64..20.0, d in 1e-3f64..5.0) {
        // The tail decays like e^(xi/c); scale xi so phi stays a normal float.
        let prof = make_profile(&pr, phi0).unwrap();
        let a = t * pr.c();
        let (lo, hi) = (phi_of_xi(&prof, a), phi_of_xi(&prof, a + d * pr.c()));
        prop_assert!(lo.is_finite() && lo > 0.0);
        prop_assert!(hi >= lo);
        // Strict until the profile saturates at the fixed point in f64.
        if lo < 0.999 * pr.reduced_flow_zero() {
            prop_assert!(hi > lo);
        }
        // Bounded by the reduced-flow fixed point.
        prop_assert!(hi < pr.reduced_flow_zero() * (1.0 + 1e-12));
    }

    #[test]
    fn xi_of_phi_inverts_phi_of_xi((pr, phi0) in admissible(), xi in -30.0f64..2.0) {
        let prof = make_profile(&pr, phi0).unwrap();
        let phi = phi_of_xi(&prof, xi);
        let back = xi_of_phi(&pr, phi0, phi).unwrap();
        prop_assert!((back - xi).abs() <= 1e-9 * xi.abs().max(1.0), "{} -> {} -> {}", xi, phi, back);
    }

    #[test]
    fn w_identity_and_closed_form_derivative((pr, phi0) in admissible(), s in -50.0f64..50.0) {
        let wt = make_w_transform(&pr, phi0).unwrap();
        let phi = phi_of_s(&wt, &pr, s);
        let prod = ds_dxi(&wt, s) * phi.powi(pr.p() as i32);
        prop_assert!((prod - 1.0).abs() <= 1e-12);
        // d xi / ds = 1 / (ds/dxi) by central differences.
        let h = 1e-4 * s.abs().max(1.0);
        let fd = (xi_of_s_closed_form(&wt, s + h) - xi_of_s_closed_form(&wt, s - h)) / (2.0 * h);
        let want = 1.0 / ds_dxi(&wt, s);
        // Rounding in xi itself limits the difference quotient.
        let xi = xi_of_s_closed_form(&wt, s).abs().max(1.0);
        let tol = 1e-6 + 8.0 * f64::EPSILON * xi / (h * want);
        prop_assert!((fd / want - 1.0).abs() <= tol, "fd {} want {}", fd, want);
    }
}

#[test]
fn closed_form_solves_the_reduced_system() {
    for (p, c, phi0) in [
        (2, 1.0, 0.1),
        (2, 3.0, 0.1),
        (4, 1.0, 0.1),
        (6, 0.5, 0.05),
        (2, 0.7, 0.3),
    ] {
        let pr = ModelParams::new(p, c, 1).unwrap();
        let prof = make_profile(&pr, phi0).unwrap();
        let samples = reduced_orbit(&pr, phi0, -15.0, 1e-12).unwrap();
        assert!(samples.first().unwrap().0 <= -15.0 + 1e-9);
        let sup = samples
            .iter()
            .map(|&(xi, phi)| (phi_of_xi(&prof, xi) / phi - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-9, "(p={p}, c={c}, phi0={phi0}): {sup:e}");
    }
}

#[test]
fn two_routes_agree() {
    // phi_of_s at quadrature xi(s) versus phi_of_xi at the same xi.
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    let phi0 = 0.1;
    let wt = make_w_transform(&pr, phi0).unwrap();
    let prof = make_profile(&pr, phi0).unwrap();
    let targets = [-1.0, -10.0, -100.0, -1e3, -1e4];
    for (s, xi) in verify_xi_divergence(&wt, &pr, &targets).unwrap() {
        let a = phi_of_s(&wt, &pr, s);
        let b = phi_of_xi(&prof, xi);
        assert!((a / b - 1.0).abs() <= 1e-8, "s = {s}: {a} vs {b}");
    }
}

#[test]
fn leading_order_tail() {
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    let prof = make_profile(&pr, 0.1).unwrap();
    assert!((leading_order(&prof, -10.0) - 4.5861e-6).abs() < 1e-9);
    assert!((phi_of_xi(&prof, -10.0) / leading_order(&prof, -10.0) - 1.0).abs() < 1e-8);
    assert!(leading_order(&prof, -1.0) / phi_of_xi(&prof, -1.0) > 1.0 + 1e-4);
    // Bernoulli solution: phi^-2 = 2 + 98 e^(-2 xi).
    let oracle = |xi: f64| (2.0 + 98.0 * (-2.0 * xi).exp()).powf(-0.5);
    for xi in [-30.0, -5.0, 0.0, 3.0] {
        assert!(
            (phi_of_xi(&prof, xi) / oracle(xi) - 1.0).abs() < 1e-13,
            "xi = {xi}"
        );
    }
    assert!((phi_of_xi(&prof, -30.0) / 9.44e-15 - 1.0).abs() < 2e-3);
    assert!((phi_of_xi(&prof, 60.0) - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn decay_slope_is_one_over_c() {
    for c in [1.0, 3.0] {
        let pr = ModelParams::new(2, c, 1).unwrap();
        let prof = make_profile(&pr, 0.01).unwrap();
        let slope = (phi_of_xi(&prof, -8.0).ln() - phi_of_xi(&prof, -12.0).ln()) / 4.0;
        assert!((slope * c - 1.0).abs() < 0.01, "c = {c}: {slope}");
    }
}

#[test]
fn divergence_in_s() {
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    let wt = make_w_transform(&pr, 0.1).unwrap();
    let v = verify_xi_divergence(&wt, &pr, &[0.0, -1.0, -10.0]).unwrap();
    assert_eq!(v[0].1, 0.0);
    assert!(v[2].1 < v[1].1 && v[1].1 < 0.0);
    assert!(verify_xi_divergence(&wt, &pr, &[-1.0, -0.5]).is_err());
    assert!(verify_xi_divergence(&wt, &pr, &[1.0]).is_err());
    let other = ModelParams::new(4, 1.0, 1).unwrap();
    assert!(verify_xi_divergence(&wt, &other, &[-1.0]).is_err());
}
