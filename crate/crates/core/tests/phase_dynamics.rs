use proptest::prelude::*;
use twave_core::center_manifold::cm_graph;
use twave_core::ode::{solve_dopri5, FnSystem, Hooks, SolveOptions};
use twave_core::params::ModelParams;
use twave_core::phase_dynamics::{
    connecting_orbit, equilibria, integrate, jacobian_s, origin_eigenvectors, vector_field_s,
    vector_field_xi, Classification, PhaseState, TimeParam,
};

fn even_p() -> impl Strategy<Value = u32> {
    (1u32..=5).prop_map(|k| 2 * k)
}

proptest! {
    #[test]
    fn slope_equivalence_off_the_singular_line(
        p in even_p(),
        c in 0.05f64..5.0,
        delta in 0u8..=1,
        phi in prop_oneof![-2.0f64..-0.05, 0.05f64..2.0],
        psi in -3.0f64..3.0,
    ) {
        let pr = ModelParams::new(p, c, delta).unwrap();
        let s = PhaseState::new(phi, psi);
        let a = vector_field_xi(&pr, s).unwrap();
        let b = vector_field_s(&pr, s);
        let (na, nb) = (a.phi.hypot(a.psi), b.phi.hypot(b.psi));
        prop_assume!(na > 1e-6 && nb > 1e-300);
        let cross = (a.phi * b.psi - a.psi * b.phi) / (na * nb);
        let dot = (a.phi * b.phi + a.psi * b.psi) / (na * nb);
        prop_assert!(cross.abs() <= 1e-12, "cross {}", cross);
        prop_assert!(dot > 0.0);
    }

    #[test]
    fn e_delta_is_a_sink(p in even_p(), c in 1e-3f64..50.0) {
        let pr = ModelParams::new(p, c, 1).unwrap();
        let eqs = equilibria(&pr);
        prop_assert_eq!(eqs.len(), 3);
        let d = c * c - 4.0 * p as f64;
        for e in eqs.iter().filter(|e| e.location.phi != 0.0) {
            prop_assert!(e.eigenvalues.iter().all(|z| z.re < 0.0));
            // lambda^2 + c lambda + p = 0
            for z in &e.eigenvalues {
                let r = z * z + z * c + p as f64;
                prop_assert!(r.norm() <= 1e-9 * (p as f64 + c * c));
            }
            let spiral = matches!(e.classification, Classification::SpiralSink);
            prop_assert_eq!(spiral, d < 0.0);
        }
    }

    #[test]
    fn origin_eigenstructure(p in even_p(), c in 0.01f64..20.0) {
        let pr = ModelParams::new(p, c, 1).unwrap();
        let j = jacobian_s(&pr, PhaseState::new(0.0, 0.0));
        let [v1, v2] = origin_eigenvectors(&pr);
        let apply = |v: [f64; 2]| [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]];
        let a1 = apply(v1);
        prop_assert!(a1[0].abs() < 1e-14 && a1[1].abs() < 1e-14 * c);
        let a2 = apply(v2);
        prop_assert!((a2[0] + c * v2[0]).abs() < 1e-14 && (a2[1] + c * v2[1]).abs() < 1e-13 * c);
    }
}

#[test]
fn without_kinetics_only_the_origin() {
    let eqs = equilibria(&ModelParams::new(2, 1.0, 0).unwrap());
    assert_eq!(eqs.len(), 1);
    assert_eq!(eqs[0].classification, Classification::CenterDegenerate);
}

#[test]
fn integrator_order_on_linear_decay() {
    // psi' = -c psi is the s-field on phi = 0.
    let c = 1.3;
    let pr = ModelParams::new(2, c, 1).unwrap();
    let sys = FnSystem(move |_t: f64, y: &[f64; 2]| {
        let d = vector_field_s(&pr, PhaseState::new(y[0], y[1]));
        [d.phi, d.psi]
    });
    let exact = (-c * 4.0f64).exp();
    let run = |tol: f64| {
        let tr = solve_dopri5(
            &sys,
            0.0,
            [0.0, 1.0],
            4.0,
            &SolveOptions::new(tol, tol),
            &Hooks::default(),
        )
        .unwrap();
        ((tr.last().1[1] - exact).abs(), tr.accepted as f64)
    };
    let (e1, n1) = run(1e-6);
    let (e2, n2) = run(1e-10);
    let order = (e1 / e2).ln() / (n2 / n1).ln();
    assert!(
        order >= 4.0,
        "observed order {order} ({e1:e} with {n1} steps, {e2:e} with {n2})"
    );
}

#[test]
fn forward_from_the_manifold_reaches_e_delta() {
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    let start = PhaseState::new(0.01, cm_graph(&pr, 0.01));
    let o = integrate(&pr, TimeParam::S, start, (0.0, 1e4), 1e-10).unwrap();
    let end = o.last();
    assert!(
        (end.phi - 1.0).abs() < 1e-6 && end.psi.abs() < 1e-6,
        "{end:?}"
    );
}

#[test]
fn backward_from_the_manifold_decreases_phi() {
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    // Backward in s the fast direction repels, so a direct run off the
    // truncated graph only stays on the manifold for a short span.
    let start = PhaseState::new(0.01, cm_graph(&pr, 0.01));
    let o = integrate(&pr, TimeParam::S, start, (0.0, -10.0), 1e-12).unwrap();
    assert!(o.states().windows(2).all(|w| w[1].phi < w[0].phi));
    // The forward-built connecting orbit covers the long backward stretch.
    let o = connecting_orbit(&pr, 0.01, 1e-10).unwrap();
    let a = o.anchor().unwrap();
    let back = &o.states()[..=a];
    assert!(back.windows(2).all(|w| w[0].phi < w[1].phi));
    assert!(back[0].phi <= 1e-6 * (1.0 + 1e-12));
}

#[test]
fn backward_xi_log_balance() {
    // xi(s)/ln(-s) drifts toward -c/p; at s ~ -1e6 the O(1) offset still shows.
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    let o = connecting_orbit(&pr, 0.01, 1e-10).unwrap();
    let (t, xi) = (o.times(), o.xi_values().unwrap());
    let ratio = |k: usize| xi[k] / (-t[k]).ln();
    let k6 = t.iter().rposition(|&s| s <= -1e6).unwrap();
    let k9 = t.iter().rposition(|&s| s <= -1e9).unwrap();
    assert!(ratio(k6) < 0.0 && ratio(k6) > -0.5, "{}", ratio(k6));
    assert!(
        ratio(k9) < ratio(k6) && ratio(k9) > -0.5,
        "{} -> {}",
        ratio(k6),
        ratio(k9)
    );
}

#[test]
fn connecting_orbits_are_positive_and_anchored() {
    for (p, phi0) in [(2, 0.1), (4, 0.1), (2, 1e-3)] {
        let pr = ModelParams::new(p, 1.0, 1).unwrap();
        let o = connecting_orbit(&pr, phi0, 1e-10).unwrap();
        assert!(o.states().iter().all(|s| s.phi > 0.0));
        let a = o.anchor().unwrap();
        assert_eq!(o.states()[a].phi, phi0);
        assert_eq!(o.xi_values().unwrap()[a], 0.0);
        assert_eq!(o.times()[a], 0.0);
        assert!(o.times().windows(2).all(|w| w[1] > w[0]));
        assert!(o.xi_values().unwrap().windows(2).all(|w| w[1] > w[0]));
        let end = o.last();
        assert!((end.phi - 1.0).abs() < 1e-6 && end.psi.abs() < 1e-6);
    }
    let pr = ModelParams::new(2, 1.0, 1).unwrap();
    assert!(connecting_orbit(&pr, 0.6, 1e-10).is_err());
}
