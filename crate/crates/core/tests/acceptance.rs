//! One test per acceptance criterion. Each prints a single
//! `PASS`/`FAIL` line with the measured values, then asserts it.

use std::process::Command;
use std::time::{Duration, Instant};

use twave_core::asymptotics::make_profile;
use twave_core::harness::{
    decay_slope, equilibrium_check, lambert_property_suite, lambert_samples,
    manifold_residual_order, oracle_sup_error, ratio_samples, validate_pde, validate_step2,
    validate_theorem1, ReportConfig,
};
use twave_core::params::ModelParams;
use twave_core::special_functions::WBranch;

const LAMBERT_SAMPLES: usize = 10_000;
const LAMBERT_RESIDUAL: f64 = 1e-13;
const ORACLE_SUP: f64 = 1e-6;
const RATIO_AT_LAST: f64 = 0.05;
const SLOPE_REL: f64 = 0.01;
const ENDPOINT_DIST: f64 = 1e-6;
const LOG_RATIO_REL: f64 = 0.05;
const SPREAD_MAX: f64 = 50.0;
const SPEED_REL: f64 = 0.05;
const CALIBRATION_REL: f64 = 1e-3;

fn verdict(id: u32, pass: bool, line: String) {
    println!("{} [{id}] {line}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id}: {line}");
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn model(p: u32, c: f64) -> ModelParams {
    ModelParams::new(p, c, 1).unwrap()
}

#[test]
fn c1_lambert_identity_and_inequalities() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for branch in [WBranch::Principal, WBranch::Lower] {
        let xs = lambert_samples(branch, LAMBERT_SAMPLES);
        assert_eq!(xs.len(), LAMBERT_SAMPLES);
        let (w, v) = lambert_property_suite(branch, &xs).unwrap();
        worst = worst.max(w);
        violations += v;
    }
    let el = t.elapsed();
    verdict(
        1,
        worst <= LAMBERT_RESIDUAL && violations == 0 && within(el, 1.0),
        format!(
            "lambert W: max scaled residual {worst:.3e} (<= {LAMBERT_RESIDUAL:e}), \
             {violations} inequality violations, {:.3} s (< 1 s)",
            el.as_secs_f64()
        ),
    );
}

#[test]
fn c2_closed_form_matches_reduced_system() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (p, c) in [(2, 1.0), (2, 3.0), (4, 1.0)] {
        let e = oracle_sup_error(&model(p, c), 0.1, -15.0, 1e-12).unwrap();
        parts.push(format!("(p={p}, c={c}) {e:.2e}"));
        worst = worst.max(e);
    }
    let el = t.elapsed();
    verdict(
        2,
        worst <= ORACLE_SUP && within(el, 5.0),
        format!(
            "reduced-flow oracle sup rel error {} (<= {ORACLE_SUP:e}), {:.3} s (< 5 s)",
            parts.join(", "),
            el.as_secs_f64()
        ),
    );
}

#[test]
fn c3_asymptotic_equivalence() {
    let t = Instant::now();
    let pr = model(2, 1.0);
    let pts: Vec<f64> = (1..=6).map(|k| -2.0 * k as f64).collect();
    let coarse = ratio_samples(&pr, 1e-2, &pts, 1e-14).unwrap();
    let fine = ratio_samples(&pr, 1e-3, &pts, 1e-14).unwrap();
    let errs: Vec<f64> = coarse.iter().map(|r| r.error()).collect();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let sup =
        |v: &[twave_core::harness::RatioSample]| v.iter().map(|r| r.error()).fold(0.0, f64::max);
    let (sup_c, sup_f) = (sup(&coarse), sup(&fine));
    let el = t.elapsed();
    let listed: Vec<String> = errs.iter().map(|e| format!("{e:.5e}")).collect();
    verdict(
        3,
        monotone && last <= RATIO_AT_LAST && sup_f < sup_c && within(el, 10.0),
        format!(
            "|r - 1| at xi = -2..-12: [{}] monotone decreasing: {monotone}; at -12 {last:.2e} \
             (<= {RATIO_AT_LAST}); sup {sup_c:.2e} -> {sup_f:.2e} with phi0 = 1e-3; {:.3} s (< 10 s)",
            listed.join(", "),
            el.as_secs_f64()
        ),
    );
}

#[test]
fn c4_decay_rate() {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [1.0, 3.0] {
        let prof = make_profile(&model(2, c), 0.01).unwrap();
        let slope = decay_slope(&prof, (-12.0, -8.0));
        let rel = (slope * c - 1.0).abs();
        ok &= rel <= SLOPE_REL;
        parts.push(format!(
            "c={c}: slope {slope:.8} (1/c = {:.8}, rel {rel:.1e})",
            1.0 / c
        ));
    }
    verdict(
        4,
        ok,
        format!(
            "log-slope over [-12, -8]: {} (within {SLOPE_REL})",
            parts.join("; ")
        ),
    );
}

#[test]
fn c5_connecting_orbit_and_equilibria() {
    let r = validate_theorem1(&model(2, 1.0), &ReportConfig::default().theorem1).unwrap();
    let dist = r.check("theorem1.endpoint_distance").unwrap().measured;
    let neg = r.check("theorem1.positivity_violations").unwrap().measured;
    let mut ok = dist <= ENDPOINT_DIST && neg == 0.0;
    let mut parts = Vec::new();
    for ((p, c), (kind, d)) in [(2, 1.0), (2, 5.0), (4, 1.0), (4, 5.0)].into_iter().zip([
        ("SpiralSink", -7),
        ("NodeSink", 17),
        ("SpiralSink", -15),
        ("NodeSink", 9),
    ]) {
        let chk = equilibrium_check(p, c).unwrap();
        let want = format!("{kind}, D = {d}");
        ok &= chk.pass && chk.detail.as_deref() == Some(want.as_str());
        parts.push(format!("(p={p}, c={c}) {}", chk.detail.unwrap_or_default()));
    }
    verdict(
        5,
        ok,
        format!(
            "orbit end distance {dist:.2e} (<= {ENDPOINT_DIST:e}), {neg} non-positive samples; {}",
            parts.join(", ")
        ),
    );
}

#[test]
fn c6_step2_divergence() {
    let t = Instant::now();
    let r = validate_step2(&model(2, 1.0), 0.1).unwrap();
    let mono = r.check("step2.monotone_violations").unwrap();
    let lr = r.check("step2.log_ratio").unwrap();
    let rel = (lr.measured / lr.target - 1.0).abs();
    let el = t.elapsed();
    verdict(
        6,
        mono.pass && rel <= LOG_RATIO_REL && within(el, 2.0),
        format!(
            "xi(-10^k) decreasing: {}; xi(-1e6)/ln(1e6) = {:.5} vs -c/p = {} (rel {rel:.3}, \
             <= {LOG_RATIO_REL}); {:.3} s (< 2 s)",
            mono.pass,
            lr.measured,
            lr.target,
            el.as_secs_f64()
        ),
    );
}

#[test]
fn c7_center_manifold_residual_order() {
    let (spread, rows) =
        manifold_residual_order(&model(2, 1.0), &ReportConfig::default().manifold).unwrap();
    verdict(
        7,
        spread < SPREAD_MAX,
        format!(
            "max/min of residual/phi^4 over phi in [1e-3, 1e-1]: {spread:.2} (< {SPREAD_MAX}), \
             {} samples",
            rows.len()
        ),
    );
}

#[test]
fn c8_pde_front_speed() {
    let t = Instant::now();
    let s = ReportConfig::default().pde;
    assert_eq!(
        (s.x_min, s.x_max, s.dx, s.t_end, s.level),
        (-30.0, 30.0, 0.05, 3.0, 0.5)
    );
    let r = validate_pde(&model(2, 1.0), &s);
    let el = t.elapsed();
    let r = match r {
        Ok(r) => r,
        Err(e) => return verdict(8, false, format!("pde run failed: {e}")),
    };
    let calib = r.check("pde.calibration_speed").unwrap().measured;
    let speed = r.check("pde.front_speed").unwrap().measured;
    let clamps = r.check("pde.positivity_clamps").unwrap().measured;
    verdict(
        8,
        (calib - 1.0).abs() <= CALIBRATION_REL
            && (speed - 1.0).abs() <= SPEED_REL
            && clamps == 0.0
            && within(el, 60.0),
        format!(
            "calibration speed {calib:.6} (within {CALIBRATION_REL}), measured speed {speed:.6} \
             (within {SPEED_REL}), {clamps} clamps, no blow-up, {:.3} s (< 60 s)",
            el.as_secs_f64()
        ),
    );
}

#[test]
fn c9_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let run = || {
        let st = Command::new(env!("CARGO_BIN_EXE_twave"))
            .args(["report", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        // Exit 1 only signals failing checks; the JSON is still written.
        assert!(matches!(st.status.code(), Some(0) | Some(1)), "{:?}", st);
        std::fs::read(out.join("report.json")).unwrap()
    };
    let (a, b) = (run(), run());
    verdict(
        9,
        a == b,
        format!(
            "two default report runs: {} and {} bytes, identical: {}",
            a.len(),
            b.len(),
            a == b
        ),
    );
}
