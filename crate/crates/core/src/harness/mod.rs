//! Validation pipelines over the other modules and the JSON/CSV report.
//!
//! Each check group builds its own partial [`ValidationReport`]. Groups run
//! on scoped threads and are merged in configuration order, so the result
//! does not depend on scheduling. Artifacts are written after the merge.

pub mod config;
pub mod report;

use std::path::Path;

use crate::asymptotics::{
    make_profile, make_w_transform, phi_of_xi, reduced_orbit, verify_xi_divergence,
    xi_of_s_closed_form, AsymptoticProfile,
};
use crate::center_manifold::cm_residual;
use crate::error::{Error, Result};
use crate::params::{powp, ModelParams};
use crate::pde_sim::{crossing, init_wave, measure_front_speed, simulate, FieldState, Grid1D};
use crate::phase_dynamics::{
    connecting_orbit, connecting_orbit_from_seed, equilibria, Classification,
};
use crate::special_functions::{lambert_w, residual, WBranch};

pub use config::{CheckGroup, ReportConfig};
pub use report::{csv_text, Check, GroupError, Status, ValidationReport};

use config::{ManifoldSettings, OrbitSettings, PdeSettings, TheoremSettings};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Deterministic Lambert-W sample points covering each real branch: half
/// clustered at the branch point, half log-spaced over the remaining range.
pub fn lambert_samples(branch: WBranch, n: usize) -> Vec<f64> {
    let half = n / 2;
    let frac = |k: usize, m: usize| k as f64 / (m.max(2) - 1) as f64;
    // x = -1/e (1 - t), t from 1e-16 to ~1.
    let near: Vec<f64> = (0..half)
        .map(|k| -INV_E * (1.0 - 10f64.powf(-16.0 + 15.9 * frac(k, half))))
        .collect();
    let rest = n - half;
    let far: Vec<f64> = match branch {
        WBranch::Principal => (0..rest)
            .map(|k| 10f64.powf(-300.0 + 600.0 * frac(k, rest)))
            .collect(),
        WBranch::Lower => (0..rest)
            .map(|k| -(10f64.powf(-300.0 + (300.0 + INV_E.log10()) * k as f64 / rest as f64)))
            .collect(),
    };
    near.into_iter().chain(far).collect()
}

/// Max scaled residual on `samples`, plus the inequality violations
/// `W0(x) > 0` for `x > 0` and `W0(x) < ln x` for `x > e` (principal only).
pub fn lambert_property_suite(branch: WBranch, samples: &[f64]) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for &x in samples {
        let w = lambert_w(branch, x)?;
        worst = worst.max(residual(w, x));
        if branch == WBranch::Principal {
            if x > 0.0 && !(w > 0.0) {
                violations += 1;
            }
            if x > std::f64::consts::E && !(w < x.ln()) {
                violations += 1;
            }
        }
    }
    Ok((worst, violations))
}

fn lambertw_group(params: &ModelParams, phi0: f64, samples: usize) -> Result<ValidationReport> {
    let mut r = ValidationReport::new(*params, phi0);
    let mut violations = 0;
    for (branch, tag) in [(WBranch::Principal, "principal"), (WBranch::Lower, "lower")] {
        let xs = lambert_samples(branch, samples);
        let (worst, v) = lambert_property_suite(branch, &xs)?;
        violations += v;
        r.checks.push(
            Check::new(format!("lambertw.{tag}.max_residual"), 0.0, worst, 1e-13)
                .with_detail(format!("{} samples", xs.len())),
        );
    }
    r.checks.push(Check::violations(
        "lambertw.inequality_violations",
        violations,
    ));
    Ok(r)
}

/// Classification of `+-E_delta` for `(p, c, delta = 1)` compared with the
/// sign of `D = c^2 - 4p`: measured is 1 when consistent.
pub fn equilibrium_check(p: u32, c: f64) -> Result<Check> {
    let pr = ModelParams::new(p, c, 1)?;
    let d = c * c - 4.0 * p as f64;
    let e = equilibria(&pr)
        .into_iter()
        .find(|e| e.location.phi == 1.0)
        .ok_or_else(|| Error::Precondition("no E_delta for delta = 1".into()))?;
    let sink = e.eigenvalues.iter().all(|z| z.re < 0.0);
    let complex = e.eigenvalues[0].im != 0.0;
    let label = match e.classification {
        Classification::SpiralSink => "SpiralSink",
        Classification::NodeSink { .. } => "NodeSink",
        Classification::CenterDegenerate => "CenterDegenerate",
    };
    let consistent = sink
        && complex == (d < 0.0)
        && matches!(
            (e.classification, d < 0.0),
            (Classification::SpiralSink, true) | (Classification::NodeSink { .. }, false)
        );
    Ok(Check::new(
        format!("equilibria.p{p}_c{c}.classification"),
        1.0,
        if consistent { 1.0 } else { 0.0 },
        0.0,
    )
    .with_detail(format!("{label}, D = {d}")))
}

fn equilibria_group(
    params: &ModelParams,
    phi0: f64,
    sets: &[(u32, f64)],
) -> Result<ValidationReport> {
    let mut r = ValidationReport::new(*params, phi0);
    for &(p, c) in sets {
        r.checks.push(equilibrium_check(p, c)?);
    }
    Ok(r)
}

/// Connecting-orbit limits: end point distance to `(1, 0)` and positivity.
pub fn validate_theorem1(params: &ModelParams, s: &OrbitSettings) -> Result<ValidationReport> {
    let orbit = connecting_orbit(params, s.phi0, s.tol)?;
    let end = orbit.last();
    let dist = (end.phi - 1.0).abs().max(end.psi.abs());
    let negative = orbit.states().iter().filter(|st| !(st.phi > 0.0)).count();
    let mut r = ValidationReport::new(*params, s.phi0);
    r.checks.push(
        Check::new("theorem1.endpoint_distance", 0.0, dist, 1e-6)
            .with_detail(format!("{} samples", orbit.len())),
    );
    r.checks.push(Check::violations(
        "theorem1.positivity_violations",
        negative,
    ));
    let xi = orbit.xi_values().unwrap_or(&[]);
    r.push_artifact(
        "connecting_orbit.csv",
        csv_text(
            &["s", "xi", "phi", "psi"],
            orbit
                .times()
                .iter()
                .zip(orbit.states())
                .zip(xi)
                .map(|((&t, st), &x)| vec![t, x, st.phi, st.psi]),
        ),
    );
    Ok(r)
}

/// Full-system orbit against the closed-form profile at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub xi: f64,
    pub phi_orbit: f64,
    pub phi_formula: f64,
}

impl RatioSample {
    pub fn error(&self) -> f64 {
        (self.phi_orbit / self.phi_formula - 1.0).abs()
    }
}

/// Integrates the connecting orbit anchored at `phi0` and compares it with
/// `phi_of_xi` at each checkpoint. The seed sits one unit of `xi` beyond the
/// leftmost checkpoint, a decade below the profile there.
pub fn ratio_samples(
    params: &ModelParams,
    phi0: f64,
    checkpoints: &[f64],
    tol: f64,
) -> Result<Vec<RatioSample>> {
    if checkpoints.is_empty()
        || checkpoints.iter().any(|&x| !(x < 0.0))
        || checkpoints.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Precondition(
            "checkpoints must be negative and strictly decreasing".into(),
        ));
    }
    let profile = make_profile(params, phi0)?;
    let xi_min = *checkpoints.last().unwrap();
    let seed = 0.1 * phi_of_xi(&profile, xi_min - 1.0);
    let orbit = connecting_orbit_from_seed(params, phi0, seed, tol)?;
    checkpoints
        .iter()
        .map(|&xi| {
            let phi_orbit = orbit.phi_at_xi(xi).ok_or_else(|| {
                Error::MissingAnchor(format!("orbit does not extend to xi = {xi}"))
            })?;
            Ok(RatioSample {
                xi,
                phi_orbit,
                phi_formula: phi_of_xi(&profile, xi),
            })
        })
        .collect()
}

/// Sup relative error of `phi_of_xi` against the integrated reduced system
/// over `[xi_min, 0]`.
pub fn oracle_sup_error(params: &ModelParams, phi0: f64, xi_min: f64, tol: f64) -> Result<f64> {
    let profile = make_profile(params, phi0)?;
    let samples = reduced_orbit(params, phi0, xi_min, tol)?;
    Ok(samples
        .iter()
        .map(|&(xi, phi)| (phi_of_xi(&profile, xi) / phi - 1.0).abs())
        .fold(0.0, f64::max))
}

/// `(ln phi(b) - ln phi(a)) / (b - a)` for the closed-form profile.
pub fn decay_slope(profile: &AsymptoticProfile, window: (f64, f64)) -> f64 {
    let (a, b) = window;
    (phi_of_xi(profile, b).ln() - phi_of_xi(profile, a).ln()) / (b - a)
}

/// Asymptotic-equivalence validation with default settings.
pub fn validate_theorem2(
    params: &ModelParams,
    phi0: f64,
    xi_checkpoints: &[f64],
) -> Result<ValidationReport> {
    let settings = TheoremSettings {
        checkpoints: xi_checkpoints.to_vec(),
        ..TheoremSettings::default()
    };
    validate_theorem2_with(params, phi0, &settings)
}

pub fn validate_theorem2_with(
    params: &ModelParams,
    phi0: f64,
    s: &TheoremSettings,
) -> Result<ValidationReport> {
    let mut r = ValidationReport::new(*params, phi0);
    let profile = make_profile(params, phi0)?;

    let sup = oracle_sup_error(params, phi0, s.oracle_xi_min, s.oracle_tol)?;
    r.checks.push(
        Check::new("theorem2.oracle_sup_rel_error", 0.0, sup, 1e-6)
            .with_detail(format!("xi in [{}, 0]", s.oracle_xi_min)),
    );

    let samples = ratio_samples(params, phi0, &s.checkpoints, s.tol)?;
    let errs: Vec<f64> = samples.iter().map(RatioSample::error).collect();
    let rises = errs.windows(2).filter(|w| !(w[1] < w[0])).count();
    r.checks.push(
        Check::violations("theorem2.ratio_monotone_violations", rises).with_detail(
            errs.iter()
                .map(|e| format!("{e:.6e}"))
                .collect::<Vec<_>>()
                .join(" "),
        ),
    );
    let last = *samples.last().unwrap();
    r.checks.push(
        Check::new("theorem2.ratio_error_at_last", 0.0, last.error(), 0.05)
            .with_detail(format!("xi = {}", last.xi)),
    );

    let inv_c = 1.0 / params.c();
    r.checks.push(Check::new(
        "theorem2.decay_slope",
        inv_c,
        decay_slope(&profile, s.slope_window),
        0.01 * inv_c,
    ));

    if let Some(fine) = s.refine_phi0 {
        let coarse_sup = errs.iter().cloned().fold(0.0, f64::max);
        let fine_sup = ratio_samples(params, fine, &s.checkpoints, s.tol)?
            .iter()
            .map(RatioSample::error)
            .fold(0.0, f64::max);
        r.checks.push(
            Check::violations(
                "theorem2.anchor_refinement_violations",
                usize::from(!(fine_sup < coarse_sup)),
            )
            .with_detail(format!(
                "sup at phi0 = {phi0}: {coarse_sup:.6e}; at phi0 = {fine}: {fine_sup:.6e}"
            )),
        );
    }

    r.push_artifact(
        "theorem2_ratio.csv",
        csv_text(
            &["xi", "phi_orbit", "phi_formula", "abs_ratio_minus_one"],
            samples
                .iter()
                .map(|q| vec![q.xi, q.phi_orbit, q.phi_formula, q.error()]),
        ),
    );
    Ok(r)
}

/// Divergence of `xi(s)` as `s -> -inf` with `s = -10^k`, `k = 1..=6`.
pub fn validate_step2(params: &ModelParams, phi0: f64) -> Result<ValidationReport> {
    validate_step2_with(params, phi0, 6)
}

pub fn validate_step2_with(
    params: &ModelParams,
    phi0: f64,
    max_exponent: u32,
) -> Result<ValidationReport> {
    if max_exponent == 0 {
        return Err(Error::Precondition("need at least one s target".into()));
    }
    let wt = make_w_transform(params, phi0)?;
    let mut targets = vec![0.0];
    targets.extend((1..=max_exponent as i32).map(|k| -(10f64.powi(k))));
    let values = verify_xi_divergence(&wt, params, &targets)?;

    let mut r = ValidationReport::new(*params, phi0);
    r.checks
        .push(Check::new("step2.xi_at_zero", 0.0, values[0].1, 0.0));
    let rises = values[1..]
        .windows(2)
        .filter(|w| !(w[1].1 < w[0].1))
        .count()
        + usize::from(!(values[1].1 < 0.0));
    r.checks
        .push(Check::violations("step2.monotone_violations", rises));
    let closed_err = values
        .iter()
        .map(|&(s, xi)| (xi - xi_of_s_closed_form(&wt, s)).abs() / xi.abs().max(1.0))
        .fold(0.0, f64::max);
    r.checks.push(Check::new(
        "step2.closed_form_agreement",
        0.0,
        closed_err,
        1e-9,
    ));
    let (s_last, xi_last) = *values.last().unwrap();
    let target = -params.c() / params.pf();
    r.checks.push(
        Check::new(
            "step2.log_ratio",
            target,
            xi_last / (-s_last).ln(),
            0.05 * target.abs(),
        )
        .with_detail(format!("s = {s_last}")),
    );
    r.push_artifact(
        "step2_xi.csv",
        csv_text(
            &["s", "xi_quadrature", "xi_closed_form"],
            values
                .iter()
                .map(|&(s, xi)| vec![s, xi, xi_of_s_closed_form(&wt, s)]),
        ),
    );
    Ok(r)
}

/// `(phi, |psi - h(phi)|, residual / phi^(p+2))` along the orbit inside the
/// window, and the max/min spread of the last column.
pub fn manifold_residual_order(
    params: &ModelParams,
    s: &ManifoldSettings,
) -> Result<(f64, Vec<[f64; 3]>)> {
    let orbit = connecting_orbit_from_seed(params, s.phi0, s.seed, s.tol)?;
    let rows: Vec<[f64; 3]> = cm_residual(params, &orbit)?
        .into_iter()
        .filter(|&(phi, _)| phi >= s.window.0 && phi <= s.window.1)
        .map(|(phi, res)| [phi, res, res / (phi * powp(phi, params.p() + 1))])
        .collect();
    if rows.is_empty() {
        return Err(Error::Precondition(
            "no orbit samples in the residual window".into(),
        ));
    }
    let max = rows.iter().map(|r| r[2]).fold(f64::MIN, f64::max);
    let min = rows.iter().map(|r| r[2]).fold(f64::MAX, f64::min);
    Ok((max / min, rows))
}

fn manifold_group(
    params: &ModelParams,
    phi0: f64,
    s: &ManifoldSettings,
) -> Result<ValidationReport> {
    let (spread, rows) = manifold_residual_order(params, s)?;
    let mut r = ValidationReport::new(*params, phi0);
    r.checks.push(
        Check::new("manifold.residual_order_spread", 1.0, spread, 49.0).with_detail(format!(
            "max/min of residual/phi^(p+2) over phi in [{}, {}]",
            s.window.0, s.window.1
        )),
    );
    r.push_artifact(
        "manifold_residual.csv",
        csv_text(
            &["phi", "residual", "residual_over_phi_p2"],
            rows.into_iter().map(|r| r.to_vec()),
        ),
    );
    Ok(r)
}

/// Snapshots of the exact translate `phi_of_xi(x - c t)`.
pub fn synthetic_snapshots(
    profile: &AsymptoticProfile,
    grid: &Grid1D,
    times: &[f64],
) -> Vec<FieldState> {
    let c = profile.params.c();
    times
        .iter()
        .map(|&t| FieldState {
            time: t,
            values: (0..grid.nx())
                .map(|i| phi_of_xi(profile, grid.x(i) - c * t))
                .collect(),
        })
        .collect()
}

/// Linear interpolation of node values at `x` (clamped to the grid).
fn sample(grid: &Grid1D, values: &[f64], x: f64) -> f64 {
    let u = ((x - grid.x_min()) / grid.dx()).clamp(0.0, (grid.nx() - 1) as f64);
    let i = (u.floor() as usize).min(grid.nx() - 2);
    let th = u - i as f64;
    values[i] * (1.0 - th) + values[i + 1] * th
}

/// Max over `|x - x_front| <= half_width` of `|u(T, x + cT) - u(0, x)|`.
pub fn shape_error(
    params: &ModelParams,
    grid: &Grid1D,
    first: &FieldState,
    last: &FieldState,
    level: f64,
    half_width: f64,
) -> Result<f64> {
    let x_front = crossing(grid, &first.values, level)?;
    let shift = params.c() * (last.time - first.time);
    let mut worst: f64 = 0.0;
    for i in 0..grid.nx() {
        let x = grid.x(i);
        if (x - x_front).abs() <= half_width && x + shift <= grid.x_max() {
            worst = worst.max((sample(grid, &last.values, x + shift) - first.values[i]).abs());
        }
    }
    Ok(worst)
}

pub fn validate_pde(params: &ModelParams, s: &PdeSettings) -> Result<ValidationReport> {
    let c = params.c();
    let grid = Grid1D::with_spacing(s.x_min, s.x_max, s.dx)?;
    let profile = make_profile(params, s.phi0)?;
    let mut r = ValidationReport::new(*params, s.phi0);

    let n = (s.t_end / s.snapshot_every).round().max(2.0) as usize;
    let times: Vec<f64> = (0..=n).map(|k| s.t_end * k as f64 / n as f64).collect();
    let calib = measure_front_speed(
        &synthetic_snapshots(&profile, &grid, &times),
        &grid,
        s.level,
    )?;
    r.checks.push(Check::new(
        "pde.calibration_speed",
        c,
        calib.speed,
        1e-3 * c,
    ));

    let orbit = connecting_orbit(params, s.phi0, 1e-10)?;
    let init = init_wave(params, &profile, &orbit, &grid)?;
    let sim = simulate(params, &grid, &init, s.t_end, s.safety, s.snapshot_every)?;
    let est = measure_front_speed(&sim.snapshots, &grid, s.level)?;
    r.checks.push(
        Check::new("pde.front_speed", c, est.speed, 0.05 * c).with_detail(format!(
            "fit residual {:.3e}, {} steps",
            est.fit_residual, sim.steps
        )),
    );
    r.checks
        .push(Check::violations("pde.positivity_clamps", sim.clamp_count));
    let shape = shape_error(
        params,
        &grid,
        &sim.snapshots[0],
        sim.snapshots.last().unwrap(),
        s.level,
        s.shape_window,
    )?;
    r.checks
        .push(Check::new("pde.shape_error", 0.0, shape, 0.02));
    r.push_artifact(
        "pde_front.csv",
        csv_text(
            &["time", "crossing"],
            est.samples.iter().map(|&(t, x)| vec![t, x]),
        ),
    );
    Ok(r)
}

fn run_group(cfg: &ReportConfig, params: &ModelParams, group: CheckGroup) -> ValidationReport {
    let phi0 = cfg.phi0;
    let out = match group {
        CheckGroup::Lambertw => lambertw_group(params, phi0, cfg.lambertw.samples),
        CheckGroup::Equilibria => equilibria_group(params, phi0, &cfg.equilibria),
        CheckGroup::Theorem1 => validate_theorem1(params, &cfg.theorem1),
        CheckGroup::Theorem2 => validate_theorem2_with(params, phi0, &cfg.theorem2),
        CheckGroup::Step2 => validate_step2_with(params, cfg.step2.phi0, cfg.step2.max_exponent),
        CheckGroup::Manifold => manifold_group(params, phi0, &cfg.manifold),
        CheckGroup::Pde => validate_pde(params, &cfg.pde),
    };
    out.unwrap_or_else(|e| {
        let mut r = ValidationReport::new(*params, phi0);
        r.push_error(group.name(), e);
        r
    })
}

/// Runs the configured groups concurrently and merges them in order. No
/// files are written; artifacts stay in `pending`.
pub fn run_config(cfg: &ReportConfig) -> Result<ValidationReport> {
    let params = cfg.params()?;
    let mut groups: Vec<CheckGroup> = Vec::new();
    for g in &cfg.groups {
        if !groups.contains(g) {
            groups.push(*g);
        }
    }
    let parts: Vec<ValidationReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = groups
            .iter()
            .map(|&g| scope.spawn(move || run_group(cfg, &params, g)))
            .collect();
        handles
            .into_iter()
            .zip(&groups)
            .map(|(h, g)| {
                h.join().unwrap_or_else(|_| {
                    let mut r = ValidationReport::new(params, cfg.phi0);
                    r.push_error(g.name(), "check group panicked");
                    r
                })
            })
            .collect()
    });
    let mut report = ValidationReport::new(params, cfg.phi0);
    for part in parts {
        report.absorb(part);
    }
    Ok(report)
}

/// Writes pending artifacts and `report.json` into `dir`.
pub fn write_report(report: &mut ValidationReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in std::mem::take(&mut report.pending) {
        let path = dir.join(&a.file_name);
        std::fs::write(&path, a.contents)?;
        report.artifacts.push(path.display().to_string());
    }
    std::fs::write(dir.join("report.json"), report.to_json())?;
    Ok(())
}

/// Loads the configuration, runs it and writes the report files.
pub fn run_report(config_path: &Path) -> Result<ValidationReport> {
    let cfg = ReportConfig::load(config_path)?;
    run_and_write(&cfg)
}

pub fn run_and_write(cfg: &ReportConfig) -> Result<ValidationReport> {
    let mut report = run_config(cfg)?;
    write_report(&mut report, &cfg.out_dir)?;
    Ok(report)
}
