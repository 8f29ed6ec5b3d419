//! Method-of-lines check that the wave profile translates at speed `c` under
//! `u_t = u^p (u_xx + u) - delta u`.
//!
//! Second-order central differences in space, classical RK4 in time with the
//! diffusion-limited step `dt = safety dx^2 / max(1, max u^p)`, and pinned
//! Dirichlet values at both ends.

use serde::Serialize;

use crate::asymptotics::{phi_of_xi, AsymptoticProfile};
use crate::error::{Error, Result};
use crate::params::{powp, ModelParams};
use crate::phase_dynamics::Orbit;

/// Abort threshold for `max u`.
pub const BLOW_UP_LEVEL: f64 = 2.0;
/// Fronts closer than this many cells to the right boundary are rejected.
pub const RIGHT_MARGIN_CELLS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    nx: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        if nx < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes, got {nx}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::Grid(format!("bad interval [{x_min}, {x_max}]")));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            dx: (x_max - x_min) / (nx - 1) as f64,
        })
    }

    /// Grid with spacing as close to `dx` as the interval allows.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Grid(format!("spacing must be positive, got {dx}")));
        }
        Self::new(x_min, x_max, ((x_max - x_min) / dx).round() as usize + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub time: f64,
    pub values: Vec<f64>,
}

/// `u(0, x) = phi(x)`: the orbit where it has samples, the closed-form tail
/// to the left of them and the plateau `1` to the right.
pub fn init_wave(
    params: &ModelParams,
    profile: &AsymptoticProfile,
    orbit: &Orbit,
    grid: &Grid1D,
) -> Result<FieldState> {
    params.require_delta_one("the traveling-wave initial condition")?;
    let xs = orbit
        .xi_axis()
        .ok_or_else(|| Error::Precondition("orbit has no xi values".into()))?;
    let anchor = orbit
        .anchor()
        .ok_or_else(|| Error::MissingAnchor("orbit has no anchor".into()))?;
    let phi_anchor = orbit.states()[anchor].phi;
    if (phi_anchor - profile.phi0).abs() > 1e-12 * profile.phi0 {
        return Err(Error::Precondition(format!(
            "orbit anchor {phi_anchor} differs from profile anchor {}",
            profile.phi0
        )));
    }
    let (xi_lo, xi_hi) = (xs[0], *xs.last().unwrap());
    // The transition spans from the anchor to where the orbit settles at 1.
    let settle = orbit
        .states()
        .iter()
        .zip(xs)
        .rev()
        .find(|(s, _)| (s.phi - 1.0).abs() > 1e-2)
        .map(|(_, &x)| x)
        .unwrap_or(0.0);
    if grid.x_min() >= 0.0 || grid.x_max() <= settle {
        return Err(Error::Grid(format!(
            "grid [{}, {}] does not cover the transition [0, {settle:.3}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let values = (0..grid.nx())
        .map(|i| {
            let x = grid.x(i);
            if x < xi_lo {
                phi_of_xi(profile, x)
            } else if x > xi_hi {
                1.0
            } else {
                orbit.phi_at_xi(x).unwrap_or(1.0)
            }
        })
        .collect();
    Ok(FieldState { time: 0.0, values })
}

/// Semi-discrete right-hand side; boundary derivatives are zero.
pub fn rhs(params: &ModelParams, grid: &Grid1D, field: &FieldState) -> Vec<f64> {
    let mut out = vec![0.0; field.values.len()];
    rhs_into(params, grid.dx(), &field.values, &mut out);
    out
}

fn rhs_into(params: &ModelParams, dx: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let inv_dx2 = 1.0 / (dx * dx);
    let delta = params.deltaf();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        let ui = u[i];
        let lap = (u[i - 1] - 2.0 * ui + u[i + 1]) * inv_dx2;
        out[i] = powp(ui, params.p()) * (lap + ui) - delta * ui;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub snapshots: Vec<FieldState>,
    /// Node values raised back to zero after a step.
    pub clamp_count: usize,
    pub steps: usize,
}

/// RK4 from `field` to `t_end`, storing a snapshot every `snapshot_every`
/// time units (plus the initial and final states). Steps are shortened to
/// land on snapshot times.
pub fn simulate(
    params: &ModelParams,
    grid: &Grid1D,
    field: &FieldState,
    t_end: f64,
    safety: f64,
    snapshot_every: f64,
) -> Result<Simulation> {
    if !(t_end > field.time) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} must exceed the start time {}",
            field.time
        )));
    }
    if !(safety > 0.0 && safety <= 0.5) {
        return Err(Error::Precondition(format!(
            "safety {safety} outside (0, 0.5]"
        )));
    }
    if !(snapshot_every > 0.0) {
        return Err(Error::Precondition(
            "snapshot interval must be positive".into(),
        ));
    }
    if field.values.len() != grid.nx() {
        return Err(Error::Grid(format!(
            "field has {} values for {} nodes",
            field.values.len(),
            grid.nx()
        )));
    }
    let n = grid.nx();
    let dx2 = grid.dx() * grid.dx();
    let mut u = field.values.clone();
    let mut t = field.time;
    let mut snapshots = vec![field.clone()];
    let mut clamp_count = 0;
    let mut steps = 0;
    let mut next_snap = 1usize;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];

    while t < t_end {
        let snap_t = (field.time + next_snap as f64 * snapshot_every).min(t_end);
        let umax_p = u.iter().map(|&v| powp(v, params.p())).fold(0.0, f64::max);
        let mut dt = safety * dx2 / umax_p.max(1.0);
        let landing = t + dt >= snap_t;
        if landing {
            dt = snap_t - t;
        }

        rhs_into(params, grid.dx(), &u, &mut k1);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        rhs_into(params, grid.dx(), &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        rhs_into(params, grid.dx(), &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = u[i] + dt * k3[i];
        }
        rhs_into(params, grid.dx(), &tmp, &mut k4);
        for i in 0..n {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = if landing { snap_t } else { t + dt };
        steps += 1;

        let mut max_u: f64 = 0.0;
        for v in u.iter_mut() {
            if !v.is_finite() {
                return Err(Error::NonFinite { t });
            }
            if *v < 0.0 {
                *v = 0.0;
                clamp_count += 1;
            }
            max_u = max_u.max(*v);
        }
        if max_u > BLOW_UP_LEVEL {
            return Err(Error::BlowUp { time: t, max_u });
        }
        if landing {
            snapshots.push(FieldState {
                time: t,
                values: u.clone(),
            });
            next_snap += 1;
        }
    }
    Ok(Simulation {
        snapshots,
        clamp_count,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontSpeedEstimate {
    pub level: f64,
    pub speed: f64,
    /// RMS of the least-squares line through the crossings.
    pub fit_residual: f64,
    /// `(time, crossing position)`.
    pub samples: Vec<(f64, f64)>,
}

/// Position where `values` crosses `level`, by linear interpolation between
/// the bracketing nodes. Exactly one crossing is required.
pub fn crossing(grid: &Grid1D, values: &[f64], level: f64) -> Result<f64> {
    let mut found = None;
    let mut count = 0;
    for i in 0..values.len() - 1 {
        let (a, b) = (values[i] - level, values[i + 1] - level);
        if a == 0.0 && i > 0 {
            continue;
        }
        if (a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0) {
            count += 1;
            let th = if a == 0.0 { 0.0 } else { a / (a - b) };
            found = Some(grid.x(i) + th * grid.dx());
        }
    }
    match (count, found) {
        (1, Some(x)) => Ok(x),
        (0, _) => Err(Error::Crossing(format!("no crossing of level {level}"))),
        (k, _) => Err(Error::Crossing(format!("{k} crossings of level {level}"))),
    }
}

/// Least-squares speed of the `level` crossing across snapshots.
pub fn measure_front_speed(
    snapshots: &[FieldState],
    grid: &Grid1D,
    level: f64,
) -> Result<FrontSpeedEstimate> {
    if snapshots.len() < 3 {
        return Err(Error::Crossing(format!(
            "need at least 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    let limit = grid.x_max() - RIGHT_MARGIN_CELLS * grid.dx();
    let mut samples = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let x = crossing(grid, &s.values, level)?;
        if x > limit {
            return Err(Error::Crossing(format!(
                "front at {x:.4} (t = {}) is within {RIGHT_MARGIN_CELLS} cells of the right boundary",
                s.time
            )));
        }
        samples.push((s.time, x));
    }
    let n = samples.len() as f64;
    let tm = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let xm = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let stt: f64 = samples.iter().map(|s| (s.0 - tm).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::Crossing("snapshots share one time".into()));
    }
    let stx: f64 = samples.iter().map(|s| (s.0 - tm) * (s.1 - xm)).sum();
    let speed = stx / stt;
    let icpt = xm - speed * tm;
    let rss: f64 = samples
        .iter()
        .map(|s| (s.1 - icpt - speed * s.0).powi(2))
        .sum();
    Ok(FrontSpeedEstimate {
        level,
        speed,
        fit_residual: (rss / n).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u32, c: f64, d: u8) -> ModelParams {
        ModelParams::new(p, c, d).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let g = Grid1D::new(0.0, 1.0, 11).unwrap();
        let ones = FieldState {
            time: 0.0,
            values: vec![1.0; 11],
        };
        assert!(rhs(&m(2, 1.0, 1), &g, &ones).iter().all(|&v| v == 0.0));
        let zeros = FieldState {
            time: 0.0,
            values: vec![0.0; 11],
        };
        assert!(rhs(&m(2, 1.0, 1), &g, &zeros).iter().all(|&v| v == 0.0));
        let half = FieldState {
            time: 0.0,
            values: vec![0.5; 11],
        };
        let r = rhs(&m(2, 1.0, 0), &g, &half);
        assert_eq!(r[0], 0.0);
        assert!(r[1..10].iter().all(|&v| v == 0.125));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::new(1.0, 0.0, 5).is_err());
        let g = Grid1D::with_spacing(-30.0, 30.0, 0.05).unwrap();
        assert_eq!(g.nx(), 1201);
        assert!((g.dx() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn uniform_one_is_preserved() {
        let g = Grid1D::new(0.0, 10.0, 101).unwrap();
        let f = FieldState {
            time: 0.0,
            values: vec![1.0; 101],
        };
        let sim = simulate(&m(2, 1.0, 1), &g, &f, 0.5, 0.4, 0.25).unwrap();
        let last = sim.snapshots.last().unwrap();
        assert_eq!(last.time, 0.5);
        assert_eq!(sim.snapshots.len(), 3);
        assert!(last.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unstable_plateau_triggers_guard() {
        let g = Grid1D::new(0.0, 10.0, 51).unwrap();
        let mut vals = vec![1.05; 51];
        vals[0] = 1.0;
        vals[50] = 1.0;
        let f = FieldState {
            time: 0.0,
            values: vals,
        };
        match simulate(&m(2, 1.0, 1), &g, &f, 50.0, 0.4, 1.0) {
            Err(Error::BlowUp { max_u, .. }) => assert!(max_u > 2.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn crossing_counts() {
        let g = Grid1D::new(0.0, 4.0, 5).unwrap();
        assert!((crossing(&g, &[0.0, 0.2, 0.6, 1.0, 1.0], 0.5).unwrap() - 1.75).abs() < 1e-15);
        assert!(crossing(&g, &[0.0, 0.1, 0.2, 0.3, 0.4], 0.5).is_err());
        assert!(crossing(&g, &[0.0, 0.6, 0.2, 0.6, 1.0], 0.5).is_err());
    }

    #[test]
    fn identical_snapshots_have_zero_speed() {
        let g = Grid1D::new(0.0, 40.0, 41).unwrap();
        let v: Vec<f64> = (0..41).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let snaps: Vec<_> = (0..3)
            .map(|k| FieldState {
                time: k as f64,
                values: v.clone(),
            })
            .collect();
        let est = measure_front_speed(&snaps, &g, 0.5).unwrap();
        assert_eq!(est.speed, 0.0);
        assert_eq!(est.fit_residual, 0.0);
    }
}
