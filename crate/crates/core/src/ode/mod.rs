//! Adaptive one-step integrators for small autonomous or non-autonomous
//! systems with fixed dimension `N`.
//!
//! Two steppers share one driver:
//!
//! | Stepper          | Order | Error estimate     | Dense output       | Use            |
//! |------------------|-------|--------------------|--------------------|----------------|
//! | [`DormandPrince`]| 5(4)  | embedded pair      | 4th-degree contd5  | nonstiff       |
//! | [`Radau5`]       | 5     | step doubling      | collocation cubic  | stiff          |
//!
//! The driver handles step-size control, terminal events (zero crossing of a
//! scalar function, located on the dense output), early stops and optional
//! sub-sampling so that piecewise-linear interpolation of the returned samples
//! stays within a requested number of error units.

mod dopri5;
mod linalg;
mod radau5;

pub use dopri5::DormandPrince;
pub use radau5::Radau5;

use crate::error::{Error, Result};

/// Right-hand side `y' = f(t, y)` with an optional analytic Jacobian.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// Forward-difference Jacobian unless overridden.
    fn jacobian(&self, t: f64, y: &[f64; N]) -> [[f64; N]; N] {
        let f0 = self.rhs(t, y);
        let mut jac = [[0.0; N]; N];
        for j in 0..N {
            let dy = f64::EPSILON.sqrt() * y[j].abs().max(1e-8);
            let mut yp = *y;
            yp[j] += dy;
            let f1 = self.rhs(t, &yp);
            for i in 0..N {
                jac[i][j] = (f1[i] - f0[i]) / dy;
            }
        }
        jac
    }
}

/// Adapter turning a closure into an [`OdeSystem`].
pub struct FnSystem<F>(pub F);

impl<const N: usize, F> OdeSystem<N> for FnSystem<F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.0)(t, y)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    /// First trial step magnitude; estimated when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Piecewise-linear interpolation tolerance for sub-sampling, in units of
    /// the error scale `atol + rtol |y|`. `None` keeps only step endpoints.
    pub interp_tol: Option<f64>,
}

impl<const N: usize> SolveOptions<N> {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol: [atol; N],
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            interp_tol: None,
        }
    }

    pub fn with_interp_tol(mut self, tol: f64) -> Self {
        self.interp_tol = Some(tol);
        self
    }

    pub fn with_h_init(mut self, h: f64) -> Self {
        self.h_init = Some(h);
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    fn scale(&self, a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| self.atol[i] + self.rtol * a[i].abs().max(b[i].abs()))
    }
}

/// Why the driver returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Reached the end of the requested span.
    Completed,
    /// The event function crossed zero; the last sample is the located root.
    Event,
    /// The stop predicate fired at the last sample.
    Stopped,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub outcome: Outcome,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

pub type EventFn<'a, const N: usize> = &'a dyn Fn(&[f64; N]) -> f64;
pub type StopFn<'a, const N: usize> = &'a dyn Fn(&[f64; N]) -> bool;

/// Optional callbacks evaluated on accepted steps.
pub struct Hooks<'a, const N: usize> {
    /// Terminal event: integration ends where this changes sign.
    pub event: Option<EventFn<'a, N>>,
    /// Early stop, checked at every accepted step endpoint.
    pub stop: Option<StopFn<'a, N>>,
}

impl<const N: usize> Default for Hooks<'_, N> {
    fn default() -> Self {
        Self {
            event: None,
            stop: None,
        }
    }
}

/// Polynomial representation of the solution across one (sub)step.
#[derive(Debug, Clone)]
pub(crate) enum DensePiece<const N: usize> {
    /// Hairer's contd5 form `r0 + th (r1 + (1-th) (r2 + th (r3 + (1-th) r4)))`.
    Dopri { t0: f64, h: f64, r: [[f64; N]; 5] },
    /// Collocation polynomial through `(0, y0)` and the stage abscissae.
    Collocation {
        t0: f64,
        h: f64,
        y0: [f64; N],
        stages: [[f64; N]; 3],
        nodes: [f64; 3],
    },
}

impl<const N: usize> DensePiece<N> {
    pub(crate) fn span(&self) -> (f64, f64) {
        match self {
            DensePiece::Dopri { t0, h, .. } | DensePiece::Collocation { t0, h, .. } => {
                (*t0, *t0 + *h)
            }
        }
    }

    pub(crate) fn eval(&self, t: f64) -> [f64; N] {
        match self {
            DensePiece::Dopri { t0, h, r } => {
                let th = (t - t0) / h;
                let th1 = 1.0 - th;
                std::array::from_fn(|i| {
                    r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
                })
            }
            DensePiece::Collocation {
                t0,
                h,
                y0,
                stages,
                nodes,
            } => {
                let th = (t - t0) / h;
                let xs = [0.0, nodes[0], nodes[1], nodes[2]];
                let mut out = [0.0; N];
                for k in 0..4 {
                    let mut basis = 1.0;
                    for m in 0..4 {
                        if m != k {
                            basis *= (th - xs[m]) / (xs[k] - xs[m]);
                        }
                    }
                    let yk = if k == 0 { y0 } else { &stages[k - 1] };
                    for i in 0..N {
                        out[i] += basis * yk[i];
                    }
                }
                out
            }
        }
    }
}

/// Result of one trial step.
pub(crate) struct Attempt<const N: usize> {
    pub y_new: [f64; N],
    /// Scaled error norm; the step is accepted when `err <= 1`.
    pub err: f64,
    pub dense: Vec<DensePiece<N>>,
}

pub(crate) trait Stepper<const N: usize> {
    /// Exponent denominator for the step-size controller (order + 1).
    fn error_order(&self) -> f64;

    /// `None` when the step could not be completed (e.g. Newton failure);
    /// the driver then shrinks the step.
    fn attempt<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
        opts: &SolveOptions<N>,
    ) -> Option<Attempt<N>>;

    fn next_factor(&mut self, err: f64, accepted: bool) -> f64;

    /// Reset any state carried between steps (FSAL stages, error history).
    fn reset(&mut self) {}
}

fn scaled_max<const N: usize>(v: &[f64; N], sc: &[f64; N]) -> f64 {
    v.iter()
        .zip(sc)
        .map(|(a, s)| (a / s).abs())
        .fold(0.0, f64::max)
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    dir: f64,
    order: f64,
    opts: &SolveOptions<N>,
) -> f64 {
    let sc = opts.scale(y0, y0);
    let f0 = sys.rhs(t0, y0);
    let d0 = scaled_max(y0, &sc);
    let d1 = scaled_max(&f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(opts.h_max);
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
    let f1 = sys.rhs(t0 + dir * h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_max(&df, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / order)
    };
    (100.0 * h0).min(h1).min(opts.h_max)
}

/// Adaptive Dormand-Prince 5(4) from `(t0, y0)` toward `t_end`.
pub fn solve_dopri5<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &SolveOptions<N>,
    hooks: &Hooks<'_, N>,
) -> Result<Trajectory<N>> {
    solve(&mut DormandPrince::new(), sys, t0, y0, t_end, opts, hooks)
}

/// Adaptive Radau IIA (order 5) from `(t0, y0)` toward `t_end`, for stiff
/// systems. Uses [`OdeSystem::jacobian`].
pub fn solve_radau5<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &SolveOptions<N>,
    hooks: &Hooks<'_, N>,
) -> Result<Trajectory<N>> {
    solve(&mut Radau5::new(), sys, t0, y0, t_end, opts, hooks)
}

/// Integrate `sys` from `(t0, y0)` toward `t_end` (either direction).
pub(crate) fn solve<const N: usize, S: OdeSystem<N>, M: Stepper<N>>(
    stepper: &mut M,
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &SolveOptions<N>,
    hooks: &Hooks<'_, N>,
) -> Result<Trajectory<N>> {
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }
    stepper.reset();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        outcome: Outcome::Completed,
        accepted: 0,
        rejected: 0,
    };
    if t_end == t0 {
        return Ok(traj);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = opts
        .h_init
        .unwrap_or_else(|| initial_step(sys, t0, &y0, dir, stepper.error_order(), opts))
        .abs();

    loop {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-15 * t.abs().max(1.0) {
            // Snap the final abscissa onto t_end.
            *traj.t.last_mut().unwrap() = t_end;
            return Ok(traj);
        }
        if traj.accepted + traj.rejected >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        h = h.min(opts.h_max);
        let last = h >= remaining;
        let step = if last { t_end - t } else { dir * h };
        if step.abs() <= 1e-14 * t.abs().max(1e-300) || step.abs() < f64::MIN_POSITIVE {
            return Err(Error::StepUnderflow { t });
        }

        let attempt = stepper.attempt(sys, t, &y, step, opts);
        let Some(att) = attempt else {
            traj.rejected += 1;
            h = step.abs() * 0.25;
            continue;
        };
        if !att.y_new.iter().all(|v| v.is_finite()) || !att.err.is_finite() {
            traj.rejected += 1;
            h = step.abs() * 0.25;
            if h <= 1e-14 * t.abs().max(1e-300) {
                return Err(Error::NonFinite { t });
            }
            continue;
        }
        if att.err > 1.0 {
            traj.rejected += 1;
            h = step.abs() * stepper.next_factor(att.err, false);
            continue;
        }

        traj.accepted += 1;
        let t_new = if last { t_end } else { t + step };

        if let Some(g) = hooks.event {
            let g0 = g(&y);
            let g1 = g(&att.y_new);
            if g0 != 0.0 && g0.signum() != g1.signum() {
                let (te, ye) = locate_event(&att.dense, g, t, t_new, &y, &att.y_new);
                let (te, ye) = polish_event(stepper, sys, opts, g, &att.dense, t, &y, te, ye);
                push_samples(&mut traj, &att.dense, t, te, &y, &ye, opts);
                traj.t.push(te);
                traj.y.push(ye);
                traj.outcome = Outcome::Event;
                return Ok(traj);
            }
        }

        push_samples(&mut traj, &att.dense, t, t_new, &y, &att.y_new, opts);
        traj.t.push(t_new);
        traj.y.push(att.y_new);
        t = t_new;
        y = att.y_new;

        if let Some(stop) = hooks.stop {
            if stop(&y) {
                traj.outcome = Outcome::Stopped;
                return Ok(traj);
            }
        }
        if last {
            return Ok(traj);
        }
        h = step.abs() * stepper.next_factor(att.err, true);
    }
}

fn dense_at<const N: usize>(pieces: &[DensePiece<N>], t: f64) -> [f64; N] {
    let piece = pieces
        .iter()
        .find(|p| {
            let (a, b) = p.span();
            (t - a) * (t - b) <= 0.0
        })
        .unwrap_or_else(|| pieces.last().unwrap());
    piece.eval(t)
}

/// Illinois-modified regula falsi on the dense output.
fn locate_event<const N: usize>(
    pieces: &[DensePiece<N>],
    g: &dyn Fn(&[f64; N]) -> f64,
    ta: f64,
    tb: f64,
    ya: &[f64; N],
    yb: &[f64; N],
) -> (f64, [f64; N]) {
    let (mut a, mut b) = (ta, tb);
    let (mut ga, mut gb) = (g(ya), g(yb));
    let mut side = 0i8;
    let mut best = (tb, *yb);
    for _ in 0..200 {
        let tm = if (ga - gb).abs() > 0.0 {
            (a * gb - b * ga) / (gb - ga)
        } else {
            0.5 * (a + b)
        };
        let ym = dense_at(pieces, tm);
        let gm = g(&ym);
        best = (tm, ym);
        if gm == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * tm.abs().max(1e-300) {
            break;
        }
        if gm.signum() == gb.signum() {
            b = tm;
            gb = gm;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = tm;
            ga = gm;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    best
}

/// Newton refinement of an event time using full steps from the step start,
/// since dense output can be less accurate than the step endpoint.
#[allow(clippy::too_many_arguments)]
fn polish_event<const N: usize, S: OdeSystem<N>, M: Stepper<N>>(
    stepper: &mut M,
    sys: &S,
    opts: &SolveOptions<N>,
    g: &dyn Fn(&[f64; N]) -> f64,
    pieces: &[DensePiece<N>],
    t: f64,
    y: &[f64; N],
    mut te: f64,
    mut ye: [f64; N],
) -> (f64, [f64; N]) {
    let (a, b) = (pieces[0].span().0, pieces.last().unwrap().span().1);
    let eps = 1e-6 * (b - a).abs();
    for _ in 0..5 {
        if te == t {
            break;
        }
        let Some(att) = stepper.attempt(sys, t, y, te - t, opts) else {
            break;
        };
        if !att.y_new.iter().all(|v| v.is_finite()) {
            break;
        }
        ye = att.y_new;
        let gv = g(&ye);
        let slope = (g(&dense_at(pieces, te + eps)) - g(&dense_at(pieces, te - eps))) / (2.0 * eps);
        if gv == 0.0 || slope == 0.0 || !slope.is_finite() {
            break;
        }
        let dt = gv / slope;
        if dt.abs() <= 4.0 * f64::EPSILON * te.abs().max(eps) {
            break;
        }
        te -= dt;
    }
    (te, ye)
}

/// Sub-sample `(ta, tb)` exclusive so that linear interpolation between the
/// pushed points meets `opts.interp_tol`.
fn push_samples<const N: usize>(
    traj: &mut Trajectory<N>,
    pieces: &[DensePiece<N>],
    ta: f64,
    tb: f64,
    ya: &[f64; N],
    yb: &[f64; N],
    opts: &SolveOptions<N>,
) {
    let Some(tol) = opts.interp_tol else {
        return;
    };
    refine(traj, pieces, ta, tb, ya, yb, opts, tol, 0);
}

#[allow(clippy::too_many_arguments)]
fn refine<const N: usize>(
    traj: &mut Trajectory<N>,
    pieces: &[DensePiece<N>],
    ta: f64,
    tb: f64,
    ya: &[f64; N],
    yb: &[f64; N],
    opts: &SolveOptions<N>,
    tol: f64,
    depth: u32,
) {
    if depth >= 16 {
        return;
    }
    let tm = 0.5 * (ta + tb);
    let ym = dense_at(pieces, tm);
    let chord: [f64; N] = std::array::from_fn(|i| 0.5 * (ya[i] + yb[i]));
    let dev: [f64; N] = std::array::from_fn(|i| ym[i] - chord[i]);
    let sc = opts.scale(ya, yb);
    // Quarter points catch inflections that the midpoint misses.
    let yq = dense_at(pieces, 0.75 * ta + 0.25 * tb);
    let devq: [f64; N] = std::array::from_fn(|i| yq[i] - (0.75 * ya[i] + 0.25 * yb[i]));
    if scaled_max(&dev, &sc).max(scaled_max(&devq, &sc)) <= tol {
        return;
    }
    refine(traj, pieces, ta, tm, ya, &ym, opts, tol, depth + 1);
    traj.t.push(tm);
    traj.y.push(ym);
    refine(traj, pieces, tm, tb, &ym, yb, opts, tol, depth + 1);
}
