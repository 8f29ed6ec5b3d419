//! Planar traveling-wave dynamics in two time parameterizations.
//!
//! With `u(t, x) = phi(xi)`, `xi = x - c t`, the wave ODE reads
//!
//! ```text
//! phi' = psi,   psi' = -c phi^-p psi - phi + delta phi^(1-p)        (xi-time)
//! ```
//!
//! which is singular on `phi = 0`. Rescaling time by `ds/dxi = phi^-p` gives
//! the polynomial field
//!
//! ```text
//! phi' = phi^p psi,   psi' = -c psi - phi^(p+1) + delta phi          (s-time)
//! ```
//!
//! with the same orbits off `phi = 0` (`p` is even, so orientation is kept).

use num_complex::Complex64;
use serde::Serialize;

use crate::center_manifold;
use crate::error::{Error, Result};
use crate::ode::{self, DormandPrince, Hooks, OdeSystem, Outcome, Radau5, SolveOptions};
use crate::params::{powp, ModelParams};

/// Equilibrium-convergence radius in the max norm.
pub const EQUILIBRIUM_RADIUS: f64 = 1e-12;
/// Xi-time integration stops once `|phi|` falls below this.
pub const SINGULAR_LINE_GAP: f64 = 1e-8;
/// Relative seed depth used by [`connecting_orbit`].
pub const DEFAULT_SEED_FACTOR: f64 = 1e-4;
/// Horizon in s-time after the anchor when chasing convergence to `(1, 0)`,
/// on top of a multiple of the anchor's slow time scale `c / phi0^p`.
const FORWARD_HORIZON: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub phi: f64,
    pub psi: f64,
}

impl PhaseState {
    pub fn new(phi: f64, psi: f64) -> Self {
        Self { phi, psi }
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.psi.is_finite()
    }

    fn dist_max(&self, o: &PhaseState) -> f64 {
        (self.phi - o.phi).abs().max((self.psi - o.psi).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeParam {
    /// Original wave coordinate.
    Xi,
    /// Desingularized time.
    S,
}

impl std::fmt::Display for TimeParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TimeParam::Xi => "xi",
            TimeParam::S => "s",
        })
    }
}

impl std::str::FromStr for TimeParam {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "xi" => Ok(TimeParam::Xi),
            "s" => Ok(TimeParam::S),
            o => Err(format!("unknown time parameter '{o}' (expected xi or s)")),
        }
    }
}

/// Why an orbit ends where it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    /// End of the requested span.
    SpanEnd,
    /// Came within [`EQUILIBRIUM_RADIUS`] of an equilibrium.
    Equilibrium,
    /// Xi-time run reached `|phi| < SINGULAR_LINE_GAP`.
    SingularLine,
}

/// A sampled trajectory tagged with its time parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    param: TimeParam,
    t: Vec<f64>,
    states: Vec<PhaseState>,
    xi: Option<Vec<f64>>,
    anchor: Option<usize>,
    termination: Termination,
}

impl Orbit {
    /// Build an orbit from samples; `t` must be strictly monotone.
    pub fn new(param: TimeParam, t: Vec<f64>, states: Vec<PhaseState>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::EmptyOrbit);
        }
        if t.len() != states.len() {
            return Err(Error::Precondition(format!(
                "{} times but {} states",
                t.len(),
                states.len()
            )));
        }
        if !strictly_monotone(&t) {
            return Err(Error::Precondition(
                "sample times must be strictly monotone".into(),
            ));
        }
        if let Some(k) = states.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { t: t[k] });
        }
        Ok(Self {
            param,
            t,
            states,
            xi: None,
            anchor: None,
            termination: Termination::SpanEnd,
        })
    }

    pub fn param(&self) -> TimeParam {
        self.param
    }
    pub fn times(&self) -> &[f64] {
        &self.t
    }
    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }
    pub fn xi_values(&self) -> Option<&[f64]> {
        self.xi.as_deref()
    }
    /// Index of the sample where `xi = 0`, once recovered.
    pub fn anchor(&self) -> Option<usize> {
        self.anchor
    }
    pub fn termination(&self) -> Termination {
        self.termination
    }
    pub fn len(&self) -> usize {
        self.t.len()
    }
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
    pub fn first(&self) -> PhaseState {
        self.states[0]
    }
    pub fn last(&self) -> PhaseState {
        *self.states.last().unwrap()
    }

    /// The wave coordinate of each sample: `t` itself in xi-time, the
    /// recovered values in s-time.
    pub fn xi_axis(&self) -> Option<&[f64]> {
        match self.param {
            TimeParam::Xi => Some(&self.t),
            TimeParam::S => self.xi.as_deref(),
        }
    }

    /// `phi` at wave coordinate `xi` by cubic Hermite interpolation of
    /// `ln phi`, using the exact slope `d ln phi / d xi = psi / phi`.
    /// `None` outside the sampled range or where `phi <= 0`.
    pub fn phi_at_xi(&self, xi: f64) -> Option<f64> {
        let xs = self.xi_axis()?;
        let n = xs.len();
        if n < 2 || !(xi >= xs[0] && xi <= xs[n - 1]) {
            return None;
        }
        let k = match xs.partition_point(|&v| v <= xi) {
            0 => 0,
            j if j >= n => n - 2,
            j => j - 1,
        };
        let (a, b) = (self.states[k], self.states[k + 1]);
        if a.phi <= 0.0 || b.phi <= 0.0 {
            return None;
        }
        let h = xs[k + 1] - xs[k];
        if h <= 0.0 {
            return Some(a.phi);
        }
        let th = (xi - xs[k]) / h;
        let (y0, y1) = (a.phi.ln(), b.phi.ln());
        let (m0, m1) = (a.psi / a.phi, b.psi / b.phi);
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        Some((h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1).exp())
    }
}

fn strictly_monotone(t: &[f64]) -> bool {
    t.windows(2).all(|w| w[1] > w[0]) || t.windows(2).all(|w| w[1] < w[0])
}

/// `(psi, -c phi^-p psi - phi + delta phi^(1-p))`; singular at `phi = 0`.
pub fn vector_field_xi(params: &ModelParams, state: PhaseState) -> Result<PhaseState> {
    let PhaseState { phi, psi } = state;
    if phi == 0.0 {
        return Err(Error::Singularity(
            "the xi-time field is undefined on phi = 0".into(),
        ));
    }
    let inv_pp = 1.0 / powp(phi, params.p());
    Ok(PhaseState {
        phi: psi,
        psi: -params.c() * inv_pp * psi - phi + params.deltaf() * phi * inv_pp,
    })
}

/// `(phi^p psi, -c psi - phi^(p+1) + delta phi)`.
pub fn vector_field_s(params: &ModelParams, state: PhaseState) -> PhaseState {
    let PhaseState { phi, psi } = state;
    let pp = powp(phi, params.p());
    PhaseState {
        phi: pp * psi,
        psi: -params.c() * psi - pp * phi + params.deltaf() * phi,
    }
}

pub fn jacobian_xi(params: &ModelParams, state: PhaseState) -> Result<[[f64; 2]; 2]> {
    let PhaseState { phi, psi } = state;
    if phi == 0.0 {
        return Err(Error::Singularity(
            "the xi-time Jacobian is undefined on phi = 0".into(),
        ));
    }
    let p = params.pf();
    let inv_pp = 1.0 / powp(phi, params.p());
    let c = params.c();
    Ok([
        [0.0, 1.0],
        [
            p * c * inv_pp * psi / phi - 1.0 + params.deltaf() * (1.0 - p) * inv_pp,
            -c * inv_pp,
        ],
    ])
}

pub fn jacobian_s(params: &ModelParams, state: PhaseState) -> [[f64; 2]; 2] {
    let PhaseState { phi, psi } = state;
    let p = params.pf();
    let pp = powp(phi, params.p());
    let ppm1 = if params.p() == 0 {
        0.0
    } else {
        phi.powi(params.p() as i32 - 1)
    };
    [
        [p * ppm1 * psi, pp],
        [-(p + 1.0) * pp + params.deltaf(), -params.c()],
    ]
}

/// Eigenvalues of a real 2x2 matrix, ordered by descending real part then
/// descending imaginary part.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let q = 0.5 * (tr + tr.signum() * r);
        let (a, b) = if q != 0.0 {
            (q, det / q)
        } else {
            (0.5 * (tr + r), 0.5 * (tr - r))
        };
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Classification {
    SpiralSink,
    /// `repeated` marks the boundary case `D = 0`.
    NodeSink {
        repeated: bool,
    },
    /// Eigenvalues `0` and `-c` of the s-time field at the origin.
    CenterDegenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumInfo {
    pub location: PhaseState,
    pub jacobian: [[f64; 2]; 2],
    #[serde(serialize_with = "ser_complex_pair")]
    pub eigenvalues: [Complex64; 2],
    pub classification: Classification,
}

fn ser_complex_pair<S: serde::Serializer>(
    v: &[Complex64; 2],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// `E_O` (s-time Jacobian) and, for `delta = 1`, `+-E_delta` (xi-time
/// Jacobian). The `+-E_delta` classification follows the sign of `D`.
pub fn equilibria(params: &ModelParams) -> Vec<EquilibriumInfo> {
    let origin = PhaseState::new(0.0, 0.0);
    let j0 = jacobian_s(params, origin);
    let mut out = vec![EquilibriumInfo {
        location: origin,
        jacobian: j0,
        eigenvalues: [Complex64::new(0.0, 0.0), Complex64::new(-params.c(), 0.0)],
        classification: Classification::CenterDegenerate,
    }];
    if params.delta() == 1 {
        let d = params.discriminant();
        let classification = if d < 0.0 {
            Classification::SpiralSink
        } else {
            Classification::NodeSink { repeated: d == 0.0 }
        };
        for sign in [1.0, -1.0] {
            let loc = PhaseState::new(sign, 0.0);
            let j = jacobian_xi(params, loc).expect("phi = +-1 is off the singular line");
            out.push(EquilibriumInfo {
                location: loc,
                jacobian: j,
                eigenvalues: eigenvalues_2x2(&j),
                classification,
            });
        }
    }
    out
}

/// Eigenvectors at the origin of the s-time field: `(c, 1)` for the zero
/// eigenvalue and `(0, 1)` for `-c` (valid for `delta = 1`).
pub fn origin_eigenvectors(params: &ModelParams) -> [[f64; 2]; 2] {
    [[params.c(), 1.0], [0.0, 1.0]]
}

struct XiSystem<'a>(&'a ModelParams);

impl OdeSystem<2> for XiSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
        match vector_field_xi(self.0, PhaseState::new(y[0], y[1])) {
            Ok(d) => [d.phi, d.psi],
            Err(_) => [f64::NAN; 2],
        }
    }
    fn jacobian(&self, _t: f64, y: &[f64; 2]) -> [[f64; 2]; 2] {
        jacobian_xi(self.0, PhaseState::new(y[0], y[1])).unwrap_or([[f64::NAN; 2]; 2])
    }
}

struct SSystem<'a>(&'a ModelParams);

impl OdeSystem<2> for SSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
        let d = vector_field_s(self.0, PhaseState::new(y[0], y[1]));
        [d.phi, d.psi]
    }
    fn jacobian(&self, _t: f64, y: &[f64; 2]) -> [[f64; 2]; 2] {
        jacobian_s(self.0, PhaseState::new(y[0], y[1]))
    }
}

/// s-time field augmented with `dxi/ds = phi^p`.
struct SXiSystem<'a>(&'a ModelParams);

impl OdeSystem<3> for SXiSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 3]) -> [f64; 3] {
        let d = vector_field_s(self.0, PhaseState::new(y[0], y[1]));
        [d.phi, d.psi, powp(y[0], self.0.p())]
    }
    fn jacobian(&self, _t: f64, y: &[f64; 3]) -> [[f64; 3]; 3] {
        let j = jacobian_s(self.0, PhaseState::new(y[0], y[1]));
        let dxi = self.0.pf() * y[0].powi(self.0.p() as i32 - 1);
        [
            [j[0][0], j[0][1], 0.0],
            [j[1][0], j[1][1], 0.0],
            [dxi, 0.0, 0.0],
        ]
    }
}

fn equilibrium_points(params: &ModelParams, which: TimeParam) -> Vec<PhaseState> {
    equilibria(params)
        .into_iter()
        .map(|e| e.location)
        .filter(|loc| which == TimeParam::S || loc.phi != 0.0)
        .collect()
}

fn near_equilibrium(eqs: &[PhaseState], s: PhaseState) -> bool {
    eqs.iter().any(|e| e.dist_max(&s) < EQUILIBRIUM_RADIUS)
}

/// Adaptive Dormand-Prince solution of either field from `start` over
/// `t_span`, with `tol` as both relative and absolute tolerance.
///
/// Samples are dense enough for piecewise-linear interpolation to stay within
/// `10 tol`. The run ends early within [`EQUILIBRIUM_RADIUS`] of an
/// equilibrium and, in xi-time, when `|phi|` drops below [`SINGULAR_LINE_GAP`].
pub fn integrate(
    params: &ModelParams,
    which: TimeParam,
    start: PhaseState,
    t_span: (f64, f64),
    tol: f64,
) -> Result<Orbit> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !start.is_finite() {
        return Err(Error::NonFinite { t: t_span.0 });
    }
    if which == TimeParam::Xi && start.phi.abs() < SINGULAR_LINE_GAP {
        return Err(Error::Singularity(format!(
            "xi-time start needs |phi| >= {SINGULAR_LINE_GAP}, got {}",
            start.phi
        )));
    }
    let eqs = equilibrium_points(params, which);
    if near_equilibrium(&eqs, start) {
        let (t, states) = if t_span.0 == t_span.1 {
            (vec![t_span.0], vec![start])
        } else {
            (vec![t_span.0, t_span.1], vec![start, start])
        };
        let mut orbit = Orbit::new(which, t, states)?;
        orbit.termination = Termination::Equilibrium;
        return Ok(orbit);
    }

    let opts = SolveOptions::new(tol, tol).with_interp_tol(10.0);
    let stop = |y: &[f64; 2]| near_equilibrium(&eqs, PhaseState::new(y[0], y[1]));
    let y0 = [start.phi, start.psi];
    let mut stepper = DormandPrince::new();
    let traj = match which {
        TimeParam::Xi => {
            // Signed so that a step jumping across phi = 0 still registers.
            let side = start.phi.signum();
            let gap = move |y: &[f64; 2]| side * y[0] - SINGULAR_LINE_GAP;
            let hooks = Hooks {
                event: Some(&gap),
                stop: Some(&stop),
            };
            ode::solve(
                &mut stepper,
                &XiSystem(params),
                t_span.0,
                y0,
                t_span.1,
                &opts,
                &hooks,
            )?
        }
        TimeParam::S => {
            let hooks = Hooks {
                event: None,
                stop: Some(&stop),
            };
            ode::solve(
                &mut stepper,
                &SSystem(params),
                t_span.0,
                y0,
                t_span.1,
                &opts,
                &hooks,
            )?
        }
    };
    let termination = match traj.outcome {
        Outcome::Completed => Termination::SpanEnd,
        Outcome::Event => Termination::SingularLine,
        Outcome::Stopped => Termination::Equilibrium,
    };
    let states = traj.y.iter().map(|y| PhaseState::new(y[0], y[1])).collect();
    let mut orbit = Orbit::new(which, traj.t, states)?;
    orbit.termination = termination;
    Ok(orbit)
}

/// Fill in `xi` for an s-time orbit by trapezoidal quadrature of
/// `dxi/ds = phi^p`, with `xi = 0` at the sample whose `phi` is closest to
/// `phi0`.
pub fn recover_xi(params: &ModelParams, orbit: &Orbit, phi0: f64) -> Result<Orbit> {
    if orbit.is_empty() {
        return Err(Error::EmptyOrbit);
    }
    if !phi0.is_finite() {
        return Err(Error::MissingAnchor(format!(
            "anchor value {phi0} is not finite"
        )));
    }
    let k = orbit
        .states
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.phi - phi0).abs().total_cmp(&(b.1.phi - phi0).abs()))
        .map(|(k, _)| k)
        .unwrap();
    recover_xi_at(params, orbit, k)
}

/// As [`recover_xi`] with an explicit anchor index.
pub fn recover_xi_at(params: &ModelParams, orbit: &Orbit, anchor: usize) -> Result<Orbit> {
    if orbit.is_empty() {
        return Err(Error::EmptyOrbit);
    }
    if orbit.param != TimeParam::S {
        return Err(Error::Precondition(
            "xi recovery needs an s-time orbit".into(),
        ));
    }
    if anchor >= orbit.len() {
        return Err(Error::MissingAnchor(format!(
            "anchor index {anchor} outside {} samples",
            orbit.len()
        )));
    }
    let w: Vec<f64> = orbit
        .states
        .iter()
        .map(|s| powp(s.phi, params.p()))
        .collect();
    let n = orbit.len();
    let mut xi = vec![0.0; n];
    for k in anchor + 1..n {
        xi[k] = xi[k - 1] + 0.5 * (w[k] + w[k - 1]) * (orbit.t[k] - orbit.t[k - 1]);
    }
    for k in (0..anchor).rev() {
        xi[k] = xi[k + 1] - 0.5 * (w[k] + w[k + 1]) * (orbit.t[k + 1] - orbit.t[k]);
    }
    let mut out = orbit.clone();
    out.xi = Some(xi);
    out.anchor = Some(anchor);
    Ok(out)
}

/// [`connecting_orbit_from_seed`] with the seed at `phi0 * 1e-4`.
pub fn connecting_orbit(params: &ModelParams, phi0: f64, tol: f64) -> Result<Orbit> {
    connecting_orbit_from_seed(params, phi0, phi0 * DEFAULT_SEED_FACTOR, tol)
}

/// The wave orbit leaving `E_O` along its center manifold and entering
/// `E_delta = (1, 0)`, in s-time with `xi` attached and `xi = s = 0` where
/// `phi = phi0`.
///
/// The orbit is seeded at `(seed, h(seed))` on the truncated manifold graph
/// and integrated forward only: backward in s the `-c` direction repels, so
/// the manifold is attracting for forward runs. Near the seed the field is
/// stiff (fast rate `c`, slow rate of order `seed^p`), so the collocation
/// solver is used with `dxi/ds = phi^p` carried as a third component.
/// The climb from seed to anchor is split into decades, each restarting its
/// local time at zero, so that anchor-relative `s` and `xi` keep full
/// relative precision even when the total s-time is astronomically large.
pub fn connecting_orbit_from_seed(
    params: &ModelParams,
    phi0: f64,
    seed: f64,
    tol: f64,
) -> Result<Orbit> {
    params.require_delta_one("the connecting orbit")?;
    let bound = params.anchor_bound();
    if !(phi0 > 0.0 && phi0 < bound) {
        return Err(Error::Precondition(format!(
            "anchor phi0 = {phi0} must lie in (0, {bound:.6})"
        )));
    }
    if !(seed > 0.0 && seed < phi0) {
        return Err(Error::Precondition(format!(
            "seed {seed} must lie in (0, phi0 = {phi0})"
        )));
    }
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::Precondition(format!("tolerance {tol} out of range")));
    }
    let model = center_manifold::CenterManifoldModel::new(params)?;
    let sys = SXiSystem(params);
    // Relative control in phi and psi down to the seed scale. No linear
    // sub-sampling: `Orbit::phi_at_xi` interpolates with exact slopes.
    let mut opts = SolveOptions::new(tol, tol);
    opts.atol = [tol * seed * 1e-3, tol * seed * 1e-3, tol];

    // Phase 1: seed -> anchor in decades of phi.
    let mut segments: Vec<ode::Trajectory<3>> = Vec::new();
    let mut y = [seed, model.graph(seed), 0.0];
    loop {
        let target = (y[0] * 10.0).min(phi0);
        let g = move |v: &[f64; 3]| v[0] - target;
        let hooks = Hooks {
            event: Some(&g),
            stop: None,
        };
        // Slow time scale of the decade is c / phi^p.
        opts.h_init = Some(1e-4 * params.c() / powp(y[0], params.p()));
        let mut tr = ode::solve(&mut Radau5::new(), &sys, 0.0, y, f64::MAX, &opts, &hooks)?;
        if tr.outcome != Outcome::Event {
            return Err(Error::MissingAnchor(format!(
                "orbit never reached phi = {target}"
            )));
        }
        let (_, mut end) = tr.last();
        end[0] = target;
        *tr.y.last_mut().unwrap() = end;
        y = end;
        y[2] = 0.0;
        segments.push(tr);
        if target >= phi0 {
            break;
        }
    }

    // Re-reference each decade to the anchor, accumulating offsets from the
    // anchor side so magnitudes stay comparable to the values themselves.
    let mut t_all: Vec<f64> = Vec::new();
    let mut y_all: Vec<[f64; 3]> = Vec::new();
    let mut pieces: Vec<(Vec<f64>, Vec<[f64; 3]>)> = Vec::with_capacity(segments.len());
    let (mut dt_after, mut dxi_after) = (0.0, 0.0);
    for tr in segments.iter().rev() {
        let (dur, end) = tr.last();
        dt_after += dur;
        dxi_after += end[2];
        let n = tr.t.len();
        // Drop each segment's endpoint; it is the next segment's start (or
        // the anchor, appended below).
        let ts: Vec<f64> = tr.t[..n - 1].iter().map(|&t| t - dt_after).collect();
        let ys: Vec<[f64; 3]> = tr.y[..n - 1]
            .iter()
            .map(|v| [v[0], v[1], v[2] - dxi_after])
            .collect();
        pieces.push((ts, ys));
    }
    for (ts, ys) in pieces.into_iter().rev() {
        for (t, v) in ts.into_iter().zip(ys) {
            // Early steps of a long decade can round onto one abscissa.
            if t_all.last().is_some_and(|&prev| t <= prev) {
                continue;
            }
            t_all.push(t);
            y_all.push(v);
        }
    }
    let anchor = t_all.len();
    let anchor_state = *segments.last().unwrap().y.last().unwrap();
    t_all.push(0.0);
    y_all.push([phi0, anchor_state[1], 0.0]);

    // Phase 2: anchor -> E_delta.
    let target = PhaseState::new(1.0, 0.0);
    let stop = |v: &[f64; 3]| PhaseState::new(v[0], v[1]).dist_max(&target) < EQUILIBRIUM_RADIUS;
    let hooks = Hooks {
        event: None,
        stop: Some(&stop),
    };
    let mut opts2 = SolveOptions::new(tol, tol);
    opts2.atol = [tol * 1e-3, tol * 1e-3, tol];
    let tr = ode::solve(
        &mut Radau5::new(),
        &sys,
        0.0,
        [phi0, anchor_state[1], 0.0],
        FORWARD_HORIZON + 100.0 * params.c() / powp(phi0, params.p()),
        &opts2,
        &hooks,
    )?;
    t_all.extend_from_slice(&tr.t[1..]);
    y_all.extend_from_slice(&tr.y[1..]);

    let states = y_all.iter().map(|v| PhaseState::new(v[0], v[1])).collect();
    let mut orbit = Orbit::new(TimeParam::S, t_all, states)?;
    orbit.xi = Some(y_all.iter().map(|v| v[2]).collect());
    orbit.anchor = Some(anchor);
    orbit.termination = match tr.outcome {
        Outcome::Stopped => Termination::Equilibrium,
        _ => Termination::SpanEnd,
    };
    Ok(orbit)
}

/// One row of a direction-field grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitRow {
    pub phi: f64,
    pub psi: f64,
    pub dphi: f64,
    pub dpsi: f64,
}

/// Unit direction vectors of the chosen field on an `n_phi x n_psi` grid.
/// Xi-time grid points on `phi = 0` and stationary points are skipped.
pub fn portrait(
    params: &ModelParams,
    which: TimeParam,
    phi_range: (f64, f64),
    psi_range: (f64, f64),
    n_phi: usize,
    n_psi: usize,
) -> Result<Vec<PortraitRow>> {
    if n_phi < 2 || n_psi < 2 {
        return Err(Error::Grid(
            "portrait grid needs at least 2 points per axis".into(),
        ));
    }
    let lin = |r: (f64, f64), n: usize, k: usize| r.0 + (r.1 - r.0) * k as f64 / (n - 1) as f64;
    let mut rows = Vec::with_capacity(n_phi * n_psi);
    for i in 0..n_phi {
        for j in 0..n_psi {
            let s = PhaseState::new(lin(phi_range, n_phi, i), lin(psi_range, n_psi, j));
            let d = match which {
                TimeParam::S => vector_field_s(params, s),
                TimeParam::Xi => match vector_field_xi(params, s) {
                    Ok(d) => d,
                    Err(_) => continue,
                },
            };
            let norm = d.phi.hypot(d.psi);
            if norm == 0.0 || !norm.is_finite() {
                continue;
            }
            rows.push(PortraitRow {
                phi: s.phi,
                psi: s.psi,
                dphi: d.phi / norm,
                dpsi: d.psi / norm,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u32, c: f64, d: u8) -> ModelParams {
        ModelParams::new(p, c, d).unwrap()
    }

    #[test]
    fn field_examples() {
        let z = vector_field_xi(&m(2, 1.0, 1), PhaseState::new(1.0, 0.0)).unwrap();
        assert_eq!((z.phi, z.psi), (0.0, 0.0));
        let v = vector_field_xi(&m(2, 1.0, 1), PhaseState::new(0.5, 0.0)).unwrap();
        assert_eq!((v.phi, v.psi), (0.0, 1.5));
        let v = vector_field_xi(&m(2, 1.0, 0), PhaseState::new(1.0, 1.0)).unwrap();
        assert_eq!((v.phi, v.psi), (1.0, -2.0));
        assert!(vector_field_xi(&m(2, 1.0, 1), PhaseState::new(0.0, 1.0)).is_err());
        let v = vector_field_s(&m(2, 1.0, 1), PhaseState::new(0.5, 0.2));
        assert!((v.phi - 0.05).abs() < 1e-16 && (v.psi - 0.175).abs() < 1e-16);
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        let pr = m(4, 1.7, 1);
        let s = PhaseState::new(0.6, -0.3);
        let h = 1e-7;
        let js = jacobian_s(&pr, s);
        let jx = jacobian_xi(&pr, s).unwrap();
        for (j, dir) in [(0, (h, 0.0)), (1, (0.0, h))] {
            let sp = PhaseState::new(s.phi + dir.0, s.psi + dir.1);
            let sm = PhaseState::new(s.phi - dir.0, s.psi - dir.1);
            let (fp, fm) = (vector_field_s(&pr, sp), vector_field_s(&pr, sm));
            assert!((js[0][j] - (fp.phi - fm.phi) / (2.0 * h)).abs() < 1e-6);
            assert!((js[1][j] - (fp.psi - fm.psi) / (2.0 * h)).abs() < 1e-6);
            let (fp, fm) = (
                vector_field_xi(&pr, sp).unwrap(),
                vector_field_xi(&pr, sm).unwrap(),
            );
            assert!((jx[0][j] - (fp.phi - fm.phi) / (2.0 * h)).abs() < 1e-5);
            assert!((jx[1][j] - (fp.psi - fm.psi) / (2.0 * h)).abs() < 1e-5);
        }
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let e = eigenvalues_2x2(&[[0.0, 1.0], [-2.0, -1.0]]);
        assert!((e[0].re + 0.5).abs() < 1e-15 && (e[0].im - 7f64.sqrt() / 2.0).abs() < 1e-15);
        let e = eigenvalues_2x2(&[[0.0, 1.0], [-2.0, -5.0]]);
        let r = 17f64.sqrt();
        assert!((e[0].re - (-5.0 + r) / 2.0).abs() < 1e-15);
        assert!((e[1].re - (-5.0 - r) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_orbit_at_equilibrium() {
        let o = integrate(
            &m(2, 1.0, 1),
            TimeParam::S,
            PhaseState::new(1.0, 0.0),
            (0.0, 5.0),
            1e-8,
        )
        .unwrap();
        assert_eq!(o.termination(), Termination::Equilibrium);
        assert!(o.states().iter().all(|s| *s == PhaseState::new(1.0, 0.0)));
    }

    #[test]
    fn xi_orbit_stops_near_singular_line() {
        // Weak damping c phi^-p psi cannot turn this orbit before phi = 0.
        let o = integrate(
            &m(2, 1e-6, 0),
            TimeParam::Xi,
            PhaseState::new(0.1, -1e3),
            (0.0, 10.0),
            1e-9,
        )
        .unwrap();
        assert_eq!(o.termination(), Termination::SingularLine);
        assert!((o.last().phi - SINGULAR_LINE_GAP).abs() < 1e-12);
    }

    #[test]
    fn recover_xi_trivial_cases() {
        let pr = m(2, 1.0, 1);
        let t: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let ones = vec![PhaseState::new(1.0, 0.0); t.len()];
        let o = recover_xi_at(&pr, &Orbit::new(TimeParam::S, t.clone(), ones).unwrap(), 0).unwrap();
        for (x, s) in o.xi_values().unwrap().iter().zip(&t) {
            assert!((x - s).abs() < 1e-14);
        }
        let zeros = vec![PhaseState::new(0.0, 0.0); t.len()];
        let o = recover_xi(&pr, &Orbit::new(TimeParam::S, t, zeros).unwrap(), 0.0).unwrap();
        assert!(o.xi_values().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn orbit_rejects_bad_samples() {
        assert_eq!(
            Orbit::new(TimeParam::S, vec![], vec![]),
            Err(Error::EmptyOrbit)
        );
        let s = PhaseState::new(0.1, 0.1);
        assert!(Orbit::new(TimeParam::S, vec![0.0, 0.0], vec![s, s]).is_err());
        assert!(recover_xi(
            &m(2, 1.0, 1),
            &Orbit::new(TimeParam::Xi, vec![0.0], vec![s]).unwrap(),
            0.1
        )
        .is_err());
    }

    #[test]
    fn hermite_log_interpolation_is_exact_for_exponentials() {
        // phi = e^xi has psi = phi, so ln phi is linear.
        let t: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let st: Vec<_> = t
            .iter()
            .map(|&x: &f64| PhaseState::new(x.exp(), x.exp()))
            .collect();
        let o = Orbit::new(TimeParam::Xi, t, st).unwrap();
        let v = o.phi_at_xi(2.3).unwrap();
        assert!((v - 2.3f64.exp()).abs() < 1e-13 * v);
        assert!(o.phi_at_xi(4.5).is_none());
    }
}
