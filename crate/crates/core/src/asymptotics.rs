//! Closed forms along the center manifold as `phi -> 0` (`delta = 1`).
//!
//! With `w = phi^-p` the reduced flow becomes `w' = A + B/w`,
//! `A = -p/c < 0`, `B = p(c^2+1)/c^3 > 0`. Its solution is
//!
//! ```text
//! w(s) = -B (W0(E(s)) + 1) / A,
//! E(s) = -(A/B) exp(-(A^2/B) s - (A^2 C1 + B)/B),
//! ```
//!
//! `E(s) > 0`, and `W(E) + 1 = -A w/B > 0` selects the principal branch.
//!
//! Eliminating `s` instead (`dphi/dxi = phi/c - (c^2+1)/c^3 phi^(p+1)`) gives
//!
//! ```text
//! xi + C3 = (c/p) ln |phi^p / ((c^2+1) phi^p - c^2)|
//! phi(xi) = (mu c^2 / (mu (c^2+1) - exp(-p xi / c)))^(1/p),   mu < 0,
//! ```
//!
//! with `mu = -|phi0^p / ((c^2+1) phi0^p - c^2)|` so that `phi(0) = phi0`.

use serde::Serialize;

use crate::center_manifold::reduced_flow;
use crate::error::{Error, Result};
use crate::ode::{self, DormandPrince, FnSystem, Hooks, Outcome, SolveOptions};
use crate::params::{powp, ModelParams};
use crate::quadrature;
use crate::special_functions::lambert_w0_of_exp;

/// Constants of the `w`-transform, with `C1` fixed by `w(0) = phi0^-p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WTransform {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    /// `w(0) = phi0^-p`.
    pub w0: f64,
    p: u32,
}

impl WTransform {
    pub fn p(&self) -> u32 {
        self.p
    }

    /// `ln E(s)`.
    pub fn log_e(&self, s: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        (-a / b).ln() - (a * a / b) * s - (a * a * self.c1 + b) / b
    }

    /// `E(s)`, possibly `inf` for very negative `s`; see [`Self::log_e`].
    pub fn e(&self, s: f64) -> f64 {
        self.log_e(s).exp()
    }

    /// `W0(E(s))`.
    pub fn w_of_e(&self, s: f64) -> f64 {
        lambert_w0_of_exp(self.log_e(s)).expect("E(s) > 0 lies in the principal domain")
    }
}

pub fn make_w_transform(params: &ModelParams, phi0: f64) -> Result<WTransform> {
    params.require_delta_one("the w-transform")?;
    let (p, c) = (params.pf(), params.c());
    let a = -p / c;
    let b = p * (c * c + 1.0) / (c * c * c);
    if !(phi0 > 0.0 && phi0 < params.reduced_flow_zero()) {
        return Err(Error::Precondition(format!(
            "phi0 = {phi0} must satisfy 0 < phi0^p < c^2/(c^2+1) (phi0 < {:.6})",
            params.reduced_flow_zero()
        )));
    }
    let w0 = 1.0 / powp(phi0, params.p());
    let u0 = a * w0 / b + 1.0;
    if !(u0 < 0.0) {
        return Err(Error::Precondition(format!(
            "(A/B) w0 + 1 = {u0} is not negative"
        )));
    }
    // Taking logs of -u0 e^-u0 = -(A/B) e^-(A^2 C1 + B)/B.
    let c1 = (b * ((-a / b).ln() - (-u0).ln() + u0) - b) / (a * a);
    let c2 = (-a / b).ln() - (a * a * c1 + b) / b + 1.0;
    Ok(WTransform {
        a,
        b,
        c1,
        c2,
        w0,
        p: params.p(),
    })
}

/// `phi(s) = w(s)^(-1/p)`.
pub fn phi_of_s(wt: &WTransform, params: &ModelParams, s: f64) -> f64 {
    ds_dxi(wt, s).powf(-1.0 / params.pf())
}

/// `ds/dxi = phi^-p = w(s) = -B (W0(E(s)) + 1)/A`.
pub fn ds_dxi(wt: &WTransform, s: f64) -> f64 {
    -wt.b * (wt.w_of_e(s) + 1.0) / wt.a
}

/// `xi(s) = (1/A) ln(W0(E(s)) / W0(E(0)))`: the exact antiderivative of
/// `1/w(s)` with `xi(0) = 0`.
pub fn xi_of_s_closed_form(wt: &WTransform, s: f64) -> f64 {
    (wt.w_of_e(s) / wt.w_of_e(0.0)).ln() / wt.a
}

/// `xi(s)` for each target by adaptive quadrature of `1/w` from `0`.
/// Targets must be `<= 0` and strictly decreasing.
pub fn verify_xi_divergence(
    wt: &WTransform,
    params: &ModelParams,
    s_targets: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if s_targets.iter().any(|&s| !(s <= 0.0)) || s_targets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(
            "s targets must be non-positive and strictly decreasing".into(),
        ));
    }
    if params.p() != wt.p {
        return Err(Error::Precondition(format!(
            "transform built for p = {} used with p = {}",
            wt.p,
            params.p()
        )));
    }
    let f = |s: f64| 1.0 / ds_dxi(wt, s);
    let mut out = Vec::with_capacity(s_targets.len());
    let (mut s_prev, mut xi) = (0.0, 0.0);
    for &s in s_targets {
        let q = quadrature::integrate(f, s_prev, s, 0.0, 1e-13, 20_000)?;
        xi += q.value;
        out.push((s, xi));
        s_prev = s;
    }
    Ok(out)
}

/// `ln |phi^p / ((c^2+1) phi^p - c^2)|` and the sign of the denominator.
fn log_ratio(params: &ModelParams, phi: f64) -> Result<(f64, f64)> {
    let c2 = params.c() * params.c();
    let pp = powp(phi, params.p());
    let z = (c2 + 1.0) * pp / c2;
    if z == 1.0 {
        return Err(Error::Singularity(format!(
            "phi = {phi} is the zero of the reduced flow"
        )));
    }
    let log_den = if z < 0.5 {
        c2.ln() + (-z).ln_1p()
    } else {
        ((c2 + 1.0) * pp - c2).abs().ln()
    };
    Ok((
        params.pf() * phi.ln() - log_den,
        if z < 1.0 { -1.0 } else { 1.0 },
    ))
}

/// `xi(phi) = (c/p) ln |phi^p/((c^2+1) phi^p - c^2)| - C3` with `xi(phi0) = 0`.
pub fn xi_of_phi(params: &ModelParams, phi0: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi0 > 0.0) {
        return Err(Error::Precondition(format!(
            "phi = {phi} and phi0 = {phi0} must be positive"
        )));
    }
    let (l, side) = log_ratio(params, phi)?;
    let (l0, side0) = log_ratio(params, phi0)?;
    if side != side0 {
        return Err(Error::Precondition(format!(
            "phi = {phi} and phi0 = {phi0} lie on opposite sides of {:.6}",
            params.reduced_flow_zero()
        )));
    }
    let k = params.c() / params.pf();
    Ok(k * l - k * l0)
}

/// Parameters of the closed-form profile anchored at `phi(0) = phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticProfile {
    pub params: ModelParams,
    pub phi0: f64,
    pub mu: f64,
    pub c3: f64,
}

pub fn make_profile(params: &ModelParams, phi0: f64) -> Result<AsymptoticProfile> {
    params.require_delta_one("the asymptotic profile")?;
    let bound = params.anchor_bound();
    if !(phi0 > 0.0 && phi0 < bound) {
        return Err(Error::Precondition(format!(
            "phi0 = {phi0} must lie in (0, {bound:.6})"
        )));
    }
    let (l0, _) = log_ratio(params, phi0)?;
    Ok(AsymptoticProfile {
        params: *params,
        phi0,
        mu: -l0.exp(),
        c3: params.c() / params.pf() * l0,
    })
}

/// `(mu c^2 / (mu (c^2+1) - exp(-p xi/c)))^(1/p)`, evaluated in log form so
/// that the far tail neither underflows early nor loses digits.
pub fn phi_of_xi(profile: &AsymptoticProfile, xi: f64) -> f64 {
    let pr = &profile.params;
    let (p, c) = (pr.pf(), pr.c());
    let m = -profile.mu;
    let c2 = c * c;
    let log_pp = if xi <= 0.0 {
        // -ln(e^(-p xi/c) + m (c^2+1)) = p xi/c - ln(1 + m (c^2+1) e^(p xi/c))
        (m * c2).ln() + p * xi / c - (m * (c2 + 1.0) * (p * xi / c).exp()).ln_1p()
    } else {
        (m * c2).ln() - (m * (c2 + 1.0) + (-p * xi / c).exp()).ln()
    };
    (log_pp / p).exp()
}

/// First-order tail `(-mu)^(1/p) c^(2/p) e^(xi/c)`.
pub fn leading_order(profile: &AsymptoticProfile, xi: f64) -> f64 {
    let pr = &profile.params;
    let (p, c) = (pr.pf(), pr.c());
    ((-profile.mu).ln() / p + 2.0 * c.ln() / p + xi / c).exp()
}

/// Reduced dynamics `{dphi/ds = reduced flow, dxi/ds = phi^p}` integrated
/// backward in s from `(phi0, 0)` until `xi = xi_min`. Returns `(xi, phi)`
/// samples in increasing-`xi` order.
pub fn reduced_orbit(
    params: &ModelParams,
    phi0: f64,
    xi_min: f64,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(xi_min < 0.0) {
        return Err(Error::Precondition(format!(
            "xi_min = {xi_min} must be negative"
        )));
    }
    if !(phi0 > 0.0 && phi0 < params.reduced_flow_zero()) {
        return Err(Error::Precondition(format!("phi0 = {phi0} out of range")));
    }
    let pr = *params;
    let sys = FnSystem(move |_s: f64, y: &[f64; 2]| [reduced_flow(&pr, y[0]), powp(y[0], pr.p())]);
    let mut opts = SolveOptions::new(tol, tol);
    opts.atol = [tol * 1e-30, tol];
    let g = move |y: &[f64; 2]| y[1] - xi_min;
    let hooks = Hooks {
        event: Some(&g),
        stop: None,
    };
    let tr = ode::solve(
        &mut DormandPrince::new(),
        &sys,
        0.0,
        [phi0, 0.0],
        -f64::MAX,
        &opts,
        &hooks,
    )?;
    if tr.outcome != Outcome::Event {
        return Err(Error::Convergence(format!(
            "reduced orbit did not reach xi = {xi_min}"
        )));
    }
    Ok(tr.y.iter().rev().map(|y| (y[1], y[0])).collect())
}
