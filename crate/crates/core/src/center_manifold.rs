//! Center manifold of the degenerate equilibrium `E_O = (0, 0)` of the
//! s-time field (`delta = 1`).
//!
//! At the origin the Jacobian is `[[0, 0], [1, -c]]` with eigenvalues `0` and
//! `-c` and eigenvectors `(c, 1)`, `(0, 1)`. In the eigenbasis
//! `phi = c phi~`, `psi = phi~ + psi~` the manifold is the graph
//!
//! ```text
//! psi~ = -c^(p-2) (c^2 + 1) phi~^(p+1) + ...
//! ```
//!
//! which in original coordinates is `h(phi) = phi/c - (c^2+1)/c^3 phi^(p+1)`.
//! Substituting into `phi' = phi^p psi` gives the reduced flow
//! `phi' = phi^(p+1)/c - (c^2+1)/c^3 phi^(2p+1)`.
//!
//! Only these leading terms are kept. The next graph term is of order
//! `phi^(2p+1)`, so the truncation error of `h` is that order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{powp, ModelParams};
use crate::phase_dynamics::{Orbit, PhaseState, TimeParam};

/// Coefficients of the truncated graph and reduced flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterManifoldModel {
    pub params: ModelParams,
    /// `k = (c^2 + 1)/c^3` in `h(phi) = phi/c - k phi^(p+1)`.
    pub graph_coefficient: f64,
    /// `(1/c, -k)`: coefficients of `phi^(p+1)` and `phi^(2p+1)` in `dphi/ds`.
    pub flow_coefficients: (f64, f64),
}

impl CenterManifoldModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.require_delta_one("the center manifold at E_O")?;
        let c = params.c();
        let k = (c * c + 1.0) / (c * c * c);
        Ok(Self {
            params: *params,
            graph_coefficient: k,
            flow_coefficients: (1.0 / c, -k),
        })
    }

    /// `h(phi)` without the validity warning.
    pub fn graph(&self, phi: f64) -> f64 {
        phi / self.params.c() - self.graph_coefficient * phi * powp(phi, self.params.p())
    }

    pub fn flow(&self, phi: f64) -> f64 {
        let pp = powp(phi, self.params.p());
        let (a, b) = self.flow_coefficients;
        phi * pp * (a + b * pp)
    }

    /// `psi~ = -c^(p-2) (c^2+1) phi~^(p+1)`.
    pub fn tilde_graph(&self, phi_t: f64) -> f64 {
        let c = self.params.c();
        let p = self.params.p() as i32;
        -c.powi(p - 2) * (c * c + 1.0) * phi_t.powi(p + 1)
    }
}

/// Radius inside which the truncated graph is trusted: half the positive
/// zero of the reduced flow.
pub fn validity_radius(params: &ModelParams) -> f64 {
    0.5 * params.reduced_flow_zero()
}

/// `T^-1 (phi, psi)` with `T = [(c, 1), (0, 1)]` as columns.
pub fn to_eigenbasis(params: &ModelParams, state: PhaseState) -> Result<PhaseState> {
    params.require_delta_one("the eigenbasis at E_O")?;
    let pt = state.phi / params.c();
    Ok(PhaseState::new(pt, state.psi - pt))
}

pub fn from_eigenbasis(params: &ModelParams, tilde: PhaseState) -> Result<PhaseState> {
    params.require_delta_one("the eigenbasis at E_O")?;
    Ok(PhaseState::new(
        params.c() * tilde.phi,
        tilde.phi + tilde.psi,
    ))
}

/// The s-time field written in eigenbasis coordinates.
pub fn tilde_field(params: &ModelParams, tilde: PhaseState) -> PhaseState {
    let c = params.c();
    let p = params.p() as i32;
    let PhaseState { phi: x, psi: y } = tilde;
    let cp1 = c.powi(p - 1);
    let xp = x.powi(p);
    let dx = cp1 * xp * (x + y);
    PhaseState::new(dx, -c * y - c.powi(p + 1) * xp * x - dx)
}

/// `h(phi) = phi/c - (c^2+1)/c^3 phi^(p+1)`, the manifold in original
/// coordinates. Logs a warning outside [`validity_radius`].
pub fn cm_graph(params: &ModelParams, phi: f64) -> f64 {
    let r = validity_radius(params);
    if phi.abs() > r {
        log::warn!("cm_graph: |phi| = {phi} exceeds the validity radius {r:.6}");
    }
    let c = params.c();
    phi / c - (c * c + 1.0) / (c * c * c) * phi * powp(phi, params.p())
}

/// `phi^(p+1)/c - (c^2+1)/c^3 phi^(2p+1)`.
pub fn reduced_flow(params: &ModelParams, phi: f64) -> f64 {
    let c = params.c();
    let pp = powp(phi, params.p());
    phi * pp * (1.0 / c - (c * c + 1.0) / (c * c * c) * pp)
}

/// `(phi, |psi - h(phi)|)` for every sample with `phi > 0`.
pub fn cm_residual(params: &ModelParams, orbit: &Orbit) -> Result<Vec<(f64, f64)>> {
    if orbit.is_empty() {
        return Err(Error::EmptyOrbit);
    }
    if orbit.param() != TimeParam::S {
        return Err(Error::Precondition(
            "manifold residuals need an s-time orbit".into(),
        ));
    }
    let c = params.c();
    let k = (c * c + 1.0) / (c * c * c);
    Ok(orbit
        .states()
        .iter()
        .filter(|s| s.phi > 0.0)
        .map(|s| {
            let h = s.phi / c - k * s.phi * powp(s.phi, params.p());
            (s.phi, (s.psi - h).abs())
        })
        .collect())
}
