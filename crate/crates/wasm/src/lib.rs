//! wasm-bindgen entry points for the browser demo.
//!
//! Every export returns a flat `Float64Array`; layouts are documented on
//! each function. The `*_rows` functions hold the logic and are plain Rust
//! so they can be tested natively.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use twave_core::asymptotics::{make_profile, phi_of_xi};
use twave_core::params::ModelParams;
use twave_core::pde_sim::{init_wave, measure_front_speed, simulate, Grid1D};
use twave_core::phase_dynamics::{connecting_orbit, portrait, TimeParam};
use wasm_bindgen::prelude::*;

const ORBIT_TOL: f64 = 1e-10;
const PORTRAIT_PHI: (f64, f64) = (-0.1, 1.4);
const PORTRAIT_PSI: (f64, f64) = (-0.8, 1.2);
const PDE_X: (f64, f64) = (-30.0, 30.0);
const PDE_SAFETY: f64 = 0.4;
const FRONT_LEVEL: f64 = 0.5;
/// Orbits are thinned to at most this many points before crossing into JS.
const MAX_CURVE_POINTS: usize = 4000;

fn params(p: u32, c: f64, delta: u8) -> Result<ModelParams, String> {
    ModelParams::new(p, c, delta).map_err(|e| e.to_string())
}

fn thin<T: Copy>(v: &[T], max: usize) -> Vec<T> {
    if v.len() <= max {
        return v.to_vec();
    }
    let step = (v.len() - 1) as f64 / (max - 1) as f64;
    (0..max)
        .map(|k| v[(k as f64 * step).round() as usize])
        .collect()
}

/// `[phi, psi, dphi, dpsi]` per grid point of the desingularized field,
/// with unit direction vectors.
pub fn portrait_rows(p: u32, c: f64, delta: u8, n: usize) -> Result<Vec<f64>, String> {
    let pr = params(p, c, delta)?;
    let rows =
        portrait(&pr, TimeParam::S, PORTRAIT_PHI, PORTRAIT_PSI, n, n).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|r| [r.phi, r.psi, r.dphi, r.dpsi])
        .collect())
}

/// `[phi, psi]` pairs along the connecting orbit anchored at `phi0`.
pub fn orbit_rows(p: u32, c: f64, phi0: f64) -> Result<Vec<f64>, String> {
    let pr = params(p, c, 1)?;
    let orbit = connecting_orbit(&pr, phi0, ORBIT_TOL).map_err(|e| e.to_string())?;
    Ok(thin(orbit.states(), MAX_CURVE_POINTS)
        .iter()
        .flat_map(|s| [s.phi, s.psi])
        .collect())
}

/// `[xi, phi_orbit, phi_formula]` on `n` points of `[xi_min, xi_max]`.
/// `phi_orbit` is NaN where the orbit has no samples.
pub fn profile_rows(
    p: u32,
    c: f64,
    phi0: f64,
    xi_min: f64,
    xi_max: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    if n < 2 || !(xi_max > xi_min) {
        return Err("need n >= 2 and xi_max > xi_min".into());
    }
    let pr = params(p, c, 1)?;
    let profile = make_profile(&pr, phi0).map_err(|e| e.to_string())?;
    let orbit = connecting_orbit(&pr, phi0, ORBIT_TOL).map_err(|e| e.to_string())?;
    Ok((0..n)
        .flat_map(|k| {
            let xi = xi_min + (xi_max - xi_min) * k as f64 / (n - 1) as f64;
            [
                xi,
                orbit.phi_at_xi(xi).unwrap_or(f64::NAN),
                phi_of_xi(&profile, xi),
            ]
        })
        .collect())
}

/// Method-of-lines run from the traveling-wave profile.
///
/// Layout: `[nx, n_snapshots, speed, x_0..x_{nx-1}, (t, u_0..u_{nx-1})...]`.
pub fn pde_rows(
    p: u32,
    c: f64,
    phi0: f64,
    dx: f64,
    t_end: f64,
    every: f64,
) -> Result<Vec<f64>, String> {
    let pr = params(p, c, 1)?;
    let grid = Grid1D::with_spacing(PDE_X.0, PDE_X.1, dx).map_err(|e| e.to_string())?;
    let profile = make_profile(&pr, phi0).map_err(|e| e.to_string())?;
    let orbit = connecting_orbit(&pr, phi0, ORBIT_TOL).map_err(|e| e.to_string())?;
    let init = init_wave(&pr, &profile, &orbit, &grid).map_err(|e| e.to_string())?;
    let sim = simulate(&pr, &grid, &init, t_end, PDE_SAFETY, every).map_err(|e| e.to_string())?;
    let speed = measure_front_speed(&sim.snapshots, &grid, FRONT_LEVEL)
        .map(|e| e.speed)
        .unwrap_or(f64::NAN);
    let nx = grid.nx();
    let mut out = Vec::with_capacity(3 + nx + sim.snapshots.len() * (nx + 1));
    out.extend([nx as f64, sim.snapshots.len() as f64, speed]);
    out.extend((0..nx).map(|i| grid.x(i)));
    for snap in &sim.snapshots {
        out.push(snap.time);
        out.extend_from_slice(&snap.values);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn phase_portrait(p: u32, c: f64, delta: u8, n: usize) -> Result<Vec<f64>, JsError> {
    portrait_rows(p, c, delta, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn orbit(p: u32, c: f64, phi0: f64) -> Result<Vec<f64>, JsError> {
    orbit_rows(p, c, phi0).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn profile(
    p: u32,
    c: f64,
    phi0: f64,
    xi_min: f64,
    xi_max: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    profile_rows(p, c, phi0, xi_min, xi_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn front(
    p: u32,
    c: f64,
    phi0: f64,
    dx: f64,
    t_end: f64,
    every: f64,
) -> Result<Vec<f64>, JsError> {
    pde_rows(p, c, phi0, dx, t_end, every).map_err(|e| JsError::new(&e))
}
