//! Real branches of the Lambert W function.
//!
//! `W` inverts `y -> y e^y`. On the reals there are two branches meeting at
//! the branch point `x = -1/e`, `y = -1`:
//!
//! * [`WBranch::Principal`] (`W0`) on `[-1/e, inf)` with range `[-1, inf)`,
//! * [`WBranch::Lower`] (`W-1`) on `[-1/e, 0)` with range `(-inf, -1]`.
//!
//! Evaluation starts from a branch-point series, Winitzki's approximation or
//! the two-term logarithmic asymptote, then polishes with Halley's method.
//! Within `1e-6` of the branch point the series is returned directly.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// `1/e = -NEG_INV_E_HI + INV_E_LO`, split so that `x + 1/e` keeps full relative accuracy
/// near the branch point.
const NEG_INV_E_HI: f64 = -0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

const MAX_ITER: usize = 50;
const SERIES_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WBranch {
    /// `W0`, the branch through the origin.
    Principal,
    /// `W-1`, the branch diverging to `-inf` as `x -> 0-`.
    Lower,
}

impl fmt::Display for WBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WBranch::Principal => write!(f, "principal (W0)"),
            WBranch::Lower => write!(f, "lower (W-1)"),
        }
    }
}

impl FromStr for WBranch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "w0" | "principal" | "p" => Ok(WBranch::Principal),
            "-1" | "m1" | "wm1" | "w-1" | "lower" | "l" => Ok(WBranch::Lower),
            other => Err(format!(
                "unknown branch '{other}' (expected 0/principal or -1/lower)"
            )),
        }
    }
}

/// `x + 1/e`, accurate near the branch point.
#[inline]
fn offset_from_branch_point(x: f64) -> f64 {
    (x - NEG_INV_E_HI) + INV_E_LO
}

/// Series about the branch point in `q = sqrt(2 (e x + 1))`; `q > 0` gives
/// the principal branch, `q < 0` the lower one.
fn branch_point_series(q: f64) -> f64 {
    const COEFFS: [f64; 7] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
    ];
    COEFFS.iter().rev().fold(0.0, |acc, &k| acc * q + k)
}

/// Halley stops within a few ulps; step to the neighbouring double when that
/// lowers `|w e^w - x|`. Only used where `w e^w` is representable.
fn polish_ulp(branch: WBranch, x: f64, w: f64) -> f64 {
    let r = |v: f64| (v * v.exp() - x).abs();
    let mut best = (r(w), w);
    for v in [w.next_up(), w.next_down()] {
        let in_range = match branch {
            WBranch::Principal => v >= -1.0,
            WBranch::Lower => v <= -1.0,
        };
        if in_range {
            let rv = r(v);
            if rv < best.0 {
                best = (rv, v);
            }
        }
    }
    best.1
}

fn halley_direct(x: f64, mut w: f64) -> Result<f64> {
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            // f == 0 at w == -1 exactly gives 0/0; the guess is already a root.
            return if f == 0.0 {
                Ok(w)
            } else {
                Err(non_convergence(x))
            };
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
        // Near the branch point rounding in f keeps the step above the
        // nominal floor; a non-shrinking tiny step means we are there.
        if step.abs() >= prev && step.abs() <= 1e-12 * (1.0 + w.abs()) {
            return Ok(w);
        }
        prev = step.abs();
    }
    Err(non_convergence(x))
}

/// Halley iteration on `g(w) = w + ln|w| - log_abs_x`, used where `w e^w`
/// over- or underflows. Valid for `w > 0` (principal, large x) and
/// `w < -1` (lower branch, x near 0).
fn halley_log(log_abs_x: f64, mut w: f64) -> Result<f64> {
    for _ in 0..MAX_ITER {
        let g = w + w.abs().ln() - log_abs_x;
        let dg = 1.0 + 1.0 / w;
        let ddg = -1.0 / (w * w);
        let step = (g / dg) / (1.0 - g * ddg / (2.0 * dg * dg));
        if !step.is_finite() {
            return Err(Error::Convergence(format!(
                "Lambert W log-form iteration broke down at ln|x| = {log_abs_x}"
            )));
        }
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
    }
    Err(Error::Convergence(format!(
        "Lambert W log-form iteration exceeded {MAX_ITER} steps at ln|x| = {log_abs_x}"
    )))
}

fn non_convergence(x: f64) -> Error {
    Error::Convergence(format!(
        "Lambert W Halley iteration exceeded {MAX_ITER} steps at x = {x}"
    ))
}

/// Real-branch Lambert W.
///
/// Returns `y` in the branch range with `y e^y = x`. Arguments below `-1/e`,
/// NaN, or `x >= 0` on the lower branch give [`Error::Domain`].
pub fn lambert_w(branch: WBranch, x: f64) -> Result<f64> {
    let domain = || Error::Domain { branch, x };
    if x.is_nan() || x < NEG_INV_E_HI {
        return Err(domain());
    }
    let q2 = 2.0 * std::f64::consts::E * offset_from_branch_point(x);
    let q = q2.max(0.0).sqrt();
    match branch {
        WBranch::Principal => {
            if x == 0.0 {
                return Ok(0.0);
            }
            if x == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            if q2 < 2.0 * std::f64::consts::E * SERIES_RADIUS {
                return Ok(branch_point_series(q));
            }
            let w = if x < -0.32 {
                halley_direct(x, branch_point_series(q))
            } else if x <= std::f64::consts::E {
                let l = x.ln_1p();
                let guess = l * (1.0 - l.ln_1p() / (2.0 + l));
                halley_direct(x, guess)
            } else {
                let l1 = x.ln();
                let l2 = l1.ln();
                let guess = l1 - l2 + l2 / l1;
                if x > 1e100 {
                    halley_log(l1, guess)
                } else {
                    halley_direct(x, guess)
                }
            }?;
            Ok(polish_ulp(branch, x, w))
        }
        WBranch::Lower => {
            if x >= 0.0 {
                return Err(domain());
            }
            if q2 < 2.0 * std::f64::consts::E * SERIES_RADIUS {
                return Ok(branch_point_series(-q));
            }
            if x < -0.25 {
                halley_direct(x, branch_point_series(-q)).map(|w| polish_ulp(branch, x, w))
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                let guess = l1 - l2 + l2 / l1;
                if x > -1e-100 {
                    halley_log(l1, guess)
                } else {
                    halley_direct(x, guess).map(|w| polish_ulp(branch, x, w))
                }
            }
        }
    }
}

/// `W0(e^log_x)` without forming `e^log_x`, for arguments whose logarithm
/// exceeds the double range.
pub fn lambert_w0_of_exp(log_x: f64) -> Result<f64> {
    if log_x.is_nan() {
        return Err(Error::Domain {
            branch: WBranch::Principal,
            x: f64::NAN,
        });
    }
    if log_x < 230.0 {
        return lambert_w(WBranch::Principal, log_x.exp());
    }
    let l2 = log_x.ln();
    halley_log(log_x, log_x - l2 + l2 / log_x)
}

/// Scaled residual `|y e^y - x| / max(1, |x|)`.
pub fn residual(y: f64, x: f64) -> f64 {
    (y * y.exp() - x).abs() / x.abs().max(1.0)
}
