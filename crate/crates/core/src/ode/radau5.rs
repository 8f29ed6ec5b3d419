//! Three-stage Radau IIA (order 5, L-stable) with simplified Newton on the
//! stage equations and step-doubling error estimation.

use super::linalg::Lu;
use super::{Attempt, DensePiece, OdeSystem, SolveOptions, Stepper};

const SQ6: f64 = 2.449_489_742_783_178;

fn nodes() -> [f64; 3] {
    [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0]
}

fn coefficients() -> [[f64; 3]; 3] {
    [
        [
            (88.0 - 7.0 * SQ6) / 360.0,
            (296.0 - 169.0 * SQ6) / 1800.0,
            (-2.0 + 3.0 * SQ6) / 225.0,
        ],
        [
            (296.0 + 169.0 * SQ6) / 1800.0,
            (88.0 + 7.0 * SQ6) / 360.0,
            (-2.0 - 3.0 * SQ6) / 225.0,
        ],
        [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
    ]
}

const NEWTON_MAX: usize = 12;

#[derive(Debug, Clone, Default)]
pub struct Radau5;

impl Radau5 {
    pub fn new() -> Self {
        Self
    }

    /// One collocation step; `None` when Newton fails to converge.
    fn single<const N: usize, S: OdeSystem<N>>(
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
        opts: &SolveOptions<N>,
    ) -> Option<([f64; N], DensePiece<N>)> {
        let a = coefficients();
        let c = nodes();
        let jac = sys.jacobian(t, y);
        let n3 = 3 * N;
        let mut m = vec![0.0; n3 * n3];
        for bi in 0..3 {
            for bj in 0..3 {
                for i in 0..N {
                    for j in 0..N {
                        let diag = if bi == bj && i == j { 1.0 } else { 0.0 };
                        m[(bi * N + i) * n3 + bj * N + j] = diag - h * a[bi][bj] * jac[i][j];
                    }
                }
            }
        }
        let lu = Lu::factor(m, n3)?;
        let sc = opts.scale(y, y);

        let mut z = [[0.0; N]; 3];
        let mut prev_norm = f64::INFINITY;
        for iter in 0..NEWTON_MAX {
            let f: [[f64; N]; 3] = std::array::from_fn(|s| {
                let ys: [f64; N] = std::array::from_fn(|i| y[i] + z[s][i]);
                sys.rhs(t + c[s] * h, &ys)
            });
            let mut rhs = vec![0.0; n3];
            for s in 0..3 {
                for i in 0..N {
                    let hf: f64 = (0..3).map(|q| a[s][q] * f[q][i]).sum::<f64>() * h;
                    rhs[s * N + i] = hf - z[s][i];
                }
            }
            if !rhs.iter().all(|v| v.is_finite()) {
                return None;
            }
            let dz = lu.solve(&rhs);
            let mut norm: f64 = 0.0;
            let mut at_rounding = true;
            for s in 0..3 {
                for i in 0..N {
                    let d = dz[s * N + i];
                    z[s][i] += d;
                    norm = norm.max((d / sc[i]).abs());
                    at_rounding &= d.abs() <= 8.0 * f64::EPSILON * (y[i].abs() + z[s][i].abs());
                }
            }
            if !norm.is_finite() {
                return None;
            }
            if norm <= 1e-3 || at_rounding {
                let y_new: [f64; N] = std::array::from_fn(|i| y[i] + z[2][i]);
                let stages: [[f64; N]; 3] =
                    std::array::from_fn(|s| std::array::from_fn(|i| y[i] + z[s][i]));
                return Some((
                    y_new,
                    DensePiece::Collocation {
                        t0: t,
                        h,
                        y0: *y,
                        stages,
                        nodes: c,
                    },
                ));
            }
            if iter > 1 && norm > prev_norm {
                return None;
            }
            prev_norm = norm;
        }
        None
    }
}

impl<const N: usize> Stepper<N> for Radau5 {
    fn error_order(&self) -> f64 {
        6.0
    }

    fn attempt<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
        opts: &SolveOptions<N>,
    ) -> Option<Attempt<N>> {
        let (full, _) = Self::single(sys, t, y, h, opts)?;
        let (mid, d1) = Self::single(sys, t, y, 0.5 * h, opts)?;
        let (y_new, d2) = Self::single(sys, t + 0.5 * h, &mid, 0.5 * h, opts)?;
        let sc = opts.scale(y, &y_new);
        let err = (0..N)
            .map(|i| ((y_new[i] - full[i]) / 31.0 / sc[i]).abs())
            .fold(0.0, f64::max);
        Some(Attempt {
            y_new,
            err,
            dense: vec![d1, d2],
        })
    }

    fn next_factor(&mut self, err: f64, accepted: bool) -> f64 {
        let fac = 0.9 * err.max(1e-12).powf(-1.0 / 6.0);
        if accepted {
            fac.clamp(0.2, 4.0)
        } else {
            fac.clamp(0.1, 0.9)
        }
    }
}
