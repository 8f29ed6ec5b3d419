//! Dormand-Prince 5(4) with PI step control and Hairer's dense output.

use super::{Attempt, DensePiece, OdeSystem, SolveOptions, Stepper};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

#[derive(Debug, Clone)]
pub struct DormandPrince {
    err_prev: f64,
}

impl DormandPrince {
    pub fn new() -> Self {
        Self { err_prev: 1e-4 }
    }
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self::new()
    }
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

impl<const N: usize> Stepper<N> for DormandPrince {
    fn error_order(&self) -> f64 {
        5.0
    }

    fn reset(&mut self) {
        self.err_prev = 1e-4;
    }

    fn attempt<S: OdeSystem<N>>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
        opts: &SolveOptions<N>,
    ) -> Option<Attempt<N>> {
        let k1 = sys.rhs(t, y);
        let k2 = sys.rhs(t + C2 * h, &comb(y, h, &[(A21, &k1)]));
        let k3 = sys.rhs(t + C3 * h, &comb(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(
            t + C4 * h,
            &comb(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = sys.rhs(
            t + C5 * h,
            &comb(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.rhs(
            t + h,
            &comb(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = comb(
            y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = sys.rhs(t + h, &y_new);

        let sc = opts.scale(y, &y_new);
        let err = (0..N)
            .map(|i| {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                (e / sc[i]).abs()
            })
            .fold(0.0, f64::max);

        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y_new[i] - y[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k7[i] - bspl;
            r[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Some(Attempt {
            y_new,
            err,
            dense: vec![DensePiece::Dopri { t0: t, h, r }],
        })
    }

    fn next_factor(&mut self, err: f64, accepted: bool) -> f64 {
        let err = err.max(1e-10);
        let fac = 0.9 * err.powf(-ALPHA) * self.err_prev.powf(BETA);
        if accepted {
            self.err_prev = err.max(1e-4);
            fac.clamp(0.2, 10.0)
        } else {
            fac.clamp(0.2, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{solve, FnSystem, Hooks};
    use super::*;

    /// Fixed-step runs (error control disabled) on y' = -c y.
    fn fixed_step_error(h: f64) -> f64 {
        let c = 1.3;
        let sys = FnSystem(move |_t: f64, y: &[f64; 1]| [-c * y[0]]);
        let opts = SolveOptions::new(1.0, 1e300);
        let mut st = DormandPrince::new();
        let mut y = [1.0];
        let n = (2.0 / h).round() as usize;
        for k in 0..n {
            let att = st.attempt(&sys, k as f64 * h, &y, h, &opts).unwrap();
            y = att.y_new;
        }
        (y[0] - (-c * 2.0f64).exp()).abs()
    }

    #[test]
    fn fifth_order_on_linear_decay() {
        let e1 = fixed_step_error(0.2);
        let e2 = fixed_step_error(0.1);
        let e3 = fixed_step_error(0.05);
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!(o1 > 4.5 && o2 > 4.5, "observed orders {o1} {o2}");
    }

    #[test]
    fn dense_output_is_fourth_order_or_better() {
        let sys = FnSystem(|_t: f64, y: &[f64; 1]| [y[0]]);
        let opts = SolveOptions::new(1.0, 1e300);
        let mid_err = |h: f64| {
            let att = DormandPrince::new()
                .attempt(&sys, 0.0, &[1.0], h, &opts)
                .unwrap();
            let (_, t1) = att.dense[0].span();
            assert_eq!(t1, h);
            // endpoint of the interpolant reproduces the step
            assert!((att.dense[0].eval(h)[0] - att.y_new[0]).abs() < 1e-15);
            (att.dense[0].eval(0.37 * h)[0] - (0.37 * h).exp()).abs()
        };
        let o = (mid_err(0.2) / mid_err(0.1)).log2();
        assert!(o > 4.5, "dense local order {o}");
    }

    #[test]
    fn adaptive_error_tracks_tolerance() {
        let sys = FnSystem(|t: f64, y: &[f64; 1]| [y[0] * t.cos()]);
        let mut prev = f64::INFINITY;
        for &tol in &[1e-6, 1e-8, 1e-10] {
            let opts = SolveOptions::new(tol, tol);
            let tr = solve(
                &mut DormandPrince::new(),
                &sys,
                0.0,
                [1.0],
                10.0,
                &opts,
                &Hooks::default(),
            )
            .unwrap();
            let err = (tr.last().1[0] - 10f64.sin().exp()).abs();
            assert!(err < 100.0 * tol, "tol {tol}: err {err}");
            assert!(err < prev);
            prev = err;
        }
    }
}
