//! Model parameters `(p, c, delta)` shared by every equation in the crate.

use serde::Serialize;

use crate::error::{Error, Result};

/// Exponent `p` (even, >= 2), wave speed `c > 0` and kinetic switch
/// `delta` in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    p: u32,
    c: f64,
    delta: u8,
}

impl ModelParams {
    pub fn new(p: u32, c: f64, delta: u8) -> Result<Self> {
        if p < 2 || !p.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "p must be an even integer >= 2, got {p}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "c must be finite and positive, got {c}"
            )));
        }
        if delta > 1 {
            return Err(Error::InvalidParams(format!(
                "delta must be 0 or 1, got {delta}"
            )));
        }
        Ok(Self { p, c, delta })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// `p` as a float, for exponents.
    #[inline]
    pub fn pf(&self) -> f64 {
        self.p as f64
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn delta(&self) -> u8 {
        self.delta
    }

    #[inline]
    pub fn deltaf(&self) -> f64 {
        self.delta as f64
    }

    /// `D = c^2 - 4p`; its sign separates spiral from node sinks at `(+-1, 0)`.
    pub fn discriminant(&self) -> f64 {
        self.c * self.c - 4.0 * self.pf()
    }

    /// `(c^2 / (c^2 + 1))^(1/p)`: positive zero of the reduced flow and the
    /// upper limit of the closed-form profile.
    pub fn reduced_flow_zero(&self) -> f64 {
        let c2 = self.c * self.c;
        (c2 / (c2 + 1.0)).powf(1.0 / self.pf())
    }

    /// `(c^2 / (c^2 + 2))^(1/p)`: admissible anchor values lie strictly below.
    pub fn anchor_bound(&self) -> f64 {
        let c2 = self.c * self.c;
        (c2 / (c2 + 2.0)).powf(1.0 / self.pf())
    }

    pub(crate) fn require_delta_one(&self, what: &str) -> Result<()> {
        if self.delta != 1 {
            return Err(Error::Precondition(format!("{what} requires delta = 1")));
        }
        Ok(())
    }
}

/// `x^p` for an even integer exponent.
#[inline]
pub(crate) fn powp(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(3, 1.0, 1).is_err());
        assert!(ModelParams::new(0, 1.0, 1).is_err());
        assert!(ModelParams::new(2, 0.0, 1).is_err());
        assert!(ModelParams::new(2, -1.0, 1).is_err());
        assert!(ModelParams::new(2, f64::NAN, 1).is_err());
        assert!(ModelParams::new(2, 1.0, 2).is_err());
        assert!(ModelParams::new(2, 1.0, 0).is_ok());
    }

    #[test]
    fn discriminant_values() {
        let d = |p, c| ModelParams::new(p, c, 1).unwrap().discriminant();
        assert_eq!(d(2, 1.0), -7.0);
        assert_eq!(d(2, 5.0), 17.0);
        assert_eq!(d(4, 1.0), -15.0);
        assert_eq!(d(4, 5.0), 9.0);
    }

    #[test]
    fn bounds() {
        let m = ModelParams::new(2, 1.0, 1).unwrap();
        assert!((m.reduced_flow_zero() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m.anchor_bound() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
