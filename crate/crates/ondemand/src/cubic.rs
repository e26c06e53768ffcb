//! Cubic polynomials: the Routh–Hurwitz test and closed-form real roots.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Error;

/// Coefficients of `a0 s^3 + a1 s^2 + a2 s + a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl CubicCoeffs {
    pub fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Self { a0, a1, a2, a3 }
    }

    /// Horner evaluation at `s`.
    pub fn eval(&self, s: f64) -> f64 {
        ((self.a0 * s + self.a1) * s + self.a2) * s + self.a3
    }

    pub fn derivative_at(&self, s: f64) -> f64 {
        (3.0 * self.a0 * s + 2.0 * self.a1) * s + self.a2
    }

    /// Routh–Hurwitz criterion for a cubic: all roots have strictly negative
    /// real part iff `a1, a2, a3 > 0` and `a1 a2 > a0 a3` (given `a0 > 0`).
    pub fn is_hurwitz(&self) -> Result<bool, Error> {
        if self.a0.is_nan() || self.a0 <= 0.0 {
            return Err(Error::NotMonicOrientable);
        }
        Ok(self.a1 > 0.0
            && self.a2 > 0.0
            && self.a3 > 0.0
            && self.a1 * self.a2 > self.a0 * self.a3)
    }

    /// All real roots (1, 2, or 3), by the trigonometric/Cardano closed form,
    /// polished with a couple of Newton steps.
    ///
    /// Requires `a0 != 0`.
    pub fn real_roots(&self) -> Vec<f64> {
        assert!(self.a0 != 0.0, "leading coefficient must be nonzero");
        let b = self.a1 / self.a0;
        let c = self.a2 / self.a0;
        let d = self.a3 / self.a0;

        // Depressed form t^3 + p t + q with s = t - b/3.
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let shift = -b / 3.0;

        let disc = -4.0 * p * p * p - 27.0 * q * q;
        let mut roots = if disc >= 0.0 {
            // Three real roots (possibly repeated).
            let m = (-p / 3.0).sqrt();
            if m < 1e-300 {
                // p == q == 0: triple root.
                vec![shift]
            } else {
                let arg = (-q / (2.0 * m * m * m)).clamp(-1.0, 1.0);
                let phi = arg.acos();
                vec![
                    2.0 * m * (phi / 3.0).cos() + shift,
                    2.0 * m * ((phi + 2.0 * PI) / 3.0).cos() + shift,
                    2.0 * m * ((phi + 4.0 * PI) / 3.0).cos() + shift,
                ]
            }
        } else {
            // One real root (Cardano).
            let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
            let u = (-q / 2.0 + s).cbrt();
            let v = (-q / 2.0 - s).cbrt();
            vec![u + v + shift]
        };

        for root in &mut roots {
            for _ in 0..2 {
                let f = self.eval(*root);
                let df = self.derivative_at(*root);
                if df.abs() > 1e-300 {
                    let step = f / df;
                    if step.is_finite() {
                        *root -= step;
                    }
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }
}
