//! Closed-form solutions and initial data for `i u_t + u_xx + 2|u|^2 u = 0`.
//!
//! The soliton is a solution on the whole line; on a periodic box it is
//! used as a reference while its tails stay below the discretization error.

use crate::math::{cos, exp, sech, sin};

/// Travelling soliton `sech(x + x0 - 4t) exp(2i (x + x0 - 3t/2))`, as `(r, s)`.
pub fn soliton_exact(t: f64, x: f64, x0: f64) -> (f64, f64) {
    let amplitude = sech(x + x0 - 4.0 * t);
    let phase = 2.0 * (x + x0 - 1.5 * t);
    (amplitude * cos(phase), amplitude * sin(phase))
}

/// Two sech pulses with carrier wavenumbers `2 c1` and `2 c2`.
pub fn double_soliton_ic(x: f64, c1: f64, c2: f64, x1: f64, x2: f64) -> (f64, f64) {
    let (a1, p1) = (sech(x - x1), 2.0 * c1 * (x - x1));
    let (a2, p2) = (sech(x - x2), 2.0 * c2 * (x - x2));
    (a1 * cos(p1) + a2 * cos(p2), a1 * sin(p1) + a2 * sin(p2))
}

/// Gaussian pulse `A exp(-x^2 + 2ix)`.
pub fn gaussian_ic(x: f64, amplitude: f64) -> (f64, f64) {
    let env = amplitude * exp(-x * x);
    (env * cos(2.0 * x), env * sin(2.0 * x))
}

/// The initial conditions of the bundled experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    SingleSoliton { x0: f64 },
    DoubleSoliton { c1: f64, c2: f64, x1: f64, x2: f64 },
    GaussianPulse { amplitude: f64 },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            InitialCondition::SingleSoliton { x0 } => soliton_exact(0.0, x, x0),
            InitialCondition::DoubleSoliton { c1, c2, x1, x2 } => double_soliton_ic(x, c1, c2, x1, x2),
            InitialCondition::GaussianPulse { amplitude } => gaussian_ic(x, amplitude),
        }
    }

    /// Exact solution for all `t`, when one is known.
    pub fn exact(&self) -> Option<impl Fn(f64, f64) -> (f64, f64)> {
        match *self {
            InitialCondition::SingleSoliton { x0 } => Some(move |t, x| soliton_exact(t, x, x0)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_peak_at_start() {
        let (r, s) = soliton_exact(0.0, -10.0, 10.0);
        assert_eq!((r, s), (1.0, 0.0));
    }

    #[test]
    fn soliton_modulus_is_sech() {
        for i in 0..50 {
            let t = 0.1 * i as f64;
            let x = -25.0 + 1.01 * i as f64;
            let (r, s) = soliton_exact(t, x, 10.0);
            assert!(((r * r + s * s).sqrt() - sech(x + 10.0 - 4.0 * t)).abs() < 1e-15);
        }
    }

    #[test]
    fn double_soliton_peaks_and_symmetry() {
        let (r, s) = double_soliton_ic(-10.0, 1.0, -1.0, -10.0, 10.0);
        assert!((r - 1.0).abs() < 1e-8 && s.abs() < 1e-8);
        for i in 0..100 {
            let x = -25.0 + 0.5 * i as f64;
            let (r1, s1) = double_soliton_ic(x, 1.0, -1.0, -10.0, 10.0);
            let (r2, s2) = double_soliton_ic(-x, 1.0, -1.0, -10.0, 10.0);
            assert!(((r1 * r1 + s1 * s1) - (r2 * r2 + s2 * s2)).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_at_origin() {
        assert_eq!(gaussian_ic(0.0, 2.0), (2.0, 0.0));
    }
}
