//! Legendre polynomials on the reference element `[-1, 1]` and
//! Gauss-Legendre quadrature.
//!
//! The basis is the classical, unnormalized one: `P_l(1) = 1`,
//! `P_l(-1) = (-1)^l`, `int P_l P_m = 2 / (2l + 1) delta_lm`. On cell `j` the
//! basis functions are `P_{j,l}(x) = P_l(xi)` with `xi = 2 (x - x_j) / h_j`,
//! so the cell mass matrix is `diag(h_j / (2l + 1))`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::mesh::ulp;

/// Largest supported Gauss rule.
pub const MAX_GAUSS_POINTS: usize = 64;

/// `(P_l(xi), P_l'(xi))`.
pub fn legendre_eval(l: usize, xi: f64) -> Result<(f64, f64)> {
    if !(xi.abs() <= 1.0 + 4.0 * ulp(1.0)) {
        return Err(Error::OutsideReference { xi });
    }
    Ok(legendre_unchecked(l, xi))
}

/// Three-term recurrence for the value and `P'_{n+1} = P'_{n-1} + (2n+1) P_n`
/// for the derivative; no domain check.
pub(crate) fn legendre_unchecked(l: usize, xi: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, xi);
    let (mut d_prev, mut d) = (0.0, 1.0);
    if l == 0 {
        return (1.0, 0.0);
    }
    for n in 1..l {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * xi * p - nf * p_prev) / (nf + 1.0);
        let d_next = d_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Values `P_0(xi) .. P_degree(xi)` written into `out`.
pub(crate) fn legendre_values(degree: usize, xi: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if degree == 0 {
        return;
    }
    out[1] = xi;
    for n in 1..degree {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * xi * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Polynomial space `P^k` on the reference element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegendreBasis {
    degree: usize,
}

impl LegendreBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter { name: "k", value: 0.0 });
        }
        Ok(Self { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    pub fn eval(&self, l: usize, xi: f64) -> Result<(f64, f64)> {
        if l > self.degree {
            return Err(Error::InvalidParameter { name: "l", value: l as f64 });
        }
        legendre_eval(l, xi)
    }

    /// Inverse of the cell mass matrix, `(2l + 1) / h_j` on the diagonal.
    pub fn cell_mass_inverse(&self, cell_width: f64) -> Vec<f64> {
        cell_mass_inverse(self.degree, cell_width)
    }
}

/// Diagonal of the inverse mass matrix of `P^degree` on a cell of width `h`.
pub fn cell_mass_inverse(degree: usize, cell_width: f64) -> Vec<f64> {
    (0..=degree).map(|l| (2 * l + 1) as f64 / cell_width).collect()
}

/// `int_{-1}^{1} P_m(xi) P_l'(xi) dxi`, which is 2 when `m < l` and `l - m`
/// is odd and zero otherwise.
#[inline]
pub fn derivative_moment(m: usize, l: usize) -> f64 {
    if m < l && (l - m) % 2 == 1 {
        2.0
    } else {
        0.0
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn n_points(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int_{-1}^{1} f(xi) dxi`.
    pub fn integrate_reference(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `int_a^b f(x) dx`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate_reference(|xi| f(mid + half * xi))
    }
}

/// Gauss-Legendre nodes (ascending) and weights, Newton iteration on the
/// roots of `P_n`.
pub fn gauss_rule(n_points: usize) -> Result<QuadratureRule> {
    if n_points == 0 || n_points > MAX_GAUSS_POINTS {
        return Err(Error::InvalidParameter { name: "n_points", value: n_points as f64 });
    }
    let n = n_points;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess for the i-th largest root.
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_unchecked(n, x);
            let dx = p / d;
            x -= dx;
            dp = d;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        // Final derivative at the converged root.
        let (_, d) = legendre_unchecked(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Basis values tabulated at the nodes of a quadrature rule.
#[derive(Debug, Clone)]
pub struct NodalTable {
    rule: QuadratureRule,
    n_modes: usize,
    values: Vec<f64>,
}

impl NodalTable {
    pub fn new(degree: usize, rule: QuadratureRule) -> Self {
        let n_modes = degree + 1;
        let mut values = vec![0.0; rule.n_points() * n_modes];
        for (q, &xi) in rule.nodes().iter().enumerate() {
            legendre_values(degree, xi, &mut values[q * n_modes..(q + 1) * n_modes]);
        }
        Self { rule, n_modes, values }
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `P_0..P_k` at node `q`.
    #[inline]
    pub fn at_node(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_modes..(q + 1) * self.n_modes]
    }

    /// Evaluate a modal expansion at node `q`.
    #[inline]
    pub fn eval(&self, coeffs: &[f64], q: usize) -> f64 {
        self.at_node(q).iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }
}
