//! The CLDG semidiscretization.
//!
//! With `u = r + i s`, `p = s_x` and `q = r_x`, the scheme on cell `j` reads,
//! for all test functions in `V_h^k`,
//!
//! ```text
//! (r_t, g)_j - (p, g_x)_j + p^ g^-|_{j+1/2} - p^ g^+|_{j-1/2} + (f(rho) s, g)_j = 0
//! (p, w)_j   + (s, w_x)_j - s^ w^-|_{j+1/2} + s^ w^+|_{j-1/2}                  = 0
//! (s_t, a)_j + (q, a_x)_j - q^ a^-|_{j+1/2} + q^ a^+|_{j-1/2} - (f(rho) r, a)_j = 0
//! (q, b)_j   + (r, b_x)_j - r^ b^-|_{j+1/2} + r^ b^+|_{j-1/2}                  = 0
//! ```
//!
//! with `rho = r^2 + s^2`, `r^ = theta r^- + (1 - theta) r^+` (same for `s^`)
//! and the mirrored `p^ = (1 - theta) p^- + theta p^+` (same for `q^`).
//! The auxiliary equations are solved cell by cell (the mass matrix is
//! diagonal), which turns the scheme into an ODE system for `(r, s)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{gauss_rule, NodalTable, QuadratureRule};
use crate::error::{Error, Result};
use crate::field::{Coefficients, DGField};
use crate::math::alt_sign;
use crate::mesh::Mesh1D;

/// `theta * minus + (1 - theta) * plus`; the trace used for `r^` and `s^`.
#[inline]
pub fn flux_u_hat(minus: f64, plus: f64, theta: f64) -> f64 {
    theta * minus + (1.0 - theta) * plus
}

/// `(1 - theta) * minus + theta * plus`; the trace used for `p^` and `q^`.
#[inline]
pub fn flux_v_hat(minus: f64, plus: f64, theta: f64) -> f64 {
    (1.0 - theta) * minus + theta * plus
}

/// Weight of the generalized alternating fluxes, `theta` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParam {
    theta: f64,
}

impl FluxParam {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter { name: "theta", value: theta });
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn u_hat(&self, minus: f64, plus: f64) -> f64 {
        flux_u_hat(minus, plus, self.theta)
    }

    #[inline]
    pub fn v_hat(&self, minus: f64, plus: f64) -> f64 {
        flux_v_hat(minus, plus, self.theta)
    }
}

/// The nonlinearity `f(rho)` multiplying `u` in `i u_t + u_xx + f(|u|^2) u = 0`.
#[derive(Debug, Clone, Copy)]
pub enum Nonlinearity {
    /// `f(rho) = lambda * rho`. `lambda > 0` is focusing, `lambda = 0` linear.
    Cubic { lambda: f64 },
    General { f: fn(f64) -> f64, f_prime: fn(f64) -> f64 },
}

impl Nonlinearity {
    pub fn cubic(lambda: f64) -> Self {
        Nonlinearity::Cubic { lambda }
    }

    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            Nonlinearity::Cubic { lambda } => lambda * rho,
            Nonlinearity::General { f, .. } => f(rho),
        }
    }

    #[inline]
    pub fn derivative(&self, rho: f64) -> f64 {
        match *self {
            Nonlinearity::Cubic { lambda } => lambda,
            Nonlinearity::General { f_prime, .. } => f_prime(rho),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, Nonlinearity::Cubic { lambda } if lambda == 0.0)
    }
}

/// `(r, p, s, q)` or a matching tuple of test functions `(gamma, omega, alpha, beta)`.
#[derive(Debug, Clone, Copy)]
pub struct FourFields<'a> {
    pub r: &'a Coefficients,
    pub p: &'a Coefficients,
    pub s: &'a Coefficients,
    pub q: &'a Coefficients,
}

/// Auxiliary variables recovered from a solution: `p_h ~ s_x`, `q_h ~ r_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Auxiliary {
    pub p: Coefficients,
    pub q: Coefficients,
}

/// Precomputed assembly context mapping `(r_h, s_h)` to `d/dt (r_h, s_h)`.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    mesh: Arc<Mesh1D>,
    degree: usize,
    flux: FluxParam,
    nonlinearity: Nonlinearity,
    volume: NodalTable,
    /// `(2l + 1) / h_j`, cell-major.
    mass_inv: Vec<f64>,
}

impl SpatialOperator {
    /// Operator with the default volume rule of `2k + 2` Gauss points.
    pub fn new(mesh: Arc<Mesh1D>, degree: usize, flux: FluxParam, nonlinearity: Nonlinearity) -> Result<Self> {
        Self::with_quadrature(mesh, degree, flux, nonlinearity, 2 * degree + 2)
    }

    pub fn with_quadrature(
        mesh: Arc<Mesh1D>,
        degree: usize,
        flux: FluxParam,
        nonlinearity: Nonlinearity,
        volume_points: usize,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter { name: "k", value: 0.0 });
        }
        let volume = NodalTable::new(degree, gauss_rule(volume_points)?);
        let m = degree + 1;
        let mut mass_inv = vec![0.0; mesh.n_cells() * m];
        for (j, &h) in mesh.widths().iter().enumerate() {
            for l in 0..m {
                mass_inv[j * m + l] = (2 * l + 1) as f64 / h;
            }
        }
        Ok(Self { mesh, degree, flux, nonlinearity, volume, mass_inv })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn flux(&self) -> FluxParam {
        self.flux
    }

    pub fn theta(&self) -> f64 {
        self.flux.theta
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn volume_rule(&self) -> &QuadratureRule {
        self.volume.rule()
    }

    fn check_field(&self, field: &DGField) -> Result<()> {
        if field.mesh().id() != self.mesh.id() {
            return Err(Error::MeshMismatch);
        }
        field.r.check_shape(self.mesh.n_cells(), self.degree)?;
        field.s.check_shape(self.mesh.n_cells(), self.degree)
    }

    /// Solve the second and fourth equations for `p_h` and `q_h`.
    pub fn recover_auxiliary(&self, field: &DGField) -> Result<Auxiliary> {
        self.check_field(field)?;
        let n = self.mesh.n_cells();
        let mut p = Coefficients::zeros(n, self.degree);
        let mut q = Coefficients::zeros(n, self.degree);
        let mut hat = vec![0.0; n];
        self.fill_hats(&field.s, &mut hat, Hat::U);
        self.differentiate(&field.s, &hat, &mut p);
        self.fill_hats(&field.r, &mut hat, Hat::U);
        self.differentiate(&field.r, &hat, &mut q);
        Ok(Auxiliary { p, q })
    }

    /// Semidiscrete time derivative `(dr/dt, ds/dt)`, returned as a field
    /// stamped with the input time.
    pub fn rhs(&self, field: &DGField) -> Result<DGField> {
        Ok(self.rhs_with_auxiliary(field)?.0)
    }

    /// [`rhs`](Self::rhs) together with the auxiliary variables it used.
    pub fn rhs_with_auxiliary(&self, field: &DGField) -> Result<(DGField, Auxiliary)> {
        self.check_field(field)?;
        let n = self.mesh.n_cells();
        let mut ws = Workspace::new(n, self.degree);
        let mut dr = Coefficients::zeros(n, self.degree);
        let mut ds = Coefficients::zeros(n, self.degree);
        self.rhs_into(&field.r, &field.s, &mut ws, &mut dr, &mut ds)?;
        let out = DGField::from_parts(field.mesh().clone(), dr, ds, field.time)?;
        Ok((out, Auxiliary { p: ws.p, q: ws.q }))
    }

    /// Allocation-free right-hand side on raw coefficients.
    pub fn rhs_into(
        &self,
        r: &Coefficients,
        s: &Coefficients,
        ws: &mut Workspace,
        dr: &mut Coefficients,
        ds: &mut Coefficients,
    ) -> Result<()> {
        if let Some(cell) = r.first_non_finite() {
            return Err(Error::NonFinite { cell, component: "r" });
        }
        if let Some(cell) = s.first_non_finite() {
            return Err(Error::NonFinite { cell, component: "s" });
        }
        let n = self.mesh.n_cells();
        let m = self.degree + 1;

        // Phase 1: auxiliary variables.
        self.fill_hats(s, &mut ws.hat, Hat::U);
        self.differentiate(s, &ws.hat, &mut ws.p);
        self.fill_hats(r, &mut ws.hat, Hat::U);
        self.differentiate(r, &ws.hat, &mut ws.q);

        // Phase 2: time derivatives. dr = -(p differentiated with p^),
        // ds = +(q differentiated with q^), plus the nonlinear moments.
        self.fill_hats(&ws.p, &mut ws.hat, Hat::V);
        self.differentiate(&ws.p, &ws.hat, dr);
        dr.scale(-1.0);
        self.fill_hats(&ws.q, &mut ws.hat, Hat::V);
        self.differentiate(&ws.q, &ws.hat, ds);

        if !self.nonlinearity.is_zero() {
            let rule = self.volume.rule();
            for j in 0..n {
                let (rc, sc) = (r.cell(j), s.cell(j));
                let half_h = 0.5 * self.mesh.width(j);
                ws.moment_r.iter_mut().for_each(|v| *v = 0.0);
                ws.moment_s.iter_mut().for_each(|v| *v = 0.0);
                for (qi, &w) in rule.weights().iter().enumerate() {
                    let phi = self.volume.at_node(qi);
                    let rv: f64 = phi.iter().zip(rc).map(|(a, b)| a * b).sum();
                    let sv: f64 = phi.iter().zip(sc).map(|(a, b)| a * b).sum();
                    let fw = w * half_h * self.nonlinearity.eval(rv * rv + sv * sv);
                    for l in 0..m {
                        ws.moment_r[l] += fw * rv * phi[l];
                        ws.moment_s[l] += fw * sv * phi[l];
                    }
                }
                let inv = &self.mass_inv[j * m..(j + 1) * m];
                let (dr_j, ds_j) = (dr.cell_mut(j), ds.cell_mut(j));
                for l in 0..m {
                    dr_j[l] -= inv[l] * ws.moment_s[l];
                }
                for l in 0..m {
                    ds_j[l] += inv[l] * ws.moment_r[l];
                }
            }
        }

        if let Some(cell) = dr.first_non_finite() {
            return Err(Error::NonFinite { cell, component: "r" });
        }
        if let Some(cell) = ds.first_non_finite() {
            return Err(Error::NonFinite { cell, component: "s" });
        }
        Ok(())
    }

    /// `hat[i]` at interface `i` with the `u`-type or `v`-type weights.
    fn fill_hats(&self, c: &Coefficients, hat: &mut [f64], kind: Hat) {
        let n = c.n_cells();
        let mut first_left = 0.0;
        let mut prev_minus = 0.0;
        for j in 0..n {
            let left = c.left_trace(j);
            if j == 0 {
                first_left = left;
            } else {
                hat[j - 1] = kind.combine(prev_minus, left, self.flux.theta);
            }
            prev_minus = c.right_trace(j);
        }
        hat[n - 1] = kind.combine(prev_minus, first_left, self.flux.theta);
    }

    /// The weak derivative shared by all four equations:
    /// `out_{j,l} = (2l+1)/h_j [ -sum_m D_ml c_{j,m} + hat_{j+1/2} - (-1)^l hat_{j-1/2} ]`,
    /// i.e. the `V_h` representative of `c_x` with the given interface values.
    fn differentiate(&self, c: &Coefficients, hat: &[f64], out: &mut Coefficients) {
        let n = c.n_cells();
        let m = self.degree + 1;
        for j in 0..n {
            let hat_right = hat[j];
            let hat_left = hat[if j == 0 { n - 1 } else { j - 1 }];
            let cj = c.cell(j);
            let inv = &self.mass_inv[j * m..(j + 1) * m];
            let oj = out.cell_mut(j);
            // acc[parity] = sum of c_m with m of that parity, m < l
            let mut acc = [0.0; 2];
            for l in 0..m {
                let stiff = 2.0 * acc[(l + 1) % 2];
                oj[l] = inv[l] * (-stiff + hat_right - alt_sign(l) * hat_left);
                acc[l % 2] += cj[l];
            }
        }
    }

    /// The bilinear form `B(r, p, s, q; gamma, omega, alpha, beta)` summed
    /// over all cells. Arguments may have any degree; only the cell count
    /// must match the operator's mesh.
    pub fn apply_b(&self, args: FourFields<'_>, tests: FourFields<'_>) -> Result<f64> {
        let n = self.mesh.n_cells();
        for c in [args.r, args.p, args.s, args.q, tests.r, tests.p, tests.s, tests.q] {
            if c.n_cells() != n {
                return Err(Error::MeshMismatch);
            }
        }
        let volume = -stiffness_pairing(args.p, tests.r)
            + stiffness_pairing(args.s, tests.p)
            + stiffness_pairing(args.q, tests.s)
            + stiffness_pairing(args.r, tests.q);
        let theta = self.flux.theta;
        let (p_m, p_p) = args.p.traces();
        let (s_m, s_p) = args.s.traces();
        let (q_m, q_p) = args.q.traces();
        let (r_m, r_p) = args.r.traces();
        let jump = |c: &Coefficients, i: usize| c.right_trace(i) - c.left_trace(if i + 1 == n { 0 } else { i + 1 });
        let mut faces = 0.0;
        for i in 0..n {
            faces += flux_v_hat(p_m[i], p_p[i], theta) * jump(tests.r, i)
                - flux_u_hat(s_m[i], s_p[i], theta) * jump(tests.p, i)
                - flux_v_hat(q_m[i], q_p[i], theta) * jump(tests.s, i)
                - flux_u_hat(r_m[i], r_p[i], theta) * jump(tests.q, i);
        }
        Ok(volume + faces)
    }

    /// The nonlinear form `H(r, s; gamma, alpha) = int f(rho) (r alpha - s gamma)`.
    pub fn apply_h(
        &self,
        r: &Coefficients,
        s: &Coefficients,
        gamma: &Coefficients,
        alpha: &Coefficients,
    ) -> Result<f64> {
        let n = self.mesh.n_cells();
        for c in [r, s, gamma, alpha] {
            if c.n_cells() != n {
                return Err(Error::MeshMismatch);
            }
        }
        let top = r.degree().max(s.degree()).max(gamma.degree()).max(alpha.degree());
        let rule = if top == self.degree {
            self.volume.rule().clone()
        } else {
            gauss_rule((2 * top + 2).min(crate::basis::MAX_GAUSS_POINTS))?
        };
        let mut total = 0.0;
        for j in 0..n {
            let half_h = 0.5 * self.mesh.width(j);
            total += half_h
                * rule.integrate_reference(|xi| {
                    let rv = r.eval_unchecked(j, xi);
                    let sv = s.eval_unchecked(j, xi);
                    let f = self.nonlinearity.eval(rv * rv + sv * sv);
                    f * (rv * alpha.eval_unchecked(j, xi) - sv * gamma.eval_unchecked(j, xi))
                });
        }
        Ok(total)
    }
}

/// `sum_j int a (b)_x dx`; the Jacobian of the cell map cancels.
fn stiffness_pairing(a: &Coefficients, b: &Coefficients) -> f64 {
    let mut total = 0.0;
    for j in 0..a.n_cells() {
        let (aj, bj) = (a.cell(j), b.cell(j));
        let mut acc = [0.0; 2];
        for (l, &bl) in bj.iter().enumerate() {
            // acc[parity] holds a_m for m < l of that parity
            total += 2.0 * acc[(l + 1) % 2] * bl;
            if l < aj.len() {
                acc[l % 2] += aj[l];
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy)]
enum Hat {
    /// `theta` on the minus side.
    U,
    /// `1 - theta` on the minus side.
    V,
}

impl Hat {
    #[inline]
    fn combine(self, minus: f64, plus: f64, theta: f64) -> f64 {
        match self {
            Hat::U => flux_u_hat(minus, plus, theta),
            Hat::V => flux_v_hat(minus, plus, theta),
        }
    }
}

/// Scratch buffers for [`SpatialOperator::rhs_into`].
#[derive(Debug, Clone)]
pub struct Workspace {
    hat: Vec<f64>,
    p: Coefficients,
    q: Coefficients,
    moment_r: Vec<f64>,
    moment_s: Vec<f64>,
}

impl Workspace {
    pub fn new(n_cells: usize, degree: usize) -> Self {
        Self {
            hat: vec![0.0; n_cells],
            p: Coefficients::zeros(n_cells, degree),
            q: Coefficients::zeros(n_cells, degree),
            moment_r: vec![0.0; degree + 1],
            moment_s: vec![0.0; degree + 1],
        }
    }

    /// Auxiliary variables left behind by the last `rhs_into` call.
    pub fn auxiliary(&self) -> (&Coefficients, &Coefficients) {
        (&self.p, &self.q)
    }
}
