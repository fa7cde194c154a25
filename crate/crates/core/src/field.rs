//! Piecewise polynomials in `V_h^k`.
//!
//! Coefficients are stored cell-major, mode-minor: entry `j * (k + 1) + l`
//! multiplies `P_l(xi)` on cell `j`. Traces follow the usual convention:
//! `minus[i]` is the limit from cell `i` at its right face (`xi = +1`),
//! `plus[i]` the limit from cell `i + 1 mod N` at its left face (`xi = -1`).

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::basis::legendre_values;
use crate::error::{Error, Result};
use crate::math::alt_sign;
use crate::mesh::Mesh1D;

/// Modal coefficients of one real-valued component.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    n_cells: usize,
    degree: usize,
    data: Vec<f64>,
}

impl Coefficients {
    pub fn zeros(n_cells: usize, degree: usize) -> Self {
        Self { n_cells, degree, data: vec![0.0; n_cells * (degree + 1)] }
    }

    pub fn from_vec(n_cells: usize, degree: usize, data: Vec<f64>) -> Result<Self> {
        let expected = n_cells * (degree + 1);
        if data.len() != expected {
            return Err(Error::InvalidParameter { name: "coefficient length", value: data.len() as f64 });
        }
        Ok(Self { n_cells, degree, data })
    }

    /// Cellwise constant `value`.
    pub fn constant(n_cells: usize, degree: usize, value: f64) -> Self {
        let mut c = Self::zeros(n_cells, degree);
        for j in 0..n_cells {
            c.cell_mut(j)[0] = value;
        }
        c
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn cell(&self, j: usize) -> &[f64] {
        let m = self.degree + 1;
        &self.data[j * m..(j + 1) * m]
    }

    #[inline]
    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        let m = self.degree + 1;
        &mut self.data[j * m..(j + 1) * m]
    }

    /// `sum_l c_{j,l} P_l(xi)`, no range checks.
    pub fn eval_unchecked(&self, cell: usize, xi: f64) -> f64 {
        let mut p = [0.0; 32];
        if self.degree < p.len() {
            legendre_values(self.degree, xi, &mut p[..=self.degree]);
            return self.cell(cell).iter().zip(&p).map(|(c, p)| c * p).sum();
        }
        let mut p = vec![0.0; self.degree + 1];
        legendre_values(self.degree, xi, &mut p);
        self.cell(cell).iter().zip(&p).map(|(c, p)| c * p).sum()
    }

    pub fn eval(&self, cell: usize, xi: f64) -> Result<f64> {
        if cell >= self.n_cells {
            return Err(Error::CellIndex { cell, n_cells: self.n_cells });
        }
        if !(xi.abs() <= 1.0) {
            return Err(Error::OutsideReference { xi });
        }
        Ok(self.eval_unchecked(cell, xi))
    }

    /// Value at the right face of `cell` (`P_l(1) = 1`).
    #[inline]
    pub fn right_trace(&self, cell: usize) -> f64 {
        self.cell(cell).iter().sum()
    }

    /// Value at the left face of `cell` (`P_l(-1) = (-1)^l`).
    #[inline]
    pub fn left_trace(&self, cell: usize) -> f64 {
        self.cell(cell).iter().enumerate().map(|(l, c)| alt_sign(l) * c).sum()
    }

    /// One-sided traces at every interface: `(minus, plus)`.
    pub fn traces(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_cells;
        let mut minus = Vec::with_capacity(n);
        let mut plus = Vec::with_capacity(n);
        for i in 0..n {
            minus.push(self.right_trace(i));
            plus.push(self.left_trace(if i + 1 == n { 0 } else { i + 1 }));
        }
        (minus, plus)
    }

    /// `int |v_h|^2 dx` from orthogonality: `sum c_{j,l}^2 h_j / (2l + 1)`.
    pub fn l2_norm_squared(&self, widths: &[f64]) -> f64 {
        self.inner(self, widths)
    }

    /// `int v_h w_h dx` for fields of possibly different degree.
    pub fn inner(&self, other: &Coefficients, widths: &[f64]) -> f64 {
        let modes = self.n_modes().min(other.n_modes());
        let mut total = 0.0;
        for (j, &h) in widths.iter().enumerate().take(self.n_cells) {
            let (a, b) = (self.cell(j), other.cell(j));
            for l in 0..modes {
                total += a[l] * b[l] * h / (2 * l + 1) as f64;
            }
        }
        total
    }

    /// Same function, represented with `degree >= self.degree` (zero padded).
    pub fn embed(&self, degree: usize) -> Self {
        assert!(degree >= self.degree, "cannot embed into a lower degree");
        let mut out = Self::zeros(self.n_cells, degree);
        for j in 0..self.n_cells {
            out.cell_mut(j)[..=self.degree].copy_from_slice(self.cell(j));
        }
        out
    }

    /// Truncation to the first `degree + 1` modes, which is the L2 projection
    /// onto the smaller space.
    pub fn truncate(&self, degree: usize) -> Self {
        let degree = degree.min(self.degree);
        let mut out = Self::zeros(self.n_cells, degree);
        for j in 0..self.n_cells {
            out.cell_mut(j).copy_from_slice(&self.cell(j)[..=degree]);
        }
        out
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Coefficients) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|a| *a *= alpha);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// First cell holding a NaN or infinite coefficient.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|a| !a.is_finite()).map(|i| i / self.n_modes())
    }

    pub(crate) fn check_shape(&self, n_cells: usize, degree: usize) -> Result<()> {
        if self.n_cells != n_cells {
            return Err(Error::MeshMismatch);
        }
        if self.degree != degree {
            return Err(Error::DegreeMismatch { expected: degree, found: self.degree });
        }
        Ok(())
    }
}

/// Real (`r`) or imaginary (`s`) part of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    R,
    S,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::R => "r",
            Component::S => "s",
        }
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(Component::R),
            "s" => Ok(Component::S),
            other => Err(Error::UnknownComponent(other.to_string())),
        }
    }
}

/// Numerical solution `u_h = r_h + i s_h` at time `t`.
#[derive(Debug, Clone)]
pub struct DGField {
    mesh: Arc<Mesh1D>,
    pub r: Coefficients,
    pub s: Coefficients,
    pub time: f64,
}

impl DGField {
    pub fn zeros(mesh: Arc<Mesh1D>, degree: usize) -> Self {
        let n = mesh.n_cells();
        Self { mesh, r: Coefficients::zeros(n, degree), s: Coefficients::zeros(n, degree), time: 0.0 }
    }

    pub fn from_parts(mesh: Arc<Mesh1D>, r: Coefficients, s: Coefficients, time: f64) -> Result<Self> {
        r.check_shape(mesh.n_cells(), r.degree())?;
        s.check_shape(mesh.n_cells(), r.degree())?;
        Ok(Self { mesh, r, s, time })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.r.degree()
    }

    pub fn n_cells(&self) -> usize {
        self.r.n_cells()
    }

    pub fn component(&self, c: Component) -> &Coefficients {
        match c {
            Component::R => &self.r,
            Component::S => &self.s,
        }
    }

    pub fn component_mut(&mut self, c: Component) -> &mut Coefficients {
        match c {
            Component::R => &mut self.r,
            Component::S => &mut self.s,
        }
    }

    pub fn eval(&self, component: Component, cell: usize, xi: f64) -> Result<f64> {
        self.component(component).eval(cell, xi)
    }

    /// `eval` with the component named as a string (`"r"` or `"s"`).
    pub fn eval_named(&self, component: &str, cell: usize, xi: f64) -> Result<f64> {
        self.eval(component.parse()?, cell, xi)
    }

    pub fn traces(&self, component: Component) -> (Vec<f64>, Vec<f64>) {
        self.component(component).traces()
    }

    /// `int` of the squares of the selected components.
    pub fn l2_norm_squared(&self, components: &[Component]) -> f64 {
        components.iter().map(|&c| self.component(c).l2_norm_squared(self.mesh.widths())).sum()
    }

    /// `|u_h|` at a physical point of the given cell.
    pub fn modulus(&self, cell: usize, xi: f64) -> f64 {
        let r = self.r.eval_unchecked(cell, xi);
        let s = self.s.eval_unchecked(cell, xi);
        crate::math::sqrt(r * r + s * s)
    }
}
