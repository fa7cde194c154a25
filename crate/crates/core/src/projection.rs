//! Projections onto `V_h^k`.
//!
//! - [`l2_project`]: moments against all of `P^k`; the default discretization
//!   of initial data.
//! - [`gauss_radau_project`]: moments against `P^{k-1}` plus one endpoint
//!   value per cell (right endpoint for the minus type, left for the plus type).
//! - [`generalized_project`]: a Gauss-Radau base plus a correction in the top
//!   Legendre mode, chosen so that the weighted interface value
//!   `w_minus (Pu)^- + w_plus (Pu)^+` reproduces `u` at every interface.
//!   The correction coefficients solve a periodic two-diagonal (circulant)
//!   system in `O(N)`.
//!
//! `P` uses the weights `(theta, 1 - theta)` of `r^`, `s^`; `Q` uses the
//! mirrored `(1 - theta, theta)` of `p^`, `q^`. At `theta = 1` they reduce to
//! the minus- and plus-type Gauss-Radau projections.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{gauss_rule, legendre_values, QuadratureRule};
use crate::diagnostics::{l2_distance, observed_order};
use crate::error::{Error, Result};
use crate::field::Coefficients;
use crate::math::{alt_sign, powi};
use crate::mesh::Mesh1D;

/// Threshold on `|1 - q^N|` below which the correction system is reported
/// singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Which endpoint a Gauss-Radau projection interpolates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadauSide {
    /// Matches `u(x_{j+1/2})` from inside cell `j` (`P^-`).
    Minus,
    /// Matches `u(x_{j-1/2})` from inside cell `j` (`Q^-` in the
    /// generalized-projection family).
    Plus,
}

/// Moments of `u` against `P_0..P_degree` on every cell, using `rule`.
fn cell_moments(u: &impl Fn(f64) -> f64, mesh: &Mesh1D, degree: usize, rule: &QuadratureRule) -> Coefficients {
    let n = mesh.n_cells();
    let mut out = Coefficients::zeros(n, degree);
    let mut phi = vec![0.0; degree + 1];
    for j in 0..n {
        let cj = out.cell_mut(j);
        for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
            legendre_values(degree, xi, &mut phi);
            let fx = u(mesh.map_from_reference(j, xi));
            for l in 0..=degree {
                cj[l] += w * fx * phi[l];
            }
        }
        for (l, c) in cj.iter_mut().enumerate() {
            *c *= (2 * l + 1) as f64 / 2.0;
        }
    }
    out
}

fn moment_rule(degree: usize) -> Result<QuadratureRule> {
    gauss_rule((degree + 6).min(crate::basis::MAX_GAUSS_POINTS))
}

/// L2 projection of `u` onto `V_h^degree`, moments by a `degree + 6`
/// point rule.
pub fn l2_project(u: impl Fn(f64) -> f64, mesh: &Mesh1D, degree: usize) -> Result<Coefficients> {
    Ok(cell_moments(&u, mesh, degree, &moment_rule(degree)?))
}

/// [`l2_project`] with an explicit number of quadrature points.
pub fn l2_project_with(u: impl Fn(f64) -> f64, mesh: &Mesh1D, degree: usize, points: usize) -> Result<Coefficients> {
    Ok(cell_moments(&u, mesh, degree, &gauss_rule(points)?))
}

/// Gauss-Radau projection: moments against `P^{k-1}` and one endpoint value.
pub fn gauss_radau_project(u: impl Fn(f64) -> f64, mesh: &Mesh1D, degree: usize, side: RadauSide) -> Result<Coefficients> {
    if degree == 0 {
        return Err(Error::InvalidParameter { name: "k", value: 0.0 });
    }
    let mut c = cell_moments(&u, mesh, degree, &moment_rule(degree)?);
    let k = degree;
    for j in 0..mesh.n_cells() {
        let (left, right) = mesh.cell_bounds(j);
        let cj = c.cell_mut(j);
        match side {
            RadauSide::Minus => {
                let lower: f64 = cj[..k].iter().sum();
                cj[k] = u(right) - lower;
            }
            RadauSide::Plus => {
                let lower: f64 = cj[..k].iter().enumerate().map(|(l, c)| alt_sign(l) * c).sum();
                cj[k] = alt_sign(k) * (u(left) - lower);
            }
        }
    }
    Ok(c)
}

/// The periodic system `diag * x_i + upper * x_{i+1} = f_i` (indices mod N),
/// i.e. the circulant `circ(diag, upper, 0, ..., 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculantBidiagonal {
    pub diag: f64,
    pub upper: f64,
}

impl CirculantBidiagonal {
    /// The system of the `P` correction, `circ(theta, (1 - theta) (-1)^k)`.
    pub fn for_theta(theta: f64, k: usize) -> Self {
        Self { diag: theta, upper: (1.0 - theta) * alt_sign(k) }
    }

    /// `q = -upper / diag`, so that `det = diag^N (1 - q^N)`.
    pub fn ratio(&self) -> f64 {
        -self.upper / self.diag
    }

    /// `|1 - rho^N|` with `rho` the recurrence ratio of the stable sweep
    /// direction (`q` when `|q| <= 1`, else `1/q`).
    pub fn singularity_measure(&self, n: usize) -> f64 {
        let rho = if self.diag.abs() >= self.upper.abs() {
            -self.upper / self.diag
        } else {
            -self.diag / self.upper
        };
        (1.0 - powi(rho, n as i32)).abs()
    }

    /// `det circ(diag, upper, 0, ..., 0) = diag^N - (-upper)^N`, evaluated
    /// as the product of the sweep pivots with the periodic closure.
    pub fn determinant(&self, n: usize) -> f64 {
        let ni = n as i32;
        if self.diag.abs() >= self.upper.abs() {
            powi(self.diag, ni) * (1.0 - powi(-self.upper / self.diag, ni))
        } else {
            -powi(-self.upper, ni) * (1.0 - powi(-self.diag / self.upper, ni))
        }
    }

    /// Solve in `O(N)` by a one-directional sweep carrying the unknown
    /// wrap-around value, then closing the period. The sweep runs in the
    /// direction where the recurrence ratio is at most one in magnitude.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let measure = self.singularity_measure(n);
        if !(measure >= SINGULAR_THRESHOLD) {
            return Err(Error::SingularSystem { one_minus_q_pow_n: measure });
        }
        let (a, b) = (self.diag, self.upper);
        // x_i = g_i + h_i t with t the wrap-around unknown
        let mut g = vec![0.0; n + 1];
        let mut h = vec![0.0; n + 1];
        let mut x = vec![0.0; n];
        if a.abs() >= b.abs() {
            // backward: x_i = (f_i - b x_{i+1}) / a, t = x_N = x_0
            h[n] = 1.0;
            for i in (0..n).rev() {
                g[i] = (rhs[i] - b * g[i + 1]) / a;
                h[i] = -b * h[i + 1] / a;
            }
            let t = g[0] / (1.0 - h[0]);
            x[0] = t;
            for i in 1..n {
                x[i] = g[i] + h[i] * t;
            }
        } else {
            // forward: x_{i+1} = (f_i - a x_i) / b, t = x_0 = x_N
            h[0] = 1.0;
            for i in 0..n {
                g[i + 1] = (rhs[i] - a * g[i]) / b;
                h[i + 1] = -a * h[i] / b;
            }
            let t = g[n] / (1.0 - h[n]);
            x[0] = t;
            for i in 1..n {
                x[i] = g[i] + h[i] * t;
            }
        }
        Ok(x)
    }
}

/// Top-mode correction of the `P` projection: solves
/// `circ(theta, (1 - theta)(-1)^k) alpha = (1 - theta) eta`.
pub fn circulant_correction(eta: &[f64], theta: f64, k: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter { name: "theta", value: theta });
    }
    let rhs: Vec<f64> = eta.iter().map(|e| (1.0 - theta) * e).collect();
    CirculantBidiagonal::for_theta(theta, k).solve(&rhs)
}

/// Which generalized projection to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    /// Interface weights `(theta, 1 - theta)`, minus-type base.
    P,
    /// Mirrored interface weights `(1 - theta, theta)`, plus-type base.
    Q,
    /// `Q` read with the unmirrored weights `(theta, 1 - theta)`; this
    /// coincides with `P` and exists so the two readings can be compared.
    QUnmirrored,
}

#[derive(Debug, Clone)]
pub struct ProjectionSpec {
    pub kind: ProjectionKind,
    pub theta: f64,
    pub degree: usize,
    pub mesh: Arc<Mesh1D>,
}

impl ProjectionSpec {
    pub fn new(kind: ProjectionKind, theta: f64, degree: usize, mesh: Arc<Mesh1D>) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter { name: "theta", value: theta });
        }
        if degree == 0 {
            return Err(Error::InvalidParameter { name: "k", value: 0.0 });
        }
        Ok(Self { kind, theta, degree, mesh })
    }

    /// `(w_minus, w_plus)` of the interface condition.
    pub fn face_weights(&self) -> (f64, f64) {
        match self.kind {
            ProjectionKind::P | ProjectionKind::QUnmirrored => (self.theta, 1.0 - self.theta),
            ProjectionKind::Q => (1.0 - self.theta, self.theta),
        }
    }

    pub fn base_side(&self) -> RadauSide {
        match self.kind {
            ProjectionKind::P | ProjectionKind::QUnmirrored => RadauSide::Minus,
            ProjectionKind::Q => RadauSide::Plus,
        }
    }
}

/// Generalized Gauss-Radau projection.
pub fn generalized_project(u: impl Fn(f64) -> f64, spec: &ProjectionSpec) -> Result<Coefficients> {
    let mesh = &spec.mesh;
    let k = spec.degree;
    let n = mesh.n_cells();
    let (w_minus, w_plus) = spec.face_weights();
    let side = spec.base_side();
    let mut base = gauss_radau_project(&u, mesh, k, side)?;
    let system = CirculantBidiagonal { diag: w_minus, upper: w_plus * alt_sign(k) };
    let rhs: Vec<f64> = match side {
        // eta_i = (u - P^- u)^+ at interface i
        RadauSide::Minus => {
            if w_plus == 0.0 {
                return Ok(base);
            }
            (0..n)
                .map(|i| {
                    let next = mesh.right_neighbor(i);
                    w_plus * (u(mesh.boundaries()[next]) - base.left_trace(next))
                })
                .collect()
        }
        // zeta_i = (u - Q^- u)^- at interface i
        RadauSide::Plus => {
            if w_minus == 0.0 {
                return Ok(base);
            }
            (0..n).map(|i| w_minus * (u(mesh.boundaries()[i + 1]) - base.right_trace(i))).collect()
        }
    };
    let alpha = system.solve(&rhs)?;
    for (j, a) in alpha.iter().enumerate() {
        base.cell_mut(j)[k] += a;
    }
    Ok(base)
}

/// One row of a projection convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionStudyRow {
    pub theta: f64,
    pub k: usize,
    pub n_cells: usize,
    pub h: f64,
    pub l2_error: core::result::Result<f64, Error>,
    /// Observed order against the previous successful row.
    pub slope: Option<f64>,
}

/// `||u - P u||` on a sequence of uniform meshes of `[a, b]`.
pub fn projection_order_study(
    u: impl Fn(f64) -> f64,
    kind: ProjectionKind,
    theta: f64,
    k: usize,
    domain: (f64, f64),
    n_list: &[usize],
) -> Result<Vec<ProjectionStudyRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidStudy("N list must be strictly increasing"));
    }
    let mut rows: Vec<ProjectionStudyRow> = Vec::with_capacity(n_list.len());
    let mut prev: Option<(usize, f64)> = None;
    for &n in n_list {
        let mesh = Arc::new(Mesh1D::uniform(domain.0, domain.1, n)?);
        let h = mesh.h();
        let spec = ProjectionSpec::new(kind, theta, k, mesh.clone())?;
        let err = generalized_project(&u, &spec).and_then(|c| l2_distance(&c, &mesh, &u, 2 * k + 6));
        let slope = match (&err, prev) {
            (Ok(e), Some((n0, e0))) => Some(observed_order(n0, e0, n, *e)),
            _ => None,
        };
        if let Ok(e) = err {
            prev = Some((n, e));
        }
        rows.push(ProjectionStudyRow { theta, k, n_cells: n, h, l2_error: err, slope });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn sin2pi(x: f64) -> f64 {
        (2.0 * PI * x).sin()
    }

    #[test]
    fn radau_reproduces_polynomials() {
        let mesh = Mesh1D::uniform(-1.0, 2.0, 7).unwrap();
        let poly = |x: f64| 0.3 - 1.2 * x + 0.7 * x * x;
        for side in [RadauSide::Minus, RadauSide::Plus] {
            let c = gauss_radau_project(poly, &mesh, 2, side).unwrap();
            for j in 0..7 {
                for &xi in &[-1.0, -0.3, 0.4, 1.0] {
                    let x = mesh.map_from_reference(j, xi);
                    assert!((c.eval_unchecked(j, xi) - poly(x)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn radau_endpoint_interpolation() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 10).unwrap();
        let c = gauss_radau_project(sin2pi, &mesh, 3, RadauSide::Minus).unwrap();
        for j in 0..10 {
            assert!((c.right_trace(j) - sin2pi(mesh.boundaries()[j + 1])).abs() < 1e-13);
        }
        let c = gauss_radau_project(sin2pi, &mesh, 3, RadauSide::Plus).unwrap();
        for j in 0..10 {
            assert!((c.left_trace(j) - sin2pi(mesh.boundaries()[j])).abs() < 1e-13);
        }
    }

    #[test]
    fn upwind_needs_no_correction() {
        let eta = [0.3, -1.0, 2.0, 0.5];
        assert_eq!(circulant_correction(&eta, 1.0, 2).unwrap(), alloc::vec![0.0; 4]);
    }

    #[test]
    fn three_by_three_example() {
        let sys = CirculantBidiagonal::for_theta(0.4, 1);
        assert!((sys.determinant(3) + 0.152).abs() < 1e-15);
        // dense Cramer's rule on circ(0.4, -0.6, 0)
        let eta = [1.0, -2.0, 0.5];
        let alpha = circulant_correction(&eta, 0.4, 1).unwrap();
        for i in 0..3 {
            let lhs = 0.4 * alpha[i] - 0.6 * alpha[(i + 1) % 3];
            assert!((lhs - 0.6 * eta[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn half_theta_odd_degree_is_singular() {
        let r = circulant_correction(&[1.0; 4], 0.5, 1);
        assert!(matches!(r, Err(Error::SingularSystem { .. })));
        // k even, N even: q = -1, q^N = 1
        assert!(circulant_correction(&[1.0; 4], 0.5, 2).is_err());
        // k even, N odd: invertible
        assert!(circulant_correction(&[1.0; 5], 0.5, 2).is_ok());
    }

    #[test]
    fn generalized_reproduces_polynomials_and_face_condition() {
        let mesh = Arc::new(Mesh1D::uniform(0.0, 1.0, 9).unwrap());
        let poly = |x: f64| 1.0 + x - 2.0 * x * x;
        for kind in [ProjectionKind::P, ProjectionKind::Q] {
            let spec = ProjectionSpec::new(kind, 0.3, 2, mesh.clone()).unwrap();
            let c = generalized_project(sin2pi, &spec).unwrap();
            let (wm, wp) = spec.face_weights();
            for i in 0..9 {
                let next = (i + 1) % 9;
                let hat = wm * c.right_trace(i) + wp * c.left_trace(next);
                assert!((hat - sin2pi(mesh.boundaries()[i + 1])).abs() < 1e-12);
            }
            // eta vanishes cell by cell for polynomials, so P and Q are the identity
            let c = generalized_project(poly, &spec).unwrap();
            for j in 0..9 {
                for &xi in &[-1.0, 0.2, 1.0] {
                    let x = mesh.map_from_reference(j, xi);
                    assert!((c.eval_unchecked(j, xi) - poly(x)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn theta_one_is_plain_radau() {
        let mesh = Arc::new(Mesh1D::uniform(0.0, 1.0, 8).unwrap());
        let spec = ProjectionSpec::new(ProjectionKind::P, 1.0, 2, mesh.clone()).unwrap();
        let g = generalized_project(sin2pi, &spec).unwrap();
        let r = gauss_radau_project(sin2pi, &mesh, 2, RadauSide::Minus).unwrap();
        assert_eq!(g, r);
        let spec = ProjectionSpec::new(ProjectionKind::Q, 1.0, 2, mesh.clone()).unwrap();
        let g = generalized_project(sin2pi, &spec).unwrap();
        let r = gauss_radau_project(sin2pi, &mesh, 2, RadauSide::Plus).unwrap();
        assert_eq!(g, r);
    }

    #[test]
    fn study_rejects_non_increasing_grids() {
        assert!(projection_order_study(sin2pi, ProjectionKind::P, 0.4, 2, (0.0, 1.0), &[16, 16]).is_err());
    }

    #[test]
    fn study_marks_singular_rows() {
        let rows = projection_order_study(sin2pi, ProjectionKind::P, 0.5, 1, (0.0, 1.0), &[8, 16]).unwrap();
        assert!(rows.iter().all(|r| matches!(r.l2_error, Err(Error::SingularSystem { .. }))));
    }
}
