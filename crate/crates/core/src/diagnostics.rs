//! Charge, entropy fluxes, L2 errors and convergence tables.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::basis::gauss_rule;
use crate::error::{Error, Result};
use crate::exact::soliton_exact;
use crate::field::{Coefficients, Component, DGField};
use crate::math::{ln, sqrt};
use crate::mesh::Mesh1D;
use crate::operator::{Auxiliary, FluxParam, Nonlinearity, SpatialOperator};
use crate::stepper::{evolve, StepperConfig};

/// `||u_h||^2 = int r_h^2 + s_h^2`.
pub fn charge(field: &DGField) -> f64 {
    field.l2_norm_squared(&[Component::R, Component::S])
}

/// One-sided traces of `(r, s, p, q)` at an interface.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InterfaceTraces {
    pub r: (f64, f64),
    pub s: (f64, f64),
    pub p: (f64, f64),
    pub q: (f64, f64),
}

/// Numerical entropy flux `2 Im(theta v^+ conj(u^-) + (1 - theta) v^- conj(u^+))`
/// with `u = r + i s` and `v = u_x = q + i p`. Each pair is `(minus, plus)`.
pub fn entropy_flux(tr: &InterfaceTraces, theta: f64) -> f64 {
    let (r_m, r_p) = tr.r;
    let (s_m, s_p) = tr.s;
    let (p_m, p_p) = tr.p;
    let (q_m, q_p) = tr.q;
    2.0 * (theta * (p_p * r_m - q_p * s_m) + (1.0 - theta) * (p_m * r_p - q_m * s_p))
}

/// Entropy flux at every interface.
pub fn entropy_fluxes(field: &DGField, aux: &Auxiliary, theta: f64) -> Vec<f64> {
    let (r_m, r_p) = field.r.traces();
    let (s_m, s_p) = field.s.traces();
    let (p_m, p_p) = aux.p.traces();
    let (q_m, q_p) = aux.q.traces();
    (0..field.n_cells())
        .map(|i| {
            let tr = InterfaceTraces {
                r: (r_m[i], r_p[i]),
                s: (s_m[i], s_p[i]),
                p: (p_m[i], p_p[i]),
                q: (q_m[i], q_p[i]),
            };
            entropy_flux(&tr, theta)
        })
        .collect()
}

/// `d/dt int_{O_j} |u_h|^2` per cell, from a field and its time derivative:
/// `2 sum_l h_j / (2l + 1) (r_l r_l' + s_l s_l')`.
pub fn cell_charge_rates(field: &DGField, rate: &DGField) -> Vec<f64> {
    let mesh = field.mesh();
    (0..field.n_cells())
        .map(|j| {
            let h = mesh.width(j);
            let (r, s) = (field.r.cell(j), field.s.cell(j));
            let (dr, ds) = (rate.r.cell(j), rate.s.cell(j));
            (0..r.len()).map(|l| 2.0 * h / (2 * l + 1) as f64 * (r[l] * dr[l] + s[l] * ds[l])).sum()
        })
        .collect()
}

/// Residual of the per-cell balance
/// `d/dt int_{O_j} |u_h|^2 + phi_{j+1/2} - phi_{j-1/2}` for every cell.
pub fn cell_entropy_residuals(op: &SpatialOperator, field: &DGField) -> Result<Vec<f64>> {
    let (rate, aux) = op.rhs_with_auxiliary(field)?;
    let rates = cell_charge_rates(field, &rate);
    let phi = entropy_fluxes(field, &aux, op.theta());
    let n = field.n_cells();
    Ok((0..n).map(|j| rates[j] + phi[j] - phi[if j == 0 { n - 1 } else { j - 1 }]).collect())
}

/// `sqrt(int (f - c)^2)` with an `points`-point rule per cell.
pub fn l2_distance(c: &Coefficients, mesh: &Mesh1D, f: impl Fn(f64) -> f64, points: usize) -> Result<f64> {
    let rule = gauss_rule(points.min(crate::basis::MAX_GAUSS_POINTS))?;
    let mut total = 0.0;
    for j in 0..mesh.n_cells() {
        total += 0.5
            * mesh.width(j)
            * rule.integrate_reference(|xi| {
                let d = f(mesh.map_from_reference(j, xi)) - c.eval_unchecked(j, xi);
                d * d
            });
    }
    Ok(sqrt(total))
}

/// `||u(t) - u_h||` against an exact `(r, s)` pair, using `2k + 6` points per
/// cell (the volume rule plus four).
pub fn l2_error(field: &DGField, exact: impl Fn(f64, f64) -> (f64, f64), t: f64) -> Result<f64> {
    l2_error_with(field, exact, t, 2 * field.degree() + 6)
}

pub fn l2_error_with(field: &DGField, exact: impl Fn(f64, f64) -> (f64, f64), t: f64, points: usize) -> Result<f64> {
    let rule = gauss_rule(points.min(crate::basis::MAX_GAUSS_POINTS))?;
    let mesh = field.mesh();
    let mut total = 0.0;
    for j in 0..field.n_cells() {
        total += 0.5
            * mesh.width(j)
            * rule.integrate_reference(|xi| {
                let (r, s) = exact(t, mesh.map_from_reference(j, xi));
                let dr = r - field.r.eval_unchecked(j, xi);
                let ds = s - field.s.eval_unchecked(j, xi);
                dr * dr + ds * ds
            });
    }
    Ok(sqrt(total))
}

/// `log(e0 / e1) / log(n1 / n0)`.
pub fn observed_order(n0: usize, e0: f64, n1: usize, e1: f64) -> f64 {
    ln(e0 / e1) / ln(n1 as f64 / n0 as f64)
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub theta: f64,
    pub k: usize,
    pub n_cells: usize,
    pub h: f64,
    pub l2_error: core::result::Result<f64, Error>,
    /// Absent for the first successful row.
    pub order: Option<f64>,
}

/// Attach observed orders to per-grid errors; failed rows are kept and
/// skipped when computing orders.
pub fn build_records(theta: f64, k: usize, rows: Vec<(usize, f64, core::result::Result<f64, Error>)>) -> Vec<ConvergenceRecord> {
    let mut prev: Option<(usize, f64)> = None;
    rows.into_iter()
        .map(|(n, h, err)| {
            let order = match (&err, prev) {
                (Ok(e), Some((n0, e0))) => Some(observed_order(n0, e0, n, *e)),
                _ => None,
            };
            if let Ok(e) = err {
                prev = Some((n, e));
            }
            ConvergenceRecord { theta, k, n_cells: n, h, l2_error: err, order }
        })
        .collect()
}

/// Setup of a soliton accuracy study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSetup {
    pub theta: f64,
    pub k: usize,
    pub n_list: Vec<usize>,
    pub t_final: f64,
    pub stepper: StepperConfig,
    pub domain: (f64, f64),
    pub x0: f64,
    pub lambda: f64,
}

impl ConvergenceSetup {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::InvalidStudy("N list is empty"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidStudy("N list must be strictly increasing"));
        }
        FluxParam::new(self.theta)?;
        self.stepper.validate()
    }

    /// Evolve the soliton on `n` cells and return `||u(T) - u_h(T)||`.
    pub fn run_row(&self, n: usize) -> Result<f64> {
        let mesh = Arc::new(Mesh1D::uniform(self.domain.0, self.domain.1, n)?);
        let op = SpatialOperator::new(mesh, self.k, FluxParam::new(self.theta)?, Nonlinearity::cubic(self.lambda))?;
        let x0 = self.x0;
        let traj = evolve(&op, |x| soliton_exact(0.0, x, x0), self.t_final, &self.stepper, &[])?;
        l2_error(&traj.final_field, |t, x| soliton_exact(t, x, x0), self.t_final)
    }

    pub fn h_of(&self, n: usize) -> f64 {
        (self.domain.1 - self.domain.0) / n as f64
    }
}

/// Sequential convergence study; rows that fail are recorded, not fatal.
pub fn convergence_study(setup: &ConvergenceSetup) -> Result<Vec<ConvergenceRecord>> {
    setup.validate()?;
    let rows = setup.n_list.iter().map(|&n| (n, setup.h_of(n), setup.run_row(n))).collect();
    Ok(build_records(setup.theta, setup.k, rows))
}
