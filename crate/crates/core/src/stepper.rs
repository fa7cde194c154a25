//! Implicit midpoint time stepping,
//! `u^{n+1} = u^n + tau F((u^n + u^{n+1}) / 2)`,
//! solved by fixed-point iteration started from `u^n`.
//!
//! The midpoint rule preserves every quadratic invariant of the flow, so a
//! charge-neutral right-hand side gives a charge that only drifts at the
//! level of the nonlinear-solver tolerance.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Coefficients, DGField};
use crate::operator::{SpatialOperator, Workspace};
use crate::projection::{generalized_project, l2_project, ProjectionKind, ProjectionSpec};

/// How continuous initial data is brought into `V_h^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialData {
    #[default]
    L2Projection,
    /// The generalized projection `P` with the operator's `theta`.
    GeneralizedP,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub tau: f64,
    /// Max-norm bound on the coefficient increment that ends the iteration.
    pub fp_tolerance: f64,
    pub max_iterations: usize,
    pub initial_data: InitialData,
}

impl StepperConfig {
    pub const DEFAULT_FP_TOLERANCE: f64 = 1e-13;
    pub const DEFAULT_MAX_ITERATIONS: usize = 100;

    pub fn new(tau: f64) -> Result<Self> {
        let cfg = Self {
            tau,
            fp_tolerance: Self::DEFAULT_FP_TOLERANCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            initial_data: InitialData::L2Projection,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter { name: "tau", value: self.tau });
        }
        if !(self.fp_tolerance > 0.0) {
            return Err(Error::InvalidParameter { name: "fp_tolerance", value: self.fp_tolerance });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter { name: "max_iterations", value: 0.0 });
        }
        Ok(())
    }
}

/// Fixed-point iterations spent on one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub last_increment: f64,
}

/// Reusable midpoint stepper bound to one operator.
#[derive(Debug)]
pub struct ImplicitMidpoint<'a> {
    op: &'a SpatialOperator,
    cfg: StepperConfig,
    ws: Workspace,
    mid_r: Coefficients,
    mid_s: Coefficients,
    f_r: Coefficients,
    f_s: Coefficients,
}

impl<'a> ImplicitMidpoint<'a> {
    pub fn new(op: &'a SpatialOperator, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        let n = op.mesh().n_cells();
        let k = op.degree();
        Ok(Self {
            op,
            cfg,
            ws: Workspace::new(n, k),
            mid_r: Coefficients::zeros(n, k),
            mid_s: Coefficients::zeros(n, k),
            f_r: Coefficients::zeros(n, k),
            f_s: Coefficients::zeros(n, k),
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    /// Advance `field` in place by `dt` (any nonzero sign).
    pub fn advance(&mut self, field: &mut DGField, dt: f64) -> Result<StepStats> {
        if !(dt != 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", value: dt });
        }
        let old_r = field.r.clone();
        let old_s = field.s.clone();
        let mut last = f64::INFINITY;
        for it in 1..=self.cfg.max_iterations {
            // midpoint of u^n and the current iterate
            for ((m, a), b) in self.mid_r.as_mut_slice().iter_mut().zip(old_r.as_slice()).zip(field.r.as_slice()) {
                *m = 0.5 * (a + b);
            }
            for ((m, a), b) in self.mid_s.as_mut_slice().iter_mut().zip(old_s.as_slice()).zip(field.s.as_slice()) {
                *m = 0.5 * (a + b);
            }
            self.op.rhs_into(&self.mid_r, &self.mid_s, &mut self.ws, &mut self.f_r, &mut self.f_s)?;
            let mut incr: f64 = 0.0;
            for ((u, u0), f) in field.r.as_mut_slice().iter_mut().zip(old_r.as_slice()).zip(self.f_r.as_slice()) {
                let next = u0 + dt * f;
                incr = incr.max((next - *u).abs());
                *u = next;
            }
            for ((u, u0), f) in field.s.as_mut_slice().iter_mut().zip(old_s.as_slice()).zip(self.f_s.as_slice()) {
                let next = u0 + dt * f;
                incr = incr.max((next - *u).abs());
                *u = next;
            }
            if !incr.is_finite() {
                let cell = field.r.first_non_finite().or(field.s.first_non_finite()).unwrap_or(0);
                let component = if field.r.first_non_finite().is_some() { "r" } else { "s" };
                return Err(Error::NonFinite { cell, component });
            }
            last = incr;
            if incr <= self.cfg.fp_tolerance {
                field.time += dt;
                return Ok(StepStats { iterations: it, last_increment: incr });
            }
        }
        field.r = old_r;
        field.s = old_s;
        Err(Error::NonConvergence { iterations: self.cfg.max_iterations, last_increment: last })
    }
}

/// One step of size `cfg.tau`.
pub fn step(op: &SpatialOperator, field: &DGField, cfg: &StepperConfig) -> Result<DGField> {
    step_by(op, field, cfg.tau, cfg)
}

/// One step of signed size `dt`; a negative `dt` runs the scheme backwards.
pub fn step_by(op: &SpatialOperator, field: &DGField, dt: f64, cfg: &StepperConfig) -> Result<DGField> {
    let mut out = field.clone();
    ImplicitMidpoint::new(op, *cfg)?.advance(&mut out, dt)?;
    Ok(out)
}

/// Bring initial data `(r0(x), s0(x))` into `V_h^k`.
pub fn discretize(
    op: &SpatialOperator,
    u0: impl Fn(f64) -> (f64, f64),
    how: InitialData,
) -> Result<DGField> {
    let mesh = op.mesh();
    let k = op.degree();
    let (r, s) = match how {
        InitialData::L2Projection => (l2_project(|x| u0(x).0, mesh, k)?, l2_project(|x| u0(x).1, mesh, k)?),
        InitialData::GeneralizedP => {
            let spec = ProjectionSpec::new(ProjectionKind::P, op.theta(), k, mesh.clone())?;
            (generalized_project(|x| u0(x).0, &spec)?, generalized_project(|x| u0(x).1, &spec)?)
        }
    };
    DGField::from_parts(Arc::clone(mesh), r, s, 0.0)
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_field: DGField,
    /// Times at which the charge was recorded (`t = 0` and after every step).
    pub times: Vec<f64>,
    pub charges: Vec<f64>,
    /// Snapshots at the requested times, in increasing time order.
    pub snapshots: Vec<DGField>,
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations_per_step: usize,
}

impl Trajectory {
    pub fn initial_charge(&self) -> f64 {
        self.charges[0]
    }

    /// `max_n |Q(t_n) - Q(0)| / Q(0)`.
    pub fn max_relative_drift(&self) -> f64 {
        let q0 = self.charges[0];
        self.charges.iter().fold(0.0_f64, |m, q| m.max((q - q0).abs())) / q0
    }
}

/// Discretize `u0`, then step to `t_final` with steps of `cfg.tau`. A step
/// is shortened whenever it would overshoot a snapshot time or `t_final`, so
/// both are hit exactly.
pub fn evolve(
    op: &SpatialOperator,
    u0: impl Fn(f64) -> (f64, f64),
    t_final: f64,
    cfg: &StepperConfig,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter { name: "T", value: t_final });
    }
    let field = discretize(op, u0, cfg.initial_data)?;
    evolve_field(op, field, t_final, cfg, snapshot_times)
}

/// [`evolve`] from an already discretized field (its `time` is the start).
pub fn evolve_field(
    op: &SpatialOperator,
    mut field: DGField,
    t_final: f64,
    cfg: &StepperConfig,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    let t0 = field.time;
    let mut stepper = ImplicitMidpoint::new(op, *cfg)?;
    let tau = cfg.tau;
    let snap_tol = 1e-6 * tau;

    let mut targets: Vec<f64> = snapshot_times.iter().copied().filter(|&t| t > t0 + snap_tol && t < t_final - snap_tol).collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|a, b| (*a - *b).abs() <= snap_tol);
    targets.push(t_final);

    let mut snapshots = Vec::new();
    let wants = |t: f64| snapshot_times.iter().any(|&s| (s - t).abs() <= snap_tol);
    if wants(t0) {
        snapshots.push(field.clone());
    }
    let mut times = alloc::vec![t0];
    let mut charges = alloc::vec![crate::diagnostics::charge(&field)];
    let (mut steps, mut total_iterations, mut max_it) = (0usize, 0usize, 0usize);

    for &target in &targets {
        while field.time < target - snap_tol {
            let remaining = target - field.time;
            let dt = if remaining <= tau + snap_tol { remaining } else { tau };
            let t_before = field.time;
            let stats = stepper.advance(&mut field, dt).map_err(|e| Error::StepFailed {
                step: steps + 1,
                time: t_before,
                source: alloc::boxed::Box::new(e),
            })?;
            if dt == remaining {
                field.time = target;
            }
            steps += 1;
            total_iterations += stats.iterations;
            max_it = max_it.max(stats.iterations);
            times.push(field.time);
            charges.push(crate::diagnostics::charge(&field));
        }
        if wants(target) {
            snapshots.push(field.clone());
        }
    }

    Ok(Trajectory {
        final_field: field,
        times,
        charges,
        snapshots,
        steps,
        total_iterations,
        max_iterations_per_step: max_it,
    })
}
