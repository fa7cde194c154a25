//! Experiment orchestration: builds the discretization from a [`RunConfig`],
//! runs it, writes the CSV outputs and returns a machine-readable summary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use cldg_core::diagnostics::{build_records, l2_error_with};
use cldg_core::exact::InitialCondition;
use cldg_core::projection::{projection_order_study, ProjectionStudyRow};
use cldg_core::stepper::evolve;
use cldg_core::{ConvergenceRecord, FluxParam, Mesh1D, Nonlinearity, SpatialOperator};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{projection_name, Experiment, RunConfig};
use crate::output;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StudyRow {
    pub theta: f64,
    pub k: usize,
    #[serde(rename = "N")]
    pub n_cells: usize,
    pub h: f64,
    pub l2_error: Option<f64>,
    pub order: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// What `cldg run` prints on standard output.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub experiment: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_charge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_relative_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_l2_error: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<StudyRow>,
    pub checks: Vec<CheckResult>,
    pub outputs: Vec<PathBuf>,
}

impl Summary {
    fn new(experiment: Experiment) -> Self {
        Self {
            experiment: experiment.name(),
            status: "PASS",
            final_time: None,
            steps: None,
            initial_charge: None,
            max_relative_drift: None,
            final_l2_error: None,
            rows: Vec::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn finalize(mut self) -> Self {
        self.status = if self.passed() { "PASS" } else { "FAIL" };
        self
    }
}

fn build_operator(cfg: &RunConfig, mesh: Arc<Mesh1D>, k: usize, theta: f64) -> Result<SpatialOperator> {
    let flux = FluxParam::new(theta)?;
    let nl = Nonlinearity::cubic(cfg.lambda);
    Ok(match cfg.volume_points {
        Some(points) => SpatialOperator::with_quadrature(mesh, k, flux, nl, points)?,
        None => SpatialOperator::new(mesh, k, flux, nl)?,
    })
}

fn initial_condition(cfg: &RunConfig) -> InitialCondition {
    match cfg.experiment {
        Experiment::DoubleSoliton => InitialCondition::DoubleSoliton { c1: cfg.c1, c2: cfg.c2, x1: cfg.x1, x2: cfg.x2 },
        Experiment::Gaussian => InitialCondition::GaussianPulse { amplitude: cfg.amplitude },
        _ => InitialCondition::SingleSoliton { x0: cfg.x0 },
    }
}

fn error_points(cfg: &RunConfig, k: usize) -> usize {
    cfg.error_points.unwrap_or(2 * k + 6)
}

/// Run the configured experiment, writing into `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<Summary> {
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("stage setup: creating output directory {}", cfg.output_dir.display()))?;
    match cfg.experiment {
        Experiment::Converge => converge(cfg),
        Experiment::ProjectStudy => project_study(cfg),
        _ => trajectory(cfg),
    }
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t}.csv")
}

fn trajectory(cfg: &RunConfig) -> Result<Summary> {
    let (k, theta, n) = (cfg.k[0], cfg.theta[0], cfg.n_list[0]);
    let mesh = Arc::new(Mesh1D::uniform(cfg.domain.0, cfg.domain.1, n).context("stage setup: mesh")?);
    let op = build_operator(cfg, mesh, k, theta).context("stage setup: operator")?;
    let ic = initial_condition(cfg);
    let traj = evolve(&op, |x| ic.eval(x), cfg.t_final, &cfg.stepper(), &cfg.snapshot_times).context("stage evolve")?;

    let stamp = cfg.stamp();
    let mut summary = Summary::new(cfg.experiment);
    for snap in &traj.snapshots {
        let path = cfg.output_dir.join(snapshot_name(snap.time));
        output::write_snapshot(&path, &stamp, snap).context("stage output: snapshot")?;
        summary.outputs.push(path);
    }
    let path = cfg.output_dir.join("charge.csv");
    output::write_charge_series(&path, &stamp, &traj.times, &traj.charges).context("stage output: charge series")?;
    summary.outputs.push(path);

    let drift = traj.max_relative_drift();
    summary.final_time = Some(traj.final_field.time);
    summary.steps = Some(traj.steps);
    summary.initial_charge = Some(traj.initial_charge());
    summary.max_relative_drift = Some(drift);
    summary.checks.push(CheckResult {
        name: "charge_drift".into(),
        value: drift,
        threshold: cfg.drift_tolerance,
        passed: drift <= cfg.drift_tolerance,
    });
    if let Some(exact) = ic.exact() {
        let e = l2_error_with(&traj.final_field, exact, traj.final_field.time, error_points(cfg, k))
            .context("stage diagnostics: L2 error")?;
        summary.final_l2_error = Some(e);
    }
    Ok(summary.finalize())
}

/// Soliton error of one convergence row.
fn convergence_row(cfg: &RunConfig, theta: f64, k: usize, n: usize) -> cldg_core::Result<f64> {
    let mesh = Arc::new(Mesh1D::uniform(cfg.domain.0, cfg.domain.1, n)?);
    let flux = FluxParam::new(theta)?;
    let nl = Nonlinearity::cubic(cfg.lambda);
    let op = match cfg.volume_points {
        Some(p) => SpatialOperator::with_quadrature(mesh, k, flux, nl, p)?,
        None => SpatialOperator::new(mesh, k, flux, nl)?,
    };
    let ic = InitialCondition::SingleSoliton { x0: cfg.x0 };
    let exact = ic.exact().expect("soliton has an exact solution");
    let traj = evolve(&op, |x| ic.eval(x), cfg.t_final, &cfg.stepper(), &[])?;
    l2_error_with(&traj.final_field, exact, cfg.t_final, error_points(cfg, k))
}

/// Every `(k, theta)` block of a convergence study; rows run concurrently.
pub fn convergence_records(cfg: &RunConfig) -> Vec<ConvergenceRecord> {
    let jobs: Vec<(usize, f64, usize)> = cfg
        .k
        .iter()
        .flat_map(|&k| cfg.theta.iter().flat_map(move |&t| cfg.n_list.iter().map(move |&n| (k, t, n))))
        .collect();
    let errors: Vec<cldg_core::Result<f64>> = jobs.par_iter().map(|&(k, t, n)| convergence_row(cfg, t, k, n)).collect();
    let length = cfg.domain.1 - cfg.domain.0;
    let mut records = Vec::with_capacity(jobs.len());
    let mut rows = jobs.iter().zip(errors).peekable();
    while let Some(&(&(k, theta, _), _)) = rows.peek() {
        let mut block = Vec::new();
        while let Some(((_, _, n), err)) = rows.next_if(|(&(kk, tt, _), _)| kk == k && tt == theta) {
            block.push((*n, length / *n as f64, err));
        }
        records.extend(build_records(theta, k, block));
    }
    records
}

fn converge(cfg: &RunConfig) -> Result<Summary> {
    let records = convergence_records(cfg);
    let stamp = cfg.stamp();
    let mut summary = Summary::new(cfg.experiment);
    let csv = cfg.output_dir.join("convergence.csv");
    output::write_convergence(&csv, &stamp, &records).context("stage output: convergence CSV")?;
    let txt = cfg.output_dir.join("convergence.txt");
    fs::write(&txt, format!("# cldg {stamp}\n{}", output::convergence_table(&records)))
        .with_context(|| format!("stage output: writing {}", txt.display()))?;
    summary.outputs.extend([csv, txt]);
    summary.final_time = Some(cfg.t_final);
    for r in &records {
        summary.rows.push(StudyRow {
            theta: r.theta,
            k: r.k,
            n_cells: r.n_cells,
            h: r.h,
            l2_error: r.l2_error.as_ref().ok().copied(),
            order: r.order,
            projection: None,
            error: r.l2_error.as_ref().err().map(|e| e.to_string()),
        });
    }
    summary.checks.push(CheckResult {
        name: "rows_completed".into(),
        value: records.iter().filter(|r| r.l2_error.is_ok()).count() as f64,
        threshold: records.len() as f64,
        passed: records.iter().all(|r| r.l2_error.is_ok()),
    });
    Ok(summary.finalize())
}

/// Projection study of `sin(2 pi (x - a) / (b - a))`, one CSV per projection kind.
fn project_study(cfg: &RunConfig) -> Result<Summary> {
    let (a, b) = cfg.domain;
    let u = move |x: f64| (2.0 * PI * (x - a) / (b - a)).sin();
    let stamp = cfg.stamp();
    let mut summary = Summary::new(cfg.experiment);
    for &kind in &cfg.projection {
        let mut rows: Vec<ProjectionStudyRow> = Vec::new();
        for &theta in &cfg.theta {
            for &k in &cfg.k {
                rows.extend(projection_order_study(u, kind, theta, k, cfg.domain, &cfg.n_list).context("stage study")?);
            }
        }
        let path = cfg.output_dir.join(format!("projection_study_{}.csv", projection_name(kind)));
        output::write_projection_study(&path, &stamp, &rows).context("stage output: projection study CSV")?;
        summary.outputs.push(path);
        for r in &rows {
            summary.rows.push(StudyRow {
                theta: r.theta,
                k: r.k,
                n_cells: r.n_cells,
                h: r.h,
                l2_error: r.l2_error.as_ref().ok().copied(),
                order: r.slope,
                projection: Some(projection_name(kind)),
                error: r.l2_error.as_ref().err().map(|e| e.to_string()),
            });
        }
        // theta = 1/2 is reported without an expectation
        for (&theta, &k) in cfg.theta.iter().flat_map(|t| cfg.k.iter().map(move |k| (t, k))) {
            if theta == 0.5 {
                continue;
            }
            let last = rows.iter().rfind(|r| r.theta == theta && r.k == k);
            let slope = last.and_then(|r| r.slope).unwrap_or(f64::NAN);
            summary.checks.push(CheckResult {
                name: format!("{}_slope_theta{theta}_k{k}", projection_name(kind)),
                value: slope,
                threshold: (k + 1) as f64 - 0.25,
                passed: (slope - (k + 1) as f64).abs() <= 0.25,
            });
        }
    }
    Ok(summary.finalize())
}

/// Output directory after the command-line override.
pub fn resolve_output(cfg: &mut RunConfig, out: Option<&Path>) {
    if let Some(dir) = out {
        cfg.output_dir = dir.to_path_buf();
    }
}
