//! CSV and text-table writers. Every CSV starts with a `#` line carrying the
//! resolved configuration; floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use cldg_core::projection::ProjectionStudyRow;
use cldg_core::{ConvergenceRecord, DGField};

/// Round-trip representation of an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path, stamp: &str) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# cldg {stamp}")?;
    Ok(out)
}

fn finish(w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    let mut inner = w.into_inner().map_err(|e| anyhow::anyhow!("flushing {}: {}", path.display(), e.error()))?;
    inner.flush().with_context(|| format!("writing {}", path.display()))
}

/// `x, r, s, abs` at `k + 2` equispaced points per cell, endpoints included,
/// so both one-sided traces of every interface appear.
pub fn write_snapshot(path: &Path, stamp: &str, field: &DGField) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path, &format!("{stamp} t={}", field.time))?);
    w.write_record(["x", "r", "s", "abs"])?;
    let mesh = field.mesh();
    let points = field.degree() + 2;
    for j in 0..field.n_cells() {
        for i in 0..points {
            let xi = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            let x = mesh.map_from_reference(j, xi);
            let r = field.r.eval_unchecked(j, xi);
            let s = field.s.eval_unchecked(j, xi);
            w.write_record([num(x), num(r), num(s), num(r.hypot(s))])?;
        }
    }
    finish(w, path)
}

/// `t, charge, drift, relative_drift` with drift measured from the first entry.
pub fn write_charge_series(path: &Path, stamp: &str, times: &[f64], charges: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path, stamp)?);
    w.write_record(["t", "charge", "drift", "relative_drift"])?;
    let q0 = charges.first().copied().unwrap_or(0.0);
    for (t, q) in times.iter().zip(charges) {
        w.write_record([num(*t), num(*q), num(q - q0), num((q - q0) / q0)])?;
    }
    finish(w, path)
}

/// `theta, k, N, h, l2_error, order`; failed rows leave `l2_error` empty and
/// are explained in trailing comment lines.
pub fn write_convergence(path: &Path, stamp: &str, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path, stamp)?);
    w.write_record(["theta", "k", "N", "h", "l2_error", "order"])?;
    for r in records {
        let err = r.l2_error.as_ref().map(|e| num(*e)).unwrap_or_default();
        let order = r.order.map(num).unwrap_or_default();
        w.write_record([r.theta.to_string(), r.k.to_string(), r.n_cells.to_string(), num(r.h), err, order])?;
    }
    let mut inner = w.into_inner().map_err(|e| anyhow::anyhow!("flushing {}: {}", path.display(), e.error()))?;
    for r in records {
        if let Err(e) = &r.l2_error {
            writeln!(inner, "# failed: theta={} k={} N={}: {e}", r.theta, r.k, r.n_cells)?;
        }
    }
    inner.flush().with_context(|| format!("writing {}", path.display()))
}

/// Aligned table with one block per `(k, theta)`: `N, L2-error, Order`.
pub fn convergence_table(records: &[ConvergenceRecord]) -> String {
    let mut out = String::new();
    let mut block: Option<(usize, f64)> = None;
    let rule = "-".repeat(46);
    writeln!(out, "{rule}").unwrap();
    writeln!(out, "{:>4} {:>6} {:>6} {:>14} {:>10}", "k", "theta", "N", "L2-error", "Order").unwrap();
    for r in records {
        if block != Some((r.k, r.theta)) {
            writeln!(out, "{rule}").unwrap();
            block = Some((r.k, r.theta));
        }
        let err = match &r.l2_error {
            Ok(e) => format!("{e:.2E}"),
            Err(_) => "failed".to_string(),
        };
        let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
        writeln!(out, "{:>4} {:>6} {:>6} {:>14} {:>10}", r.k, r.theta, r.n_cells, err, order).unwrap();
    }
    writeln!(out, "{rule}").unwrap();
    out
}

/// `theta, k, N, h, l2_error, slope`.
pub fn write_projection_study(path: &Path, stamp: &str, rows: &[ProjectionStudyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path, stamp)?);
    w.write_record(["theta", "k", "N", "h", "l2_error", "slope"])?;
    for r in rows {
        let err = r.l2_error.as_ref().map(|e| num(*e)).unwrap_or_default();
        let slope = r.slope.map(num).unwrap_or_default();
        w.write_record([r.theta.to_string(), r.k.to_string(), r.n_cells.to_string(), num(r.h), err, slope])?;
    }
    let mut inner = w.into_inner().map_err(|e| anyhow::anyhow!("flushing {}: {}", path.display(), e.error()))?;
    for r in rows {
        if let Err(e) = &r.l2_error {
            writeln!(inner, "# failed: theta={} k={} N={}: {e}", r.theta, r.k, r.n_cells)?;
        }
    }
    inner.flush().with_context(|| format!("writing {}", path.display()))
}
