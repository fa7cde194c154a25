//! Periodic partitions of an interval.
//!
//! Cell `j` spans `[x_{j-1/2}, x_{j+1/2}] = [boundaries[j], boundaries[j+1]]`.
//! Interface `i` is the right face of cell `i`; it joins cell `i` (minus
//! side) to cell `(i + 1) mod N` (plus side), so interface `N - 1` wraps
//! around to cell 0.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

static NEXT_MESH_ID: AtomicUsize = AtomicUsize::new(1);

/// Identity token of a constructed mesh. Clones share the token; two
/// independently built meshes never do, even with equal geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeshId(usize);

#[derive(Debug, Clone)]
pub struct Mesh1D {
    id: MeshId,
    a: f64,
    b: f64,
    boundaries: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
    h: f64,
    gamma: f64,
}

impl Mesh1D {
    /// Uniform mesh of `n_cells` cells on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidMesh("at least two cells are required"));
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidMesh("interval must satisfy a < b"));
        }
        let len = b - a;
        let n = n_cells as f64;
        let mut boundaries: Vec<f64> = (0..=n_cells).map(|i| a + len * (i as f64) / n).collect();
        boundaries[n_cells] = b;
        let h = len / n;
        let centers = boundaries.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            id: fresh_id(),
            a,
            b,
            boundaries,
            centers,
            widths: alloc::vec![h; n_cells],
            h,
            gamma: 1.0,
        })
    }

    /// Mesh from explicit, strictly increasing boundaries (quasi-uniform
    /// meshes are allowed; the ratio `min h_j / max h_j` is recorded).
    pub fn from_boundaries(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 3 {
            return Err(Error::InvalidMesh("at least two cells are required"));
        }
        if boundaries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("boundaries must be finite"));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("boundaries must be strictly increasing"));
        }
        let widths: Vec<f64> = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        let centers = boundaries.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let h = widths.iter().copied().fold(0.0, f64::max);
        let h_min = widths.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            id: fresh_id(),
            a: boundaries[0],
            b: *boundaries.last().unwrap(),
            boundaries,
            centers,
            widths,
            h,
            gamma: h_min / h,
        })
    }

    pub fn id(&self) -> MeshId {
        self.id
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn n_cells(&self) -> usize {
        self.widths.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.widths[cell]
    }

    pub fn center(&self, cell: usize) -> f64 {
        self.centers[cell]
    }

    /// Largest cell width.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Quasi-uniformity ratio `min_j h_j / h`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(x_{j-1/2}, x_{j+1/2})`.
    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        (self.boundaries[cell], self.boundaries[cell + 1])
    }

    #[inline]
    pub fn right_neighbor(&self, cell: usize) -> usize {
        let n = self.n_cells();
        if cell + 1 == n {
            0
        } else {
            cell + 1
        }
    }

    #[inline]
    pub fn left_neighbor(&self, cell: usize) -> usize {
        if cell == 0 {
            self.n_cells() - 1
        } else {
            cell - 1
        }
    }

    /// `xi = 2 (x - x_j) / h_j`, clamped to `[-1, 1]` after a 4-ulp
    /// containment check.
    pub fn map_to_reference(&self, cell: usize, x: f64) -> Result<f64> {
        self.check_cell(cell)?;
        let (left, right) = self.cell_bounds(cell);
        let slack = 4.0 * ulp(left.abs().max(right.abs()));
        if !(x >= left - slack && x <= right + slack) {
            return Err(Error::OutsideCell { cell, x });
        }
        let xi = 2.0 * (x - self.centers[cell]) / self.widths[cell];
        Ok(xi.clamp(-1.0, 1.0))
    }

    /// Inverse of [`map_to_reference`](Self::map_to_reference).
    pub fn map_from_reference(&self, cell: usize, xi: f64) -> f64 {
        self.centers[cell] + 0.5 * self.widths[cell] * xi
    }

    /// Index of the cell containing `x` (the left one on an interface).
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.a && x <= self.b) {
            return None;
        }
        let idx = self.boundaries.partition_point(|&bd| bd < x);
        Some(idx.saturating_sub(1).min(self.n_cells() - 1))
    }

    pub(crate) fn check_cell(&self, cell: usize) -> Result<()> {
        if cell >= self.n_cells() {
            Err(Error::CellIndex { cell, n_cells: self.n_cells() })
        } else {
            Ok(())
        }
    }
}

fn fresh_id() -> MeshId {
    MeshId(NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed))
}

/// Unit in the last place of `x` (for finite, normal `x`).
pub(crate) fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return f64::MIN_POSITIVE;
    }
    let bits = x.to_bits();
    f64::from_bits(bits + 1) - x
}
