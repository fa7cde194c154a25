#![allow(dead_code)]

use std::sync::Arc;

use cldg_core::{Coefficients, DGField, FluxParam, Mesh1D, Nonlinearity, SpatialOperator};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Coefficients uniform in `[-1, 1]`.
pub fn random_coefficients(rng: &mut StdRng, n: usize, k: usize) -> Coefficients {
    let data = (0..n * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Coefficients::from_vec(n, k, data).unwrap()
}

pub fn random_field(rng: &mut StdRng, mesh: &Arc<Mesh1D>, k: usize) -> DGField {
    let n = mesh.n_cells();
    let r = random_coefficients(rng, n, k);
    let s = random_coefficients(rng, n, k);
    DGField::from_parts(mesh.clone(), r, s, 0.0).unwrap()
}

/// Nonuniform but quasi-uniform mesh of `[a, b]`.
pub fn jittered_mesh(rng: &mut StdRng, a: f64, b: f64, n: usize) -> Arc<Mesh1D> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.6..1.4)).collect();
    let total: f64 = w.iter().sum();
    let mut bounds = vec![a];
    let mut x = a;
    for wi in &w[..n - 1] {
        x += (b - a) * wi / total;
        bounds.push(x);
    }
    bounds.push(b);
    Arc::new(Mesh1D::from_boundaries(bounds).unwrap())
}

pub fn operator(mesh: &Arc<Mesh1D>, k: usize, theta: f64, lambda: f64) -> SpatialOperator {
    SpatialOperator::new(mesh.clone(), k, FluxParam::new(theta).unwrap(), Nonlinearity::cubic(lambda)).unwrap()
}

/// Gaussian elimination with partial pivoting; returns the solution and the
/// determinant.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> (Vec<f64>, f64) {
    let n = b.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if piv != col {
            a.swap(piv, col);
            b.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    (x, det)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
