use std::sync::Arc;

use cldg_core::basis::gauss_rule;
use cldg_core::exact::{gaussian_ic, soliton_exact, InitialCondition};
use cldg_core::stepper::discretize;
use cldg_core::{charge, l2_error, FluxParam, InitialData, Mesh1D, Nonlinearity, SpatialOperator};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Composite Gauss integral over `[a, b]` split into `pieces` panels.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let rule = gauss_rule(12).unwrap();
    let h = (b - a) / pieces as f64;
    (0..pieces).map(|i| rule.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &f)).sum()
}

#[test]
fn soliton_solves_the_pde() {
    // i u_t + u_xx + 2 |u|^2 u = 0 by central differences
    let mut rng = StdRng::seed_from_u64(31);
    let (dt, dx) = (1e-5, 1e-4);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..5.0);
        let x = rng.gen_range(-25.0..25.0);
        let u = |t: f64, x: f64| soliton_exact(t, x, 10.0);
        let ut = ((u(t + dt, x).0 - u(t - dt, x).0) / (2.0 * dt), (u(t + dt, x).1 - u(t - dt, x).1) / (2.0 * dt));
        let uxx = (
            (u(t, x + dx).0 - 2.0 * u(t, x).0 + u(t, x - dx).0) / (dx * dx),
            (u(t, x + dx).1 - 2.0 * u(t, x).1 + u(t, x - dx).1) / (dx * dx),
        );
        let (r, s) = u(t, x);
        let m = r * r + s * s;
        let re = -ut.1 + uxx.0 + 2.0 * m * r;
        let im = ut.0 + uxx.1 + 2.0 * m * s;
        assert!(re.abs() <= 1e-6 && im.abs() <= 1e-6, "t {t} x {x}: {re:e} {im:e}");
    }
}

#[test]
fn gaussian_charge_matches_closed_form() {
    for a in [0.5, 1.0, 2.0] {
        let q = integrate(|x| gaussian_ic(x, a).0.powi(2) + gaussian_ic(x, a).1.powi(2), -30.0, 30.0, 600);
        let want = a * a * (std::f64::consts::PI / 2.0).sqrt();
        assert!((q - want).abs() <= 1e-10, "{q} vs {want}");
    }
}

#[test]
fn soliton_line_charge_is_two() {
    let q = integrate(|x| {
        let (r, s) = soliton_exact(0.0, x, 10.0);
        r * r + s * s
    }, -25.0, 25.0, 1000);
    assert!((q - 2.0).abs() <= 1e-12, "{q}");
}

#[test]
fn discretized_soliton_charge() {
    let mesh = Arc::new(Mesh1D::uniform(-25.0, 25.0, 100).unwrap());
    let op = SpatialOperator::new(mesh, 2, FluxParam::new(1.0).unwrap(), Nonlinearity::cubic(2.0)).unwrap();
    let u = discretize(&op, |x| soliton_exact(0.0, x, 10.0), InitialData::L2Projection).unwrap();
    assert!((charge(&u) - 2.0).abs() / 2.0 <= 1e-4, "{}", charge(&u));
}

#[test]
fn projected_soliton_error_has_optimal_ratio() {
    let errs: Vec<f64> = [100, 200]
        .iter()
        .map(|&n| {
            let mesh = Arc::new(Mesh1D::uniform(-25.0, 25.0, n).unwrap());
            let op = SpatialOperator::new(mesh, 2, FluxParam::new(1.0).unwrap(), Nonlinearity::cubic(2.0)).unwrap();
            let u = discretize(&op, |x| soliton_exact(0.0, x, 10.0), InitialData::L2Projection).unwrap();
            l2_error(&u, |t, x| soliton_exact(t, x, 10.0), 0.0).unwrap()
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!((ratio / 8.0 - 1.0).abs() <= 0.2, "{ratio}");
}

#[test]
fn initial_condition_dispatch() {
    let ic = InitialCondition::GaussianPulse { amplitude: 2.0 };
    assert_eq!(ic.eval(0.0), (2.0, 0.0));
    assert!(ic.exact().is_none());
    let sol = InitialCondition::SingleSoliton { x0: 10.0 };
    let exact = sol.exact().unwrap();
    assert_eq!(exact(0.7, 1.3), soliton_exact(0.7, 1.3, 10.0));
}
