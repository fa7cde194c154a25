mod common;

use std::sync::Arc;

use cldg_core::exact::soliton_exact;
use cldg_core::stepper::{discretize, evolve, step, step_by};
use cldg_core::{charge, l2_error, Coefficients, DGField, Error, ImplicitMidpoint, InitialData, Mesh1D, StepperConfig};
use common::*;

fn soliton_setup(n: usize, k: usize, theta: f64) -> (cldg_core::SpatialOperator, DGField) {
    let mesh = Arc::new(Mesh1D::uniform(-25.0, 25.0, n).unwrap());
    let op = operator(&mesh, k, theta, 2.0);
    let u = discretize(&op, |x| soliton_exact(0.0, x, 10.0), InitialData::L2Projection).unwrap();
    (op, u)
}

#[test]
fn zero_field_stays_zero() {
    let mesh = Arc::new(Mesh1D::uniform(0.0, 1.0, 5).unwrap());
    let op = operator(&mesh, 2, 0.5, 2.0);
    let out = step(&op, &DGField::zeros(mesh, 2), &StepperConfig::new(0.1).unwrap()).unwrap();
    assert_eq!(out.r.max_abs() + out.s.max_abs(), 0.0);
    assert!((out.time - 0.1).abs() < 1e-15);
}

/// Cell-0 mean of a constant field evolved to `t_final`.
fn constant_run(c: (f64, f64), tau: f64, t_final: f64) -> (f64, f64) {
    // wide cells keep the fixed-point iteration contractive at large tau
    let mesh = Arc::new(Mesh1D::uniform(0.0, 40.0, 4).unwrap());
    let op = operator(&mesh, 2, 0.7, 2.0);
    let traj = evolve(&op, |_| c, t_final, &StepperConfig::new(tau).unwrap(), &[]).unwrap();
    let f = traj.final_field;
    (f.r.cell(0)[0], f.s.cell(0)[0])
}

#[test]
fn constant_field_rotates_with_second_order_phase_error() {
    let (c1, c2, lambda) = (0.6_f64, 0.5_f64, 2.0_f64);
    let mod2 = c1 * c1 + c2 * c2;
    let t_final = 1.0;
    let w = lambda * mod2 * t_final;
    let exact = (c1 * w.cos() - c2 * w.sin(), c1 * w.sin() + c2 * w.cos());
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&tau| {
            let (r, s) = constant_run((c1, c2), tau, t_final);
            assert!(((r * r + s * s) - mod2).abs() < 1e-12);
            ((r - exact.0).powi(2) + (s - exact.1).powi(2)).sqrt()
        })
        .collect();
    for pair in errs.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((ratio - 4.0).abs() <= 0.6, "errors {errs:?}");
    }
}

#[test]
fn one_step_keeps_modulus_of_constant_field() {
    let mesh = Arc::new(Mesh1D::uniform(0.0, 1.0, 3).unwrap());
    let op = operator(&mesh, 1, 1.0, 2.0);
    let u = DGField::from_parts(mesh, Coefficients::constant(3, 1, 0.3), Coefficients::constant(3, 1, -0.9), 0.0).unwrap();
    let v = step(&op, &u, &StepperConfig::new(0.05).unwrap()).unwrap();
    let m = v.r.cell(1)[0].powi(2) + v.s.cell(1)[0].powi(2);
    assert!((m.sqrt() - (0.09f64 + 0.81).sqrt()).abs() < 1e-12);
}

#[test]
fn midpoint_is_time_reversible() {
    for theta in [0.3, 1.0] {
        let (op, u) = soliton_setup(100, 2, theta);
        let cfg = StepperConfig::new(1e-3).unwrap();
        let fwd = step(&op, &u, &cfg).unwrap();
        let back = step_by(&op, &fwd, -cfg.tau, &cfg).unwrap();
        let diff = max_abs_diff(back.r.as_slice(), u.r.as_slice()).max(max_abs_diff(back.s.as_slice(), u.s.as_slice()));
        assert!(diff <= 100.0 * cfg.fp_tolerance, "theta {theta}: {diff:e}");
        assert!(back.time.abs() < 1e-15);
    }
}

#[test]
fn charge_is_kept_by_one_step() {
    let (op, u) = soliton_setup(100, 2, 0.6);
    let v = step(&op, &u, &StepperConfig::new(1e-3).unwrap()).unwrap();
    let q0 = charge(&u);
    assert!((charge(&v) - q0).abs() <= 1e-11 * q0);
}

#[test]
fn final_time_equal_to_tau_takes_one_step() {
    let (op, _) = soliton_setup(40, 1, 1.0);
    let traj = evolve(&op, |x| soliton_exact(0.0, x, 10.0), 1e-3, &StepperConfig::new(1e-3).unwrap(), &[]).unwrap();
    assert_eq!(traj.steps, 1);
    assert_eq!(traj.final_field.time, 1e-3);
}

#[test]
fn snapshots_land_on_requested_times() {
    let (op, _) = soliton_setup(40, 1, 1.0);
    let cfg = StepperConfig::new(0.01).unwrap();
    let traj = evolve(&op, |x| soliton_exact(0.0, x, 10.0), 0.05, &cfg, &[0.0, 0.025, 0.05]).unwrap();
    let times: Vec<f64> = traj.snapshots.iter().map(|f| f.time).collect();
    assert_eq!(times, vec![0.0, 0.025, 0.05]);
    // 0.01 0.02 0.025 0.035 0.045 0.05
    assert_eq!(traj.steps, 6);
    assert_eq!(traj.times.len(), 7);
}

#[test]
fn linear_constant_data_does_not_move() {
    let mesh = Arc::new(Mesh1D::uniform(0.0, 60.0, 6).unwrap());
    let op = operator(&mesh, 3, 0.25, 0.0);
    let traj = evolve(&op, |_| (0.4, -0.2), 1.0, &StepperConfig::new(0.1).unwrap(), &[]).unwrap();
    let f = traj.final_field;
    for j in 0..6 {
        assert!((f.modulus(j, 0.3) - (0.2f64).sqrt()).abs() < 1e-14);
        assert!((f.r.cell(j)[0] - 0.4).abs() < 1e-14 && (f.s.cell(j)[0] + 0.2).abs() < 1e-14);
    }
}

#[test]
fn charge_drift_is_bounded_by_solver_tolerance() {
    let (op, _) = soliton_setup(100, 2, 0.5);
    let cfg = StepperConfig::new(1e-3).unwrap();
    let traj = evolve(&op, |x| soliton_exact(0.0, x, 10.0), 0.2, &cfg, &[]).unwrap();
    let bound = traj.steps as f64 * 10.0 * cfg.fp_tolerance;
    assert!(traj.max_relative_drift() <= bound, "{:e} > {bound:e}", traj.max_relative_drift());
}

#[test]
fn second_order_in_time() {
    let (op, u) = soliton_setup(50, 2, 1.0);
    let t_final = 0.2;
    let run = |tau: f64| {
        let traj = cldg_core::stepper::evolve_field(&op, u.clone(), t_final, &StepperConfig::new(tau).unwrap(), &[]).unwrap();
        traj.final_field
    };
    let fields: Vec<DGField> = [2e-3, 1e-3, 5e-4].iter().map(|&t| run(t)).collect();
    // Richardson reference from the two finest runs
    let mut reference = fields[2].clone();
    reference.r.scale(4.0 / 3.0);
    reference.s.scale(4.0 / 3.0);
    reference.r.axpy(-1.0 / 3.0, &fields[1].r);
    reference.s.axpy(-1.0 / 3.0, &fields[1].s);
    let dist = |f: &DGField| {
        let mut d = f.clone();
        d.r.axpy(-1.0, &reference.r);
        d.s.axpy(-1.0, &reference.s);
        charge(&d).sqrt()
    };
    let ratio = dist(&fields[0]) / dist(&fields[1]);
    assert!((ratio - 4.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn soliton_error_stays_at_projection_level() {
    let (op, u) = soliton_setup(100, 2, 1.0);
    let e0 = l2_error(&u, |t, x| soliton_exact(t, x, 10.0), 0.0).unwrap();
    let traj = cldg_core::stepper::evolve_field(&op, u, 0.1, &StepperConfig::new(1e-3).unwrap(), &[]).unwrap();
    let e = l2_error(&traj.final_field, |t, x| soliton_exact(t, x, 10.0), 0.1).unwrap();
    assert!(e < 3.0 * e0, "{e} vs initial {e0}");
}

#[test]
fn oversized_step_fails_and_restores_the_field() {
    let (op, u) = soliton_setup(100, 2, 1.0);
    let mut cfg = StepperConfig::new(1.0).unwrap();
    cfg.max_iterations = 5;
    let mut stepper = ImplicitMidpoint::new(&op, cfg).unwrap();
    let mut field = u.clone();
    let err = stepper.advance(&mut field, 1.0).unwrap_err();
    assert!(matches!(err, Error::NonConvergence { iterations: 5, .. } | Error::NonFinite { .. }), "{err:?}");
    if let Error::NonConvergence { .. } = err {
        assert_eq!(field.r, u.r);
    }
}

#[test]
fn evolve_reports_failing_step() {
    let (op, _) = soliton_setup(100, 2, 1.0);
    let mut cfg = StepperConfig::new(0.5).unwrap();
    cfg.max_iterations = 3;
    match evolve(&op, |x| soliton_exact(0.0, x, 10.0), 1.0, &cfg, &[]) {
        Err(Error::StepFailed { step, time, .. }) => assert_eq!((step, time), (1, 0.0)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn config_validation() {
    assert!(matches!(StepperConfig::new(0.0), Err(Error::InvalidParameter { name: "tau", .. })));
    assert!(StepperConfig::new(-1.0).is_err());
    let mut cfg = StepperConfig::new(0.1).unwrap();
    cfg.fp_tolerance = 0.0;
    assert!(cfg.validate().is_err());
}
