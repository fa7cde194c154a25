//! Conservative local discontinuous Galerkin (CLDG) solver for the
//! one-dimensional nonlinear Schrodinger equation
//!
//! ```text
//!     i u_t + u_xx + f(|u|^2) u = 0,   f(rho) = lambda * rho (cubic case)
//! ```
//!
//! on a periodic interval. The complex solution is split as `u = r + i s`
//! and the auxiliary derivatives `p = s_x`, `q = r_x` are eliminated
//! locally at every right-hand-side evaluation, leaving an ODE system for
//! the Legendre coefficients of `(r, s)`.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. File formats,
//! configuration, and the CLI live in the companion `cldg` crate.
//!
//! Module map:
//! - [`mesh`]: periodic 1D meshes and the reference-element map.
//! - [`basis`]: Legendre polynomials, Gauss-Legendre rules, mass tables.
//! - [`field`]: piecewise-polynomial coefficient storage, traces and norms.
//! - [`operator`]: generalized alternating fluxes, auxiliary recovery,
//!   the bilinear forms `B` and `H`, and the semidiscrete right-hand side.
//! - [`projection`]: Gauss-Radau and generalized (circulant-corrected)
//!   projections.
//! - [`stepper`]: implicit midpoint time stepping.
//! - [`exact`]: closed-form solutions and initial conditions.
//! - [`diagnostics`]: charge, entropy fluxes, L2 errors, convergence tables.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod field;
pub mod math;
pub mod mesh;
pub mod operator;
pub mod projection;
pub mod stepper;

pub use basis::{gauss_rule, legendre_eval, LegendreBasis, QuadratureRule};
pub use diagnostics::{charge, entropy_flux, l2_error, ConvergenceRecord};
pub use error::{Error, Result};
pub use field::{Coefficients, Component, DGField};
pub use mesh::Mesh1D;
pub use operator::{FluxParam, Nonlinearity, SpatialOperator};
pub use projection::{ProjectionKind, ProjectionSpec, RadauSide};
pub use stepper::{ImplicitMidpoint, InitialData, StepperConfig, Trajectory};
