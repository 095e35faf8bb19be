//! One-dimensional thermoviscoelastic simulator for Kelvin–Voigt materials
//! with temperature-dependent viscosity.
//!
//! The solver integrates
//!
//! ```text
//! v_t = (γ(Θ) v_x)_x + a u_xx − (f(Θ))_x,   u_t = v,
//! Θ_t = Θ_xx + γ(Θ) v_x² − f(Θ) v_x,
//! u = v = 0, Θ_x = 0 on the boundary of (0, L),
//! ```
//!
//! and evaluates a set of trajectory diagnostics around it: the energy
//! budget, the Lq balance of the temperature, the damped-antiderivative
//! (z-transform) residual, a numerical lower bound for the maximal-regularity
//! constant of the mixed heat problem, and a blow-up detector based on the
//! W^{1,2} norm of Θ.
//!
//! Module map:
//! - [`model`]: material-law families, hypothesis checks, initial-data bounds.
//! - [`grid`]: uniform mesh, difference operators, quadrature, reflection.
//! - [`dynamics`]: IMEX stepping, adaptive dt, runs, η-regularized system.
//! - [`diagnostics`]: energy, Lq balance, z-transform, monitors, K estimation.
//! - [`scenarios`]: initial-data generators, mollification, MMS, battery.
//! - [`cli`]: run configuration, sweeps, convergence studies, reports.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod model;
pub mod par;
pub mod scenarios;
mod tridiag;

pub use error::{Error, Result};
pub use grid::{BcKind, Field, Grid1D};
pub use model::{FFamily, GammaFamily, InitialData, MaterialLaws};
