//! Time integration of the first-order system in (v, u, Θ) and of the
//! η-regularized triangular (v_η, u_η) system.
//!
//! Space: co-located second-order differences. The viscous flux uses
//! half-node mean coefficients, and the heating and coupling sources in the
//! Θ-equation are assembled from the same half-cell quantities so that the
//! semi-discrete system conserves `½Σv² + (a/2)Σ(Δu)²/dx + ΣΘ` exactly.
//!
//! Time: IMEX. Diffusion (viscous and thermal) is implicit through a
//! tridiagonal solve; the temperature-dependent coefficients and sources are
//! explicit.

mod eta;
mod imex;
mod run;

use serde::{Deserialize, Serialize};

pub use eta::{eta_cascade, step_eta, EtaCascadeReport, EtaProblem, EtaState};
pub use imex::{step, Sources};
pub use run::{run, BlowupSettings, DiagnosticSettings, Forcing, Outcome, RunSpec, RunStats, Sample, Trajectory};

use crate::error::{Error, Result};
use crate::grid::{BcKind, Field, Grid1D};
use crate::model::MaterialLaws;

/// Simulation snapshot; `v = u_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub theta: Field,
}

impl State {
    pub fn check(&self, grid: &Grid1D) -> Result<()> {
        grid.check(&self.u)?;
        grid.check(&self.v)?;
        grid.check(&self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.theta.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Backward Euler for the implicit part, first order.
    ImexBe,
    /// Crank–Nicolson with midpoint coefficients from a backward-Euler predictor.
    ImexCn,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::ImexBe => 1,
            Scheme::ImexCn => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityPolicy {
    /// Negative temperatures are set to zero and counted.
    ClampAndCount,
    /// A step producing `min Θ < −positivity_tolerance` is rejected and retried with dt/2.
    RejectStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt_initial: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    /// When false every step uses `dt_initial` (except the last, which lands on `T_end`).
    pub adaptive: bool,
    pub positivity_policy: PositivityPolicy,
    pub positivity_tolerance: f64,
    pub max_retries: u32,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            scheme: Scheme::ImexBe,
            dt_initial: 1e-4,
            dt_max: 1e-4,
            cfl_safety: 0.5,
            adaptive: true,
            positivity_policy: PositivityPolicy::ClampAndCount,
            positivity_tolerance: 1e-12,
            max_retries: 20,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_initial", self.dt_initial),
            ("dt_max", self.dt_max),
            ("positivity_tolerance", self.positivity_tolerance),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(name, format!("must be positive, got {value}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::config(
                "cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            ));
        }
        Ok(())
    }

    /// Fixed-step configuration.
    pub fn fixed(scheme: Scheme, dt: f64) -> Self {
        SchemeConfig {
            scheme,
            dt_initial: dt,
            dt_max: dt,
            adaptive: false,
            ..SchemeConfig::default()
        }
    }
}

/// Half-cell mean coefficients `c_{i+½} = (c_i + c_{i+1})/2`, length n − 1.
pub(crate) fn half_means(c: &[f64]) -> Vec<f64> {
    c.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Nodal heating `γ v_x²` assembled from half-cell dissipations
/// `c_{i+½}((w_{i+1} − w_i)/dx)²`: interior nodes average the two adjacent
/// cells, end nodes take their single cell.
pub(crate) fn heating(c_half: &[f64], w: &[f64], dx: f64) -> Vec<f64> {
    let n = w.len();
    let cell: Vec<f64> = (0..n - 1)
        .map(|i| c_half[i] * ((w[i + 1] - w[i]) / dx).powi(2))
        .collect();
    let mut out = vec![0.0; n];
    out[0] = cell[0];
    out[n - 1] = cell[n - 2];
    for j in 1..n - 1 {
        out[j] = 0.5 * (cell[j - 1] + cell[j]);
    }
    out
}

/// Nodal strain rate paired with the central difference of f(Θ) in the
/// v-equation: central in the interior, first-order one-sided at the ends.
pub(crate) fn paired_gradient(w: &[f64], dx: f64) -> Vec<f64> {
    let n = w.len();
    let mut g = vec![0.0; n];
    g[0] = (w[1] - w[0]) / dx;
    g[n - 1] = (w[n - 1] - w[n - 2]) / dx;
    for j in 1..n - 1 {
        g[j] = (w[j + 1] - w[j - 1]) / (2.0 * dx);
    }
    g
}

/// Semi-discrete right-hand side `(dv, du, dΘ)` of the (v, u, Θ) system.
pub fn rhs(state: &State, laws: &MaterialLaws, a: f64, grid: &Grid1D) -> Result<(Field, Field, Field)> {
    state.check(grid)?;
    if !(laws.gamma0 > 0.0) {
        return Err(Error::domain(format!("gamma0 must be positive, got {}", laws.gamma0)));
    }
    let n = grid.n();
    let dx = grid.dx();
    let c = laws.gamma_field(&state.theta);
    let f = laws.f_field(&state.theta);
    let mut dv = grid.div_flux(&c, &state.v)?;
    let uxx = grid.d2(&state.u, BcKind::DirichletBoth)?;
    let fx = grid.d1(&f)?;
    for i in 0..n {
        dv[i] += a * uxx[i] - fx[i];
    }
    dv[0] = 0.0;
    dv[n - 1] = 0.0;
    let mut du = state.v.clone();
    du[0] = 0.0;
    du[n - 1] = 0.0;
    let mut dtheta = grid.d2(&state.theta, BcKind::NeumannBoth)?;
    let heat = heating(&half_means(&c), &state.v, dx);
    let g = paired_gradient(&state.v, dx);
    for j in 0..n {
        dtheta[j] += heat[j] - f[j] * g[j];
    }
    Ok((dv, du, dtheta))
}

/// Step size from the velocity CFL bound and the explicit-term stiffness.
pub fn adapt_dt(state: &State, laws: &MaterialLaws, a: f64, grid: &Grid1D, cfg: &SchemeConfig) -> f64 {
    let vmax = state.v.max_abs();
    let cfl = cfg.cfl_safety * grid.dx() / vmax.max(1.0);
    let dx = grid.dx();
    let vx_max = state
        .v
        .windows(2)
        .fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs() / dx));
    let (mut fp, mut gp) = (0.0f64, 0.0f64);
    for &th in state.theta.iter() {
        fp = fp.max(laws.f_prime(th).abs());
        gp = gp.max(laws.gamma_prime(th).abs());
    }
    let elastic = if laws.gamma0 > 0.0 { a / laws.gamma0 } else { 0.0 };
    let lip = elastic.max((fp + gp * vx_max) * vx_max);
    let source = if lip > 0.0 { cfg.cfl_safety / lip } else { f64::INFINITY };
    let dt = cfg.dt_max.min(cfl).min(source);
    if dt > 0.0 {
        dt
    } else {
        f64::MIN_POSITIVE
    }
}
