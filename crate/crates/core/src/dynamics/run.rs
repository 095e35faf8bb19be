use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::imex::{step, Sources};
use super::{adapt_dt, Scheme, SchemeConfig, State};
use crate::diagnostics::{
    blowup_check, energy, lq_balance, monitors_at, monitors_update, z_residual, BlowupReport, EnergyBudget,
    TheoryMonitors,
};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::{data_bound_m, lambda1_bound, DataBoundM, InitialData, Lambda1, MaterialLaws};

/// Time-dependent body forces, evaluated at the scheme's stage time.
pub trait Forcing: Send + Sync {
    fn sources(&self, t: f64, grid: &Grid1D) -> Sources;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupSettings {
    /// Number of trailing samples used to fit the growth rate.
    pub window: usize,
    pub threshold: f64,
    /// Minimal growth rate per sample.
    pub rate_min: f64,
}

impl Default for BlowupSettings {
    fn default() -> Self {
        BlowupSettings {
            window: 20,
            threshold: 1e6,
            rate_min: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticSettings {
    /// Record a sample every `cadence` steps (the final step is always recorded).
    pub cadence: usize,
    /// Exponent of the `∫(Θ+1)^q` monitor.
    pub q: f64,
    /// Damping rate of the z-transform.
    pub kappa: f64,
    pub blowup: BlowupSettings,
    /// Keep a state snapshot for every sample.
    pub store_states: bool,
}

impl Default for DiagnosticSettings {
    fn default() -> Self {
        DiagnosticSettings {
            cadence: 10,
            q: 2.0,
            kappa: 1.0,
            blowup: BlowupSettings::default(),
            store_states: false,
        }
    }
}

/// Everything needed to integrate one trajectory.
#[derive(Clone)]
pub struct RunSpec {
    pub laws: MaterialLaws,
    pub a: f64,
    pub grid: Grid1D,
    pub data: InitialData,
    pub t_end: f64,
    pub scheme: SchemeConfig,
    pub diagnostics: DiagnosticSettings,
    pub forcing: Option<Arc<dyn Forcing>>,
    /// Reject laws that fail the growth and bound hypotheses.
    pub check_hypotheses: bool,
}

impl std::fmt::Debug for RunSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunSpec")
            .field("laws", &self.laws)
            .field("a", &self.a)
            .field("grid", &self.grid)
            .field("t_end", &self.t_end)
            .field("scheme", &self.scheme)
            .field("diagnostics", &self.diagnostics)
            .field("forced", &self.forcing.is_some())
            .finish()
    }
}

impl RunSpec {
    pub fn new(laws: MaterialLaws, a: f64, grid: Grid1D, data: InitialData, t_end: f64, scheme: SchemeConfig) -> Self {
        RunSpec {
            laws,
            a,
            grid,
            data,
            t_end,
            scheme,
            diagnostics: DiagnosticSettings::default(),
            forcing: None,
            check_hypotheses: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::config("a", format!("must be positive, got {}", self.a)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("T_end", format!("must be positive, got {}", self.t_end)));
        }
        if self.diagnostics.cadence == 0 {
            return Err(Error::config("cadence", "must be at least 1"));
        }
        if self.diagnostics.blowup.window < 2 {
            return Err(Error::config("blowup.window", "must be at least 2"));
        }
        self.scheme.validate()?;
        self.data
            .validate(&self.grid)
            .map_err(|e| Error::config("initial data", e.to_string()))?;
        if self.check_hypotheses {
            let xi_max = (2.0 * self.data.theta0.max()).max(10.0);
            let report = self.laws.validate_hypotheses(xi_max, 400);
            let first = report
                .failures()
                .next()
                .map(|c| format!("{}: {}", c.name, c.detail.as_deref().unwrap_or("failed")));
            if let Some(msg) = first {
                return Err(Error::config("laws", msg));
            }
        }
        Ok(())
    }
}

/// Diagnostics recorded at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// Size of the step that produced this sample (0 for the initial sample).
    pub dt: f64,
    pub energy: EnergyBudget,
    pub mass_theta: f64,
    pub min_theta: f64,
    pub monitors: TheoryMonitors,
    /// L² residual of the z-equation over the last step (0 for the initial sample).
    pub z_residual: f64,
    /// Cumulative number of clamped temperature values.
    pub clamp_count: usize,
    /// Right-hand side of the `∫(Θ+1)^q` balance, if `q > 1`.
    pub lq_rate: Option<f64>,
    /// Difference quotient of `∫(Θ+1)^q` since the previous sample.
    pub lq_fd_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Outcome {
    Completed,
    BlowupHalt { report: BlowupReport },
    Failed { cause: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub rejected_steps: usize,
    pub clamp_count: usize,
    /// Clamped values divided by `n · steps`.
    pub clamp_fraction: f64,
    pub e0: f64,
    pub max_abs_drift: f64,
    pub max_v2: f64,
    pub max_ux2: f64,
    pub max_theta_mass: f64,
    pub data_bound: DataBoundM,
    pub lambda1: Lambda1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub outcome: Outcome,
    pub samples: Vec<Sample>,
    /// Snapshots at sample times when requested, otherwise initial and last.
    pub states: Vec<State>,
    pub final_state: State,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        matches!(self.outcome, Outcome::Completed)
    }

    /// Relative ℓ² mismatch between the difference quotient of `∫(Θ+1)^q`
    /// and the balance right-hand side averaged over each sample interval.
    pub fn lq_consistency(&self) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for w in self.samples.windows(2) {
            let (Some(r0), Some(r1), Some(fd)) = (w[0].lq_rate, w[1].lq_rate, w[1].lq_fd_rate) else {
                continue;
            };
            let lhs = 0.5 * (r0 + r1);
            num += (fd - lhs).powi(2);
            den += lhs * lhs;
        }
        (den > 0.0).then(|| (num / den).sqrt())
    }

    pub fn max_z_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.z_residual).fold(0.0, f64::max)
    }

    pub fn w12_trace(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.monitors.w12_theta).collect()
    }
}

struct Recorder<'a> {
    spec: &'a RunSpec,
    samples: Vec<Sample>,
    states: Vec<State>,
    e0: f64,
    last_lq: Option<(f64, f64)>,
    max_abs_drift: f64,
    max_v2: f64,
    max_ux2: f64,
    max_theta_mass: f64,
}

impl Recorder<'_> {
    fn record(&mut self, prev: Option<&State>, state: &State, dt: f64, monitors: TheoryMonitors, clamps: usize) -> Result<()> {
        let spec = self.spec;
        let grid = &spec.grid;
        let q = spec.diagnostics.q;
        let budget = energy(state, spec.a, grid)?.relative_to(self.e0);
        let z = match prev {
            Some(p) => z_residual(p, state, &spec.laws, spec.a, spec.laws.gamma0, spec.diagnostics.kappa, grid)?.l2,
            None => 0.0,
        };
        let (lq_rate, lq_fd_rate) = if q > 1.0 {
            let rate = lq_balance(state, &spec.laws, q, grid)?.lhs_rate;
            let value = monitors.lq_value;
            let fd = self
                .last_lq
                .and_then(|(t0, v0)| (state.t > t0).then(|| (value - v0) / (state.t - t0)));
            self.last_lq = Some((state.t, value));
            (Some(rate), fd)
        } else {
            (None, None)
        };
        self.max_abs_drift = self.max_abs_drift.max(budget.drift.abs());
        self.max_v2 = self.max_v2.max(2.0 * budget.kinetic);
        self.max_ux2 = self.max_ux2.max(2.0 * budget.elastic / spec.a);
        self.max_theta_mass = self.max_theta_mass.max(budget.thermal);
        self.samples.push(Sample {
            t: state.t,
            dt,
            energy: budget,
            mass_theta: budget.thermal,
            min_theta: state.theta.min(),
            monitors,
            z_residual: z,
            clamp_count: clamps,
            lq_rate,
            lq_fd_rate,
        });
        if spec.diagnostics.store_states {
            self.states.push(state.clone());
        }
        Ok(())
    }
}

/// Integrates `spec` from 0 to `t_end`.
///
/// Invalid specifications are reported as errors. Step failures and blow-up
/// stop the integration and are reported through [`Trajectory::outcome`] with
/// everything recorded up to that point.
pub fn run(spec: &RunSpec) -> Result<Trajectory> {
    spec.validate()?;
    let grid = &spec.grid;
    let cfg = &spec.scheme;
    let diag = &spec.diagnostics;
    let mut state = State {
        t: 0.0,
        u: spec.data.u0.clone(),
        v: spec.data.v0.clone(),
        theta: spec.data.theta0.clone(),
    };
    let initial = state.clone();
    let e0 = energy(&state, spec.a, grid)?.total;
    let data_bound = data_bound_m(&spec.data, grid)?;
    let lambda1 = lambda1_bound(data_bound.m, spec.a, grid.length());

    let mut rec = Recorder {
        spec,
        samples: Vec::new(),
        states: Vec::new(),
        e0,
        last_lq: None,
        max_abs_drift: 0.0,
        max_v2: 0.0,
        max_ux2: 0.0,
        max_theta_mass: 0.0,
    };
    let mut monitors = monitors_at(&state, diag.q, grid)?;
    rec.record(None, &state, 0.0, monitors, 0)?;

    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut clamps = 0usize;
    let mut outcome = Outcome::Completed;
    let t_tol = 1e-12 * spec.t_end.max(1.0);

    while state.t < spec.t_end - t_tol {
        let mut dt = if cfg.adaptive {
            adapt_dt(&state, &spec.laws, spec.a, grid, cfg).min(if steps == 0 { cfg.dt_initial } else { f64::INFINITY })
        } else {
            cfg.dt_initial
        };
        let remaining = spec.t_end - state.t;
        if dt >= remaining * (1.0 - 1e-9) {
            dt = remaining;
        }
        let mut retries = 0u32;
        let result = loop {
            let sources = spec.forcing.as_ref().map(|f| {
                let stage = match cfg.scheme {
                    Scheme::ImexBe => state.t + dt,
                    Scheme::ImexCn => state.t + 0.5 * dt,
                };
                f.sources(stage, grid)
            });
            match step(&state, &spec.laws, spec.a, grid, cfg, dt, sources.as_ref()) {
                Err(Error::PositivityRejected { suggested_dt, .. }) if retries < cfg.max_retries => {
                    retries += 1;
                    rejected += 1;
                    dt = suggested_dt;
                }
                other => break other,
            }
        };
        let (mut next, clamped) = match result {
            Ok(r) => r,
            Err(e) => {
                outcome = Outcome::Failed { cause: e.to_string() };
                break;
            }
        };
        if (next.t - spec.t_end).abs() <= t_tol {
            next.t = spec.t_end;
        }
        steps += 1;
        clamps += clamped;
        // Left-rectangle rule: the increment uses the integrands at the start of the step.
        let advanced = monitors_update(&monitors, &state, dt, diag.q, spec.laws.alpha, grid)?;
        monitors = monitors_at(&next, diag.q, grid)?;
        monitors.cum_vx4 = advanced.cum_vx4;
        monitors.cum_theta_pow = advanced.cum_theta_pow;
        monitors.cum_thetaxx2 = advanced.cum_thetaxx2;
        monitors.cum_vxx2 = advanced.cum_vxx2;
        monitors.t = next.t;

        let last = next.t >= spec.t_end;
        if !monitors.is_finite() {
            rec.record(Some(&state), &next, dt, monitors, clamps)?;
            state = next;
            outcome = Outcome::Failed {
                cause: format!("non-finite monitors at t = {}", state.t),
            };
            break;
        }
        if steps.is_multiple_of(diag.cadence) || last {
            rec.record(Some(&state), &next, dt, monitors, clamps)?;
            let trace: Vec<f64> = rec.samples.iter().map(|s| s.monitors.w12_theta).collect();
            if trace.len() >= diag.blowup.window {
                let mut report = blowup_check(&trace, diag.blowup.window, diag.blowup.threshold, diag.blowup.rate_min);
                if report.fired {
                    report.t_fire = Some(next.t);
                    state = next;
                    outcome = Outcome::BlowupHalt { report };
                    break;
                }
            }
        }
        state = next;
    }

    let mut states = std::mem::take(&mut rec.states);
    if !diag.store_states {
        states = vec![initial];
        if steps > 0 {
            states.push(state.clone());
        }
    } else if rec.samples.last().map(|s| s.t) != Some(state.t) {
        states.push(state.clone());
    }
    let n = grid.n();
    Ok(Trajectory {
        outcome,
        stats: RunStats {
            steps,
            rejected_steps: rejected,
            clamp_count: clamps,
            clamp_fraction: if steps > 0 { clamps as f64 / (n * steps) as f64 } else { 0.0 },
            e0,
            max_abs_drift: rec.max_abs_drift,
            max_v2: rec.max_v2,
            max_ux2: rec.max_ux2,
            max_theta_mass: rec.max_theta_mass,
            data_bound,
            lambda1,
        },
        samples: rec.samples,
        states,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::model::{FFamily, GammaFamily, Regularity};
    use std::f64::consts::PI;

    fn grid() -> Grid1D {
        Grid1D::new(1.0, 33).unwrap()
    }

    fn spec(data: InitialData, laws: MaterialLaws, t_end: f64, dt: f64) -> RunSpec {
        RunSpec::new(laws, 1.0, grid(), data, t_end, SchemeConfig::fixed(Scheme::ImexBe, dt))
    }

    #[test]
    fn stationary_run_has_no_drift() {
        let g = grid();
        let data = InitialData {
            u0: Field::zeros(33),
            v0: Field::zeros(33),
            theta0: Field::constant(33, 1.0),
            regularity: Regularity::Smooth,
        };
        let laws = MaterialLaws::new(GammaFamily::Constant, FFamily::Zero, 1.0, 0.0, 1.0, 1.0);
        let traj = run(&spec(data, laws, 0.1, 1e-3)).unwrap();
        assert!(traj.completed());
        assert_eq!(traj.stats.steps, 100);
        assert_eq!(traj.final_state.t, 0.1);
        assert_eq!(traj.stats.max_abs_drift, 0.0);
        assert_eq!(traj.final_state.theta, Field::constant(g.n(), 1.0));
    }

    #[test]
    fn heat_eigenmode_decays() {
        let g = grid();
        let data = InitialData {
            u0: Field::zeros(33),
            v0: Field::zeros(33),
            theta0: Field::from_fn(&g, |x| 1.0 + (PI * x).cos()),
            regularity: Regularity::Smooth,
        };
        let laws = MaterialLaws::new(GammaFamily::Constant, FFamily::Zero, 1.0, 0.0, 1.0, 1.0);
        let traj = run(&spec(data, laws, 0.1, 1e-4)).unwrap();
        let decay = (-PI * PI * 0.1f64).exp();
        let err = traj
            .final_state
            .theta
            .iter()
            .enumerate()
            .map(|(i, th)| (th - 1.0 - decay * (PI * g.x(i)).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "err = {err}");
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        let data = InitialData {
            u0: Field::zeros(33),
            v0: Field::zeros(33),
            theta0: Field::constant(33, -1.0),
            regularity: Regularity::Smooth,
        };
        let laws = MaterialLaws::new(GammaFamily::Constant, FFamily::Zero, 1.0, 0.0, 1.0, 1.0);
        assert!(matches!(run(&spec(data, laws, 0.1, 1e-3)), Err(Error::Config { .. })));
    }
}
