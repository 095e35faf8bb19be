use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ConvergeConfig, ResolvedRun, RunConfig, SweepAxis, SweepConfig};
use super::output::{read_timeseries, write_final_state, write_json, write_timeseries, Quantity};
use crate::diagnostics::{estimate_k_with, fit_slope, theory_constants, BlowupReport, KSettings, TheoryConstants};
use crate::dynamics::{run, DiagnosticSettings, Outcome, SchemeConfig, Trajectory};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::scenarios::Tag;

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Ok,
    ConfigError,
    SolverFailure,
    BlowupHalt,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::ConfigError => 2,
            ExitStatus::SolverFailure => 3,
            ExitStatus::BlowupHalt => 4,
        }
    }

    pub fn of_outcome(outcome: &Outcome) -> Self {
        match outcome {
            Outcome::Completed => ExitStatus::Ok,
            Outcome::BlowupHalt { .. } => ExitStatus::BlowupHalt,
            Outcome::Failed { .. } => ExitStatus::SolverFailure,
        }
    }

    /// Configuration, parsing, file-system and missing-artifact errors map to
    /// the configuration code; everything else is a solver failure.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Config { .. } | Error::Io(_) | Error::MissingArtifact(_) | Error::Csv(_) | Error::Json(_) => {
                ExitStatus::ConfigError
            }
            _ => ExitStatus::SolverFailure,
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub status: ExitStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<BlowupReport>,
    pub parameters: BTreeMap<String, Quantity>,
    pub theory: BTreeMap<String, Quantity>,
    pub q_admissible: bool,
    /// Energy-based bounds next to the observed maxima.
    pub bounds: BTreeMap<String, Quantity>,
    pub energy: BTreeMap<String, Quantity>,
    pub run: BTreeMap<String, Quantity>,
    pub monitor_maxima: BTreeMap<String, Quantity>,
}

const ESTIMATE: &str = "estimate, not certified";

/// Maximal-regularity lower bound for `D = γ₀`, `p = 4` on the scenario's
/// interval, with the derived constants.
pub fn estimate_constants(r: &ResolvedRun, exec: Exec) -> Result<TheoryConstants> {
    let s = &r.scenario;
    let grid = crate::grid::Grid1D::new(s.length, s.n.clamp(33, 129))?;
    let settings = KSettings {
        p: 4.0,
        d: s.laws.gamma0,
        trials: r.k_trials,
        t_final: r.t0,
        steps: 400,
        seed: r.seed,
        ..KSettings::default()
    };
    let k = estimate_k_with(&settings, &grid, exec)?;
    theory_constants(k.k_est, s.a, r.t0, s.laws.alpha)
}

/// Result of one configured run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub status: ExitStatus,
    pub summary: Summary,
    pub trajectory: Trajectory,
    pub out_dir: PathBuf,
}

/// Runs a resolved configuration and writes `timeseries.csv`, `summary.json`
/// and `final_state.csv` into `out_dir` (created if missing).
pub fn execute_run(r: &ResolvedRun, out_dir: &Path, exec: Exec) -> Result<RunArtifacts> {
    fs::create_dir_all(out_dir)?;
    let s = &r.scenario;
    let diagnostics = DiagnosticSettings {
        cadence: r.cadence,
        q: r.q,
        kappa: r.kappa,
        blowup: r.blowup,
        store_states: false,
    };
    let spec = s.run_spec(diagnostics)?;
    let traj = run(&spec)?;
    let constants = estimate_constants(r, exec)?;
    write_timeseries(&out_dir.join("timeseries.csv"), &traj.samples)?;
    write_final_state(&out_dir.join("final_state.csv"), &traj.final_state, &spec.grid)?;
    let status = ExitStatus::of_outcome(&traj.outcome);
    let summary = summarize(r, &traj, &constants, status);
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(RunArtifacts {
        status,
        summary,
        trajectory: traj,
        out_dir: out_dir.to_path_buf(),
    })
}

fn summarize(r: &ResolvedRun, traj: &Trajectory, c: &TheoryConstants, status: ExitStatus) -> Summary {
    let s = &r.scenario;
    let l = &s.laws;
    let map = |items: Vec<(&str, Quantity)>| -> BTreeMap<String, Quantity> {
        items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    };
    let parameters = map(vec![
        ("gamma0", Quantity::configured(l.gamma0)),
        ("delta", Quantity::configured(l.delta)),
        ("K_f", Quantity::configured(l.k_f)),
        ("alpha", Quantity::configured(l.alpha)),
        ("a", Quantity::configured(s.a)),
        ("L", Quantity::configured(s.length)),
        ("n", Quantity::configured(s.n as f64)),
        ("T_end", Quantity::configured(s.t_end)),
        ("T0", Quantity::configured(r.t0)),
        ("kappa", Quantity::configured(r.kappa)),
        ("q", Quantity::configured(r.q)),
    ]);
    let theory = map(vec![
        ("K_est", Quantity::estimated(c.k_est, ESTIMATE)),
        ("delta_est", Quantity::estimated(c.delta_est, ESTIMATE)),
        ("kappa_est", Quantity::estimated(c.kappa_est, ESTIMATE)),
        ("q_from_alpha", Quantity::configured(c.q)),
    ]);
    let st = &traj.stats;
    let lam = &st.lambda1;
    let bounds = map(vec![
        ("M", Quantity::measured(st.data_bound.m)),
        ("B", Quantity::measured(lam.b)),
        ("bound_v2", Quantity::measured(lam.v2)),
        ("bound_ux2", Quantity::measured(lam.ux2)),
        ("bound_theta", Quantity::measured(lam.theta)),
        ("max_v2", Quantity::measured(st.max_v2)),
        ("max_ux2", Quantity::measured(st.max_ux2)),
        ("max_theta", Quantity::measured(st.max_theta_mass)),
        ("tolerance", Quantity::measured(st.max_abs_drift)),
    ]);
    let last = traj.samples.last();
    let e_final = last.map_or(st.e0, |x| x.energy.total);
    let energy = map(vec![
        ("E0", Quantity::measured(st.e0)),
        ("E_final", Quantity::measured(e_final)),
        ("max_abs_drift", Quantity::measured(st.max_abs_drift)),
        (
            "rel_drift",
            Quantity::measured(if st.e0 != 0.0 { (e_final - st.e0).abs() / st.e0.abs() } else { (e_final - st.e0).abs() }),
        ),
    ]);
    let mut run_items = vec![
        ("t_final", Quantity::measured(traj.final_state.t)),
        ("steps", Quantity::measured(st.steps as f64)),
        ("rejected_steps", Quantity::measured(st.rejected_steps as f64)),
        ("clamp_count", Quantity::measured(st.clamp_count as f64)),
        ("clamp_fraction", Quantity::measured(st.clamp_fraction)),
        ("max_z_residual", Quantity::measured(traj.max_z_residual())),
    ];
    if let Some(lq) = traj.lq_consistency() {
        run_items.push(("lq_consistency", Quantity::measured(lq)));
    }
    let run = map(run_items);
    let mut maxima: BTreeMap<String, f64> = BTreeMap::new();
    for sample in &traj.samples {
        let m = &sample.monitors;
        for (k, v) in [
            ("cum_vx4", m.cum_vx4),
            ("cum_theta_pow", m.cum_theta_pow),
            ("l2_thetax", m.l2_thetax),
            ("cum_thetaxx2", m.cum_thetaxx2),
            ("l2_vx", m.l2_vx),
            ("l2_uxx", m.l2_uxx),
            ("cum_vxx2", m.cum_vxx2),
            ("lq_value", m.lq_value),
            ("w12_theta", m.w12_theta),
        ] {
            let e = maxima.entry(k.to_string()).or_insert(f64::NEG_INFINITY);
            *e = e.max(v);
        }
    }
    let (cause, blowup) = match &traj.outcome {
        Outcome::Completed => (None, None),
        Outcome::BlowupHalt { report } => (None, Some(report.clone())),
        Outcome::Failed { cause } => (Some(cause.clone()), None),
    };
    Summary {
        scenario: s.name.clone(),
        status,
        cause,
        blowup,
        parameters,
        theory,
        q_admissible: c.q_admissible,
        bounds,
        energy,
        run,
        monitor_maxima: maxima.into_iter().map(|(k, v)| (k, Quantity::measured(v))).collect(),
    }
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Overrides shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct CommonArgs {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub exec: Exec,
}

fn out_dir(args: &CommonArgs, from_config: &Option<PathBuf>, base: &Path) -> PathBuf {
    match (&args.out, from_config) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) if o.is_relative() => base.join(o),
        (None, Some(o)) => o.clone(),
        (None, None) => PathBuf::from("out"),
    }
}

pub fn cmd_run(config: &Path, args: &CommonArgs) -> Result<RunArtifacts> {
    let mut c = RunConfig::from_toml(&read_config(config)?)?;
    if let Some(seed) = args.seed {
        c.seed = seed;
    }
    let base = base_dir(config);
    let resolved = c.resolve(&base)?;
    execute_run(&resolved, &out_dir(args, &c.out, &base), args.exec)
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis: String,
    pub value: f64,
    pub parameter: f64,
    pub status: ExitStatus,
    pub exit_code: i32,
    pub blowup: bool,
    pub monitors_finite: bool,
    pub t_final: f64,
    pub steps: usize,
    pub rel_drift: f64,
    pub cum_vx4: f64,
    pub cum_theta_pow: f64,
    pub l2_thetax: f64,
    pub cum_thetaxx2: f64,
    pub l2_vx: f64,
    pub l2_uxx: f64,
    pub cum_vxx2: f64,
    pub lq_value: f64,
    pub w12_theta: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub delta_est: Option<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Config status if any point was misconfigured, otherwise ok: individual
    /// solver outcomes are reported per row.
    pub fn status(&self) -> ExitStatus {
        if self.rows.iter().any(|r| r.status == ExitStatus::ConfigError) {
            ExitStatus::ConfigError
        } else {
            ExitStatus::Ok
        }
    }
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Delta => "delta",
        SweepAxis::Alpha => "alpha",
        SweepAxis::Kappa => "kappa",
        SweepAxis::N => "n",
        SweepAxis::Dt => "dt",
    }
}

pub fn run_sweep(sweep: &SweepConfig, base: &Path, out: &Path, exec: Exec) -> Result<SweepReport> {
    sweep.check()?;
    fs::create_dir_all(out)?;
    let resolved_base = sweep.base.resolve(base)?;
    let delta_est = match sweep.scale {
        super::config::SweepScale::DeltaEst => Some(estimate_constants(&resolved_base, exec)?.delta_est),
        super::config::SweepScale::Absolute => None,
    };
    let points: Vec<(usize, f64)> = sweep.values.iter().copied().enumerate().collect();
    let rows = par::map(exec, points, |(i, value)| {
        let dir = out.join(format!("point_{i:03}"));
        let outcome = sweep
            .point(value, delta_est)
            .and_then(|c| c.resolve(base))
            .and_then(|r| {
                let parameter = match sweep.axis {
                    SweepAxis::Delta => r.scenario.laws.delta,
                    SweepAxis::Alpha => r.scenario.laws.alpha,
                    SweepAxis::Kappa => r.kappa,
                    SweepAxis::N => r.scenario.n as f64,
                    SweepAxis::Dt => r.scenario.scheme.dt_max,
                };
                execute_run(&r, &dir, Exec::Sequential).map(|a| (parameter, a))
            });
        sweep_row(i, axis_name(sweep.axis), value, outcome)
    });
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let report = SweepReport {
        axis: sweep.axis,
        delta_est,
        rows,
    };
    write_json(&out.join("sweep.json"), &report)?;
    Ok(report)
}

fn sweep_row(index: usize, axis: &str, value: f64, outcome: Result<(f64, RunArtifacts)>) -> SweepRow {
    let mut row = SweepRow {
        index,
        axis: axis.into(),
        value,
        parameter: f64::NAN,
        status: ExitStatus::Ok,
        exit_code: 0,
        blowup: false,
        monitors_finite: false,
        t_final: 0.0,
        steps: 0,
        rel_drift: f64::NAN,
        cum_vx4: f64::NAN,
        cum_theta_pow: f64::NAN,
        l2_thetax: f64::NAN,
        cum_thetaxx2: f64::NAN,
        l2_vx: f64::NAN,
        l2_uxx: f64::NAN,
        cum_vxx2: f64::NAN,
        lq_value: f64::NAN,
        w12_theta: f64::NAN,
        error: String::new(),
    };
    match outcome {
        Err(e) => {
            row.status = ExitStatus::of_error(&e);
            row.exit_code = row.status.code();
            row.error = e.to_string();
        }
        Ok((parameter, a)) => {
            let t = &a.trajectory;
            row.parameter = parameter;
            row.status = a.status;
            row.exit_code = a.status.code();
            row.blowup = matches!(t.outcome, Outcome::BlowupHalt { .. });
            row.monitors_finite = t.samples.iter().all(|s| s.monitors.is_finite());
            row.t_final = t.final_state.t;
            row.steps = t.stats.steps;
            row.rel_drift = a.summary.energy["rel_drift"].value;
            if let Outcome::Failed { cause } = &t.outcome {
                row.error = cause.clone();
            }
            if let Some(m) = t.samples.last().map(|s| s.monitors) {
                row.cum_vx4 = m.cum_vx4;
                row.cum_theta_pow = m.cum_theta_pow;
                row.l2_thetax = m.l2_thetax;
                row.cum_thetaxx2 = m.cum_thetaxx2;
                row.l2_vx = m.l2_vx;
                row.l2_uxx = m.l2_uxx;
                row.cum_vxx2 = m.cum_vxx2;
                row.lq_value = m.lq_value;
                row.w12_theta = m.w12_theta;
            }
        }
    }
    row
}

pub fn cmd_sweep(config: &Path, args: &CommonArgs) -> Result<SweepReport> {
    let mut c = SweepConfig::from_toml(&read_config(config)?)?;
    if let Some(seed) = args.seed {
        c.base.seed = seed;
    }
    let base = base_dir(config);
    let out = out_dir(args, &c.base.out, &base);
    run_sweep(&c, &base, &out, args.exec)
}

/// Errors at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub err_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeReport {
    pub scenario: String,
    pub rows: Vec<ConvergeRow>,
    /// Fitted log-log slopes of the L∞ errors against dx; `None` where the
    /// errors vanish and the fit is degenerate.
    pub order_u: Option<f64>,
    pub order_v: Option<f64>,
    pub order_theta: Option<f64>,
    pub degenerate: bool,
    pub note: String,
}

fn order(dx: &[f64], err: &[f64]) -> Option<f64> {
    if err.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = dx.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let s = fit_slope(&xs, &ys);
    s.is_finite().then_some(s)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run_converge(c: &ConvergeConfig, base: &Path, out: &Path, require_mms: bool, exec: Exec) -> Result<ConvergeReport> {
    let probe = c.base.resolve(base)?;
    let tag = probe.scenario.tag;
    if require_mms && tag != Tag::Mms {
        return Err(Error::config("scenario", format!("{} is not a manufactured-solution scenario", probe.scenario.name)));
    }
    if !probe.scenario.has_exact_solution() {
        return Err(Error::config(
            "scenario",
            format!("{} has no exact solution to compare against", probe.scenario.name),
        ));
    }
    fs::create_dir_all(out)?;
    let levels: Vec<(usize, usize)> = c.n_values.iter().copied().enumerate().collect();
    let rows = par::map(exec, levels, |(i, n)| -> Result<ConvergeRow> {
        let mut cfg = c.base.clone();
        cfg.n = Some(n);
        let mut r = cfg.resolve(base)?;
        let dx = r.scenario.grid()?.dx();
        let dt = match &c.dt_values {
            Some(d) => d[i],
            None => c.dt_factor * dx * dx,
        };
        r.scenario.scheme = SchemeConfig {
            positivity_policy: r.scenario.scheme.positivity_policy,
            ..SchemeConfig::fixed(r.scenario.scheme.scheme, dt)
        };
        let spec = r.scenario.run_spec(DiagnosticSettings {
            cadence: usize::MAX,
            q: r.q,
            kappa: r.kappa,
            blowup: r.blowup,
            store_states: false,
        })?;
        let traj = run(&spec)?;
        if let Outcome::Failed { cause } = &traj.outcome {
            return Err(Error::StepFailed {
                t: traj.final_state.t,
                cause: cause.clone(),
            });
        }
        let exact = r
            .scenario
            .exact(traj.final_state.t)?
            .ok_or_else(|| Error::config("scenario", "no exact solution"))?;
        let f = &traj.final_state;
        Ok(ConvergeRow {
            n,
            dx,
            dt,
            err_u: linf(&f.u, &exact.u),
            err_v: linf(&f.v, &exact.v),
            err_theta: linf(&f.theta, &exact.theta),
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let col = |g: fn(&ConvergeRow) -> f64| rows.iter().map(g).collect::<Vec<f64>>();
    let order_u = order(&dx, &col(|r| r.err_u));
    let order_v = order(&dx, &col(|r| r.err_v));
    let order_theta = order(&dx, &col(|r| r.err_theta));
    let degenerate = order_u.is_none() || order_v.is_none() || order_theta.is_none();
    let note = if rows.iter().all(|r| r.err_u == 0.0 && r.err_v == 0.0 && r.err_theta == 0.0) {
        "errors vanish identically; order fit is degenerate".to_string()
    } else if degenerate {
        "some fields have vanishing errors; their order fit is degenerate".to_string()
    } else {
        String::new()
    };
    let mut w = csv::Writer::from_path(out.join("converge.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let report = ConvergeReport {
        scenario: probe.scenario.name,
        rows,
        order_u,
        order_v,
        order_theta,
        degenerate,
        note,
    };
    write_json(&out.join("orders.json"), &report)?;
    Ok(report)
}

pub fn cmd_converge(config: &Path, args: &CommonArgs, require_mms: bool) -> Result<ConvergeReport> {
    let c = ConvergeConfig::from_toml(&read_config(config)?)?;
    let base = base_dir(config);
    let out = out_dir(args, &c.base.out, &base);
    run_converge(&c, &base, &out, require_mms, args.exec)
}

fn require(dir: &Path, name: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    if p.is_file() {
        Ok(p)
    } else {
        Err(Error::MissingArtifact(format!("{name} not found")))
    }
}

fn fmt_q(q: Option<&Quantity>) -> String {
    q.map_or("n/a".into(), |q| format!("{:.6e}", q.value))
}

/// Markdown summary of a run directory; also written to `report.md`.
pub fn cmd_report(dir: &Path) -> Result<String> {
    let rows = read_timeseries(&require(dir, "timeseries.csv")?)?;
    let summary: Summary = serde_json::from_str(&fs::read_to_string(require(dir, "summary.json")?)?)?;
    let mut s = String::new();
    let _ = writeln!(s, "# Run report: {}\n", summary.scenario);
    let verdict = match (&summary.blowup, summary.status) {
        (Some(b), _) => format!(
            "blow-up detected at t = {} (growth rate {:.3} per sample)",
            b.t_fire.map_or("?".into(), |t| t.to_string()),
            b.growth_rate
        ),
        (None, ExitStatus::SolverFailure) => {
            format!("solver failure: {}", summary.cause.as_deref().unwrap_or("unknown"))
        }
        _ => "no blow-up".into(),
    };
    let _ = writeln!(s, "Status: {:?}. Verdict: {verdict}.\n", summary.status);

    let _ = writeln!(s, "## Energy budget\n");
    let _ = writeln!(s, "| t | E_kin | E_el | E_th | E_total | drift |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    let picks: Vec<&_> = match rows.len() {
        0 => vec![],
        1 => vec![&rows[0]],
        k => vec![&rows[0], &rows[k / 2], &rows[k - 1]],
    };
    for r in picks {
        let _ = writeln!(
            s,
            "| {:.4} | {:.6e} | {:.6e} | {:.6e} | {:.6e} | {:.3e} |",
            r.t, r.e_kin, r.e_el, r.e_th, r.e_total, r.drift
        );
    }
    let max_drift = rows.iter().map(|r| r.drift.abs()).fold(0.0, f64::max);
    let _ = writeln!(s, "\nMaximal |drift|: {max_drift:.3e}\n");

    let b = &summary.bounds;
    let _ = writeln!(s, "## Energy bounds vs. observed maxima\n");
    let _ = writeln!(s, "| quantity | bound | observed | within bound + drift |");
    let _ = writeln!(s, "|---|---|---|---|");
    let tol = b.get("tolerance").map_or(0.0, |q| q.value);
    for (name, bound, obs) in [
        ("∫v²", "bound_v2", "max_v2"),
        ("∫u_x²", "bound_ux2", "max_ux2"),
        ("∫Θ", "bound_theta", "max_theta"),
    ] {
        let ok = match (b.get(bound), b.get(obs)) {
            (Some(x), Some(y)) => if y.value <= x.value + tol { "yes" } else { "no" },
            _ => "n/a",
        };
        let _ = writeln!(s, "| {name} | {} | {} | {ok} |", fmt_q(b.get(bound)), fmt_q(b.get(obs)));
    }
    let _ = writeln!(s, "\nData bound M = {}, B = {}\n", fmt_q(b.get("M")), fmt_q(b.get("B")));

    let _ = writeln!(s, "## Monitor maxima\n");
    let _ = writeln!(s, "| monitor | max |");
    let _ = writeln!(s, "|---|---|");
    for (k, v) in &summary.monitor_maxima {
        let _ = writeln!(s, "| {k} | {:.6e} |", v.value);
    }

    let _ = writeln!(s, "\n## Derived constants\n");
    let _ = writeln!(s, "| constant | value | provenance |");
    let _ = writeln!(s, "|---|---|---|");
    for k in ["K_est", "delta_est", "kappa_est"] {
        if let Some(q) = summary.theory.get(k) {
            let _ = writeln!(
                s,
                "| {k} | {:.6e} | {:?} ({}) |",
                q.value,
                q.provenance,
                q.note.as_deref().unwrap_or("")
            );
        }
    }
    fs::write(dir.join("report.md"), &s)?;
    Ok(s)
}
