use serde::{Deserialize, Serialize};

use super::{mollify, w12_distance, Scenario};
use crate::dynamics::{run, DiagnosticSettings, Outcome, SchemeConfig, State, Trajectory};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Distances between solutions started from consecutive mollification levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub eps: Vec<f64>,
    /// Sup over space and sampled times of `|u_i − u_{i+1}|`, one entry per consecutive pair.
    pub dist_u: Vec<f64>,
    pub dist_v: Vec<f64>,
    pub dist_theta: Vec<f64>,
    /// Sup over sampled times of the `W^{1,2}` distance between temperatures.
    pub dist_theta_w12: Vec<f64>,
    pub cauchy_u: bool,
    pub cauchy_v: bool,
    pub cauchy_theta: bool,
    pub blowup_fired: bool,
    /// First abort cause, if a run did not complete; the distances then cover
    /// only the leading completed runs.
    pub cause: Option<String>,
}

fn strictly_decreasing(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[1] < w[0])
}

fn sup_distance(a: &[State], b: &[State], field: impl Fn(&State) -> &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| field(x).iter().zip(field(y)).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Mollifies the scenario's data at each `eps`, integrates each to `T_end`
/// with the fixed step `dt`, and compares consecutive solutions.
pub fn eps_cascade(scenario: &Scenario, ladder: &[f64], dt: f64, cadence: usize, exec: Exec) -> Result<CascadeReport> {
    if ladder.is_empty() || ladder.iter().any(|&e| !(e > 0.0 && e < 1.0)) || !strictly_decreasing(ladder) {
        return Err(Error::domain("eps ladder must be strictly decreasing in (0, 1)"));
    }
    let grid = scenario.grid()?;
    let data = scenario.initial_data()?;
    let diagnostics = DiagnosticSettings {
        cadence,
        store_states: true,
        ..DiagnosticSettings::default()
    };
    let base = scenario.run_spec(diagnostics)?;
    let scheme = SchemeConfig {
        positivity_policy: scenario.scheme.positivity_policy,
        ..SchemeConfig::fixed(scenario.scheme.scheme, dt)
    };
    let runs: Vec<Result<Trajectory>> = par::map(exec, ladder.to_vec(), |eps| {
        let mut spec = base.clone();
        spec.data = mollify(&data, eps, &grid)?;
        spec.scheme = scheme;
        run(&spec)
    });

    let mut done = Vec::new();
    let mut cause = None;
    let mut blowup_fired = false;
    for (eps, r) in ladder.iter().zip(runs) {
        match r {
            Ok(t) => match &t.outcome {
                Outcome::Completed => done.push(t),
                Outcome::BlowupHalt { .. } => {
                    blowup_fired = true;
                    cause.get_or_insert(format!("blow-up detected at eps = {eps}"));
                    break;
                }
                Outcome::Failed { cause: c } => {
                    cause.get_or_insert(format!("eps = {eps}: {c}"));
                    break;
                }
            },
            Err(e) => {
                cause.get_or_insert(format!("eps = {eps}: {e}"));
                break;
            }
        }
    }

    let (mut dist_u, mut dist_v, mut dist_theta, mut dist_w12) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for w in done.windows(2) {
        let (a, b) = (&w[0].states, &w[1].states);
        dist_u.push(sup_distance(a, b, |s| &s.u));
        dist_v.push(sup_distance(a, b, |s| &s.v));
        dist_theta.push(sup_distance(a, b, |s| &s.theta));
        let mut w12: f64 = 0.0;
        for (x, y) in a.iter().zip(b) {
            w12 = w12.max(w12_distance(&x.theta, &y.theta, &grid)?);
        }
        dist_w12.push(w12);
    }
    Ok(CascadeReport {
        eps: ladder.to_vec(),
        cauchy_u: strictly_decreasing(&dist_u),
        cauchy_v: strictly_decreasing(&dist_v),
        cauchy_theta: strictly_decreasing(&dist_theta),
        dist_u,
        dist_v,
        dist_theta,
        dist_theta_w12: dist_w12,
        blowup_fired,
        cause,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::scenario_by_name;

    #[test]
    fn single_level_has_no_pairs() {
        let mut s = scenario_by_name("rough-corner").unwrap();
        s.n = 33;
        s.t_end = 0.01;
        let r = eps_cascade(&s, &[0.5], 1e-3, 1, Exec::Sequential).unwrap();
        assert!(r.dist_u.is_empty());
        assert!(r.cause.is_none());
    }

    #[test]
    fn band_limited_data_give_identical_runs() {
        let mut s = scenario_by_name("coupled").unwrap();
        s.n = 33;
        s.t_end = 0.02;
        let r = eps_cascade(&s, &[0.4, 0.2, 0.1], 1e-3, 5, Exec::Sequential).unwrap();
        for d in r.dist_u.iter().chain(&r.dist_v).chain(&r.dist_theta) {
            assert!(*d < 1e-12, "distance {d}");
        }
    }

    #[test]
    fn ladder_must_decrease() {
        let s = scenario_by_name("rough-corner").unwrap();
        assert!(eps_cascade(&s, &[0.1, 0.2], 1e-3, 1, Exec::Sequential).is_err());
        assert!(eps_cascade(&s, &[], 1e-3, 1, Exec::Sequential).is_err());
    }
}
