use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::Result;
use crate::grid::{BcKind, Grid1D};

/// Instantaneous and time-accumulated functionals of a trajectory.
///
/// Cumulative fields (`cum_*`) use the left-rectangle rule in time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoryMonitors {
    pub t: f64,
    /// `∫₀ᵗ∫v_x⁴`
    pub cum_vx4: f64,
    /// `∫₀ᵗ∫(Θ+1)^{4α}`
    pub cum_theta_pow: f64,
    /// `∫Θ_x²`
    pub l2_thetax: f64,
    /// `∫₀ᵗ∫Θ_xx²`
    pub cum_thetaxx2: f64,
    /// `∫v_x²`
    pub l2_vx: f64,
    /// `∫u_xx²`
    pub l2_uxx: f64,
    /// `∫₀ᵗ∫v_xx²`
    pub cum_vxx2: f64,
    /// `∫(Θ+1)^q`
    pub lq_value: f64,
    /// `‖Θ‖_{W^{1,2}}`
    pub w12_theta: f64,
}

impl TheoryMonitors {
    pub fn is_finite(&self) -> bool {
        [
            self.cum_vx4,
            self.cum_theta_pow,
            self.l2_thetax,
            self.cum_thetaxx2,
            self.l2_vx,
            self.l2_uxx,
            self.cum_vxx2,
            self.lq_value,
            self.w12_theta,
        ]
        .iter()
        .all(|x| x.is_finite())
    }

    /// Instantaneous fields only; cumulative fields are left untouched.
    fn observe(&mut self, state: &State, q: f64, grid: &Grid1D) -> Result<[f64; 4]> {
        let vx = grid.d1(&state.v)?;
        let vxx = grid.d2(&state.v, BcKind::DirichletBoth)?;
        let uxx = grid.d2(&state.u, BcKind::DirichletBoth)?;
        let thx = grid.d1(&state.theta)?;
        let thxx = grid.d2(&state.theta, BcKind::NeumannBoth)?;
        self.t = state.t;
        self.l2_thetax = grid.trapezoid_map(&thx, |x| x * x);
        self.l2_vx = grid.trapezoid_map(&vx, |x| x * x);
        self.l2_uxx = grid.trapezoid_map(&uxx, |x| x * x);
        self.lq_value = grid.trapezoid_map(&state.theta, |th| (th.max(0.0) + 1.0).powf(q));
        self.w12_theta = (grid.trapezoid_map(&state.theta, |x| x * x) + self.l2_thetax).sqrt();
        Ok([
            grid.trapezoid_map(&vx, |x| x.powi(4)),
            0.0,
            grid.trapezoid_map(&thxx, |x| x * x),
            grid.trapezoid_map(&vxx, |x| x * x),
        ])
    }
}

/// Refreshes the instantaneous monitors from `state` and advances the
/// cumulative ones by `dt` times the integrands at `state`.
pub fn monitors_update(
    prev: &TheoryMonitors,
    state: &State,
    dt: f64,
    q: f64,
    alpha: f64,
    grid: &Grid1D,
) -> Result<TheoryMonitors> {
    state.check(grid)?;
    let mut m = *prev;
    let [vx4, _, thxx2, vxx2] = m.observe(state, q, grid)?;
    let pow = grid.trapezoid_map(&state.theta, |th| (th.max(0.0) + 1.0).powf(4.0 * alpha));
    m.cum_vx4 += dt * vx4;
    m.cum_theta_pow += dt * pow;
    m.cum_thetaxx2 += dt * thxx2;
    m.cum_vxx2 += dt * vxx2;
    Ok(m)
}

/// Instantaneous monitors for `state` with all cumulative fields zero.
pub(crate) fn monitors_at(state: &State, q: f64, grid: &Grid1D) -> Result<TheoryMonitors> {
    let mut m = TheoryMonitors::default();
    m.observe(state, q, grid)?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub fired: bool,
    /// Sample index (within the trace) at which the detector fired.
    pub fire_index: Option<usize>,
    pub t_fire: Option<f64>,
    pub tail: Vec<f64>,
    /// Fitted exponential growth rate per sample over the window.
    pub growth_rate: f64,
}

/// Fires when the last sample exceeds `threshold` and the least-squares
/// exponential growth rate over the last `window` samples exceeds `rate_min`.
pub fn blowup_check(trace: &[f64], window: usize, threshold: f64, rate_min: f64) -> BlowupReport {
    let window = window.max(2).min(trace.len());
    if trace.len() < 2 {
        return BlowupReport {
            fired: false,
            fire_index: None,
            t_fire: None,
            tail: trace.to_vec(),
            growth_rate: 0.0,
        };
    }
    let tail = &trace[trace.len() - window..];
    let xs: Vec<f64> = (0..window).map(|i| i as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|&w| w.max(f64::MIN_POSITIVE).ln()).collect();
    let rate = super::fit_slope(&xs, &ys);
    let rate = if rate.is_finite() { rate } else { 0.0 };
    let last = *tail.last().unwrap();
    let fired = last > threshold && rate > rate_min;
    BlowupReport {
        fired,
        fire_index: fired.then(|| trace.len() - 1),
        t_fire: None,
        tail: tail.to_vec(),
        growth_rate: rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_state_monitors() {
        let g = Grid1D::new(2.0, 21).unwrap();
        let s = State {
            t: 0.0,
            u: Field::zeros(21),
            v: Field::zeros(21),
            theta: Field::zeros(21),
        };
        let m = monitors_update(&TheoryMonitors::default(), &s, 0.1, 2.0, 1.2, &g).unwrap();
        assert_eq!(m.cum_vx4, 0.0);
        assert_eq!(m.l2_vx, 0.0);
        assert_eq!(m.w12_theta, 0.0);
        assert_abs_diff_eq!(m.cum_theta_pow, 0.1 * 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.lq_value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_state_accumulates_linearly() {
        let g = Grid1D::new(1.0, 41).unwrap();
        let mut v = Field::from_fn(&g, |x| (std::f64::consts::PI * x).sin());
        v[40] = 0.0;
        let s = State {
            t: 0.0,
            u: Field::zeros(41),
            v,
            theta: Field::constant(41, 0.5),
        };
        let one = monitors_update(&TheoryMonitors::default(), &s, 0.01, 2.0, 1.0, &g).unwrap();
        let mut m = TheoryMonitors::default();
        for _ in 0..10 {
            m = monitors_update(&m, &s, 0.01, 2.0, 1.0, &g).unwrap();
        }
        assert_abs_diff_eq!(m.cum_vx4, 10.0 * one.cum_vx4, epsilon = 1e-10);
        assert_abs_diff_eq!(m.cum_vxx2, 10.0 * one.cum_vxx2, epsilon = 1e-8);
        assert_abs_diff_eq!(m.cum_theta_pow, 10.0 * one.cum_theta_pow, epsilon = 1e-12);
    }

    #[test]
    fn blowup_examples() {
        let flat = vec![3.0; 10];
        let r = blowup_check(&flat, 5, 1.0, 0.1);
        assert!(!r.fired);
        assert_eq!(r.growth_rate, 0.0);

        let doubling: Vec<f64> = (0..10).map(|k| 2f64.powi(k)).collect();
        let r = blowup_check(&doubling, 5, 100.0, 0.1);
        assert!(r.fired);
        assert_abs_diff_eq!(r.growth_rate, 2f64.ln(), epsilon = 1e-12);

        let decaying: Vec<f64> = (0..10).map(|k| 1e4 * 0.5f64.powi(k)).collect();
        let r = blowup_check(&decaying, 5, 1.0, 0.1);
        assert!(!r.fired);
        assert!(r.growth_rate < 0.0);
    }
}
