use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::{InitialData, MaterialLaws};
use crate::par::{self, Exec};
use crate::tridiag::Tridiagonal;

/// State of the η-regularized system
/// `v_t = A v_xx + a u_xx + g`, `u_t = η u_xx + v`, `u = v = 0` on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaState {
    pub t: f64,
    pub v: Field,
    pub u: Field,
    pub eta: f64,
}

fn dirichlet_operator(coef: impl Fn(usize) -> f64, n: usize, dt: f64, dx: f64) -> Tridiagonal {
    let m = n - 2;
    let mut t = Tridiagonal::new(m);
    for k in 0..m {
        let r = dt * coef(k + 1) / (dx * dx);
        t.diag[k] = 1.0 + 2.0 * r;
        t.lower[k] = -r;
        t.upper[k] = -r;
    }
    t
}

fn embed(interior: Vec<f64>) -> Field {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(0.0);
    v.extend(interior);
    v.push(0.0);
    v.into()
}

/// One backward-Euler step: v implicit in its diffusion with `a u_xx`
/// explicit, then u implicit in `η u_xx` with the new v as source.
pub fn step_eta(
    state: &EtaState,
    coef: &Field,
    g: &Field,
    a: f64,
    grid: &Grid1D,
    dt: f64,
) -> Result<EtaState> {
    grid.check(&state.v)?;
    grid.check(&state.u)?;
    grid.check(coef)?;
    grid.check(g)?;
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if !(state.eta >= 0.0) {
        return Err(Error::domain(format!("eta must be nonnegative, got {}", state.eta)));
    }
    if let Some(c) = coef.iter().find(|&&c| !(c > 0.0)) {
        return Err(Error::domain(format!("diffusion coefficient must be positive, got {c}")));
    }
    let n = grid.n();
    let dx = grid.dx();
    let h2 = dx * dx;
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| {
            let uxx = (state.u[i + 1] - 2.0 * state.u[i] + state.u[i - 1]) / h2;
            state.v[i] + dt * (a * uxx + g[i])
        })
        .collect();
    let v = embed(dirichlet_operator(|i| coef[i], n, dt, dx).solve(&rhs)?);
    let rhs: Vec<f64> = (1..n - 1).map(|i| state.u[i] + dt * v[i]).collect();
    let u = embed(dirichlet_operator(|_| state.eta, n, dt, dx).solve(&rhs)?);
    Ok(EtaState {
        t: state.t + dt,
        v,
        u,
        eta: state.eta,
    })
}

/// Frozen-coefficient problem for the η ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaProblem {
    pub grid: Grid1D,
    pub a: f64,
    pub v0: Field,
    pub u0: Field,
    pub coef: Field,
    pub g: Field,
    pub dt: f64,
    pub t_end: f64,
}

impl EtaProblem {
    /// Freezes `A = γ(Θ₀)` and `g = −f′(Θ₀)Θ₀ₓ + γ′(Θ₀)Θ₀ₓ v₀ₓ` from initial data.
    pub fn frozen_from(
        laws: &MaterialLaws,
        a: f64,
        grid: &Grid1D,
        data: &InitialData,
        dt: f64,
        t_end: f64,
    ) -> Result<Self> {
        data.validate(grid)?;
        let thx = grid.d1(&data.theta0)?;
        let vx = grid.d1(&data.v0)?;
        let n = grid.n();
        let mut g: Vec<f64> = (0..n)
            .map(|i| {
                let th = data.theta0[i];
                -laws.f_prime(th) * thx[i] + laws.gamma_prime(th) * thx[i] * vx[i]
            })
            .collect();
        g[0] = 0.0;
        g[n - 1] = 0.0;
        Ok(EtaProblem {
            grid: *grid,
            a,
            v0: data.v0.clone(),
            u0: data.u0.clone(),
            coef: laws.gamma_field(&data.theta0),
            g: g.into(),
            dt,
            t_end,
        })
    }

    fn trajectory(&self, eta: f64) -> Result<Vec<EtaState>> {
        let mut s = EtaState {
            t: 0.0,
            v: self.v0.clone(),
            u: self.u0.clone(),
            eta,
        };
        let steps = (self.t_end / self.dt).round().max(1.0) as usize;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(s.clone());
        for _ in 0..steps {
            s = step_eta(&s, &self.coef, &self.g, self.a, &self.grid, self.dt)?;
            out.push(s.clone());
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaCascadeReport {
    pub etas: Vec<f64>,
    /// `sup_t y_η(t)` with `y_η = ∫(v_η − v)² + a∫(u_η − u)_x²` against the η = 0 run.
    pub sup_y: Vec<f64>,
    /// Least-squares slope of `log sup_y` against `log η`.
    pub slope: f64,
    pub strictly_decreasing: bool,
}

/// Runs the η ladder and the η = 0 reference (in parallel under `exec`).
pub fn eta_cascade(problem: &EtaProblem, etas: &[f64], exec: Exec) -> Result<EtaCascadeReport> {
    if etas.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::domain("eta ladder entries must be positive"));
    }
    let mut all = vec![0.0];
    all.extend_from_slice(etas);
    let runs = par::map(exec, all, |eta| problem.trajectory(eta));
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = runs.remove(0);
    let grid = &problem.grid;
    let sup_y: Vec<f64> = runs
        .iter()
        .map(|traj| {
            traj.iter()
                .zip(&reference)
                .map(|(s, r)| {
                    let dv = s.v.zip_map(&r.v, |x, y| x - y);
                    let du = s.u.zip_map(&r.u, |x, y| x - y);
                    grid.trapezoid_map(&dv, |x| x * x)
                        + problem.a * grid.gradient_energy(&du).unwrap_or(f64::NAN)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let strictly_decreasing = sup_y.windows(2).all(|w| w[1] < w[0]);
    let xs: Vec<f64> = etas.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = sup_y.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(EtaCascadeReport {
        etas: etas.to_vec(),
        sup_y,
        slope: crate::diagnostics::fit_slope(&xs, &ys),
        strictly_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(g: &Grid1D, k: f64) -> Field {
        let mut f = Field::from_fn(g, |x| (k * PI * x).sin());
        let n = g.n();
        f[0] = 0.0;
        f[n - 1] = 0.0;
        f
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid1D::new(1.0, 33).unwrap();
        for eta in [0.0, 0.1, 0.001] {
            let mut s = EtaState {
                t: 0.0,
                v: Field::zeros(33),
                u: Field::zeros(33),
                eta,
            };
            for _ in 0..10 {
                s = step_eta(&s, &Field::constant(33, 1.2), &Field::zeros(33), 1.0, &g, 1e-2).unwrap();
            }
            assert!(s.v.iter().chain(s.u.iter()).all(|&x| x == 0.0));
        }
    }

    #[test]
    fn rejects_nonpositive_coefficient() {
        let g = Grid1D::new(1.0, 9).unwrap();
        let s = EtaState {
            t: 0.0,
            v: Field::zeros(9),
            u: Field::zeros(9),
            eta: 0.1,
        };
        assert!(step_eta(&s, &Field::zeros(9), &Field::zeros(9), 1.0, &g, 1e-2).is_err());
    }

    #[test]
    fn ladder_decreases() {
        let g = Grid1D::new(1.0, 65).unwrap();
        let p = EtaProblem {
            grid: g,
            a: 1.0,
            v0: sine(&g, 1.0),
            u0: sine(&g, 2.0).scaled(0.1),
            coef: Field::from_fn(&g, |x| 1.0 + 0.05 * (PI * x).cos()),
            g: sine(&g, 3.0).scaled(0.3),
            dt: 2e-3,
            t_end: 0.2,
        };
        let r = eta_cascade(&p, &[1e-1, 1e-2, 1e-3], Exec::Sequential).unwrap();
        assert!(r.strictly_decreasing, "{r:?}");
        assert!(r.slope >= 0.5);
    }
}
