use super::{half_means, heating, paired_gradient, PositivityPolicy, Scheme, SchemeConfig, State};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::MaterialLaws;
use crate::tridiag::Tridiagonal;

/// Nodal body forces added to the v- and Θ-equations (manufactured solutions).
#[derive(Debug, Clone, PartialEq)]
pub struct Sources {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Advances one IMEX step of size `dt`.
///
/// Returns the new state and the number of nodes clamped by the positivity
/// policy. `sources` are evaluated by the caller at the scheme's stage time
/// (`t + dt` for backward Euler, `t + dt/2` for Crank–Nicolson).
pub fn step(
    state: &State,
    laws: &MaterialLaws,
    a: f64,
    grid: &Grid1D,
    cfg: &SchemeConfig,
    dt: f64,
    sources: Option<&Sources>,
) -> Result<(State, usize)> {
    state.check(grid)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let mut next = match cfg.scheme {
        Scheme::ImexBe => backward_euler(state, laws, a, grid, dt, sources)?,
        Scheme::ImexCn => crank_nicolson(state, laws, a, grid, dt, sources)?,
    };
    if !next.is_finite() {
        return Err(Error::StepFailed {
            t: state.t,
            cause: "non-finite values after step".into(),
        });
    }
    let min_theta = next.theta.min();
    let mut clamped = 0;
    if min_theta < 0.0 {
        match cfg.positivity_policy {
            PositivityPolicy::ClampAndCount => {
                for th in next.theta.iter_mut() {
                    if *th < 0.0 {
                        *th = 0.0;
                        clamped += 1;
                    }
                }
            }
            PositivityPolicy::RejectStep if min_theta < -cfg.positivity_tolerance => {
                return Err(Error::PositivityRejected {
                    min_theta,
                    suggested_dt: 0.5 * dt,
                });
            }
            PositivityPolicy::RejectStep => {}
        }
    }
    Ok((next, clamped))
}

/// Matrix `I − θ·dt·Dc` on interior nodes for Dirichlet unknowns, with an
/// extra `extra·L` Laplacian part (used for the implicit elastic term).
fn dirichlet_matrix(c_half: &[f64], scale: f64, extra: f64, dx: f64) -> Tridiagonal {
    let m = c_half.len() - 1;
    let h2 = dx * dx;
    let mut t = Tridiagonal::new(m);
    for k in 0..m {
        // interior node i = k + 1 sits between half cells i−½ (k) and i+½ (k+1)
        let cl = scale * c_half[k] / h2 + extra / h2;
        let cr = scale * c_half[k + 1] / h2 + extra / h2;
        t.diag[k] = 1.0 + cl + cr;
        t.lower[k] = -cl;
        t.upper[k] = -cr;
    }
    t
}

/// `I − scale·L_N` with ghost-mirror Neumann ends.
fn neumann_matrix(n: usize, scale: f64, dx: f64) -> Tridiagonal {
    let r = scale / (dx * dx);
    let mut t = Tridiagonal::new(n);
    for j in 0..n {
        t.diag[j] = 1.0 + 2.0 * r;
        t.lower[j] = -r;
        t.upper[j] = -r;
    }
    t.upper[0] = -2.0 * r;
    t.lower[n - 1] = -2.0 * r;
    t
}

fn flux_div(c_half: &[f64], w: &[f64], i: usize, h2: f64) -> f64 {
    (c_half[i] * (w[i + 1] - w[i]) - c_half[i - 1] * (w[i] - w[i - 1])) / h2
}

fn lap(w: &[f64], i: usize, h2: f64) -> f64 {
    (w[i + 1] - 2.0 * w[i] + w[i - 1]) / h2
}

fn lap_neumann(w: &[f64], j: usize, h2: f64) -> f64 {
    let n = w.len();
    if j == 0 {
        2.0 * (w[1] - w[0]) / h2
    } else if j == n - 1 {
        2.0 * (w[n - 2] - w[n - 1]) / h2
    } else {
        lap(w, j, h2)
    }
}

/// The temperature solves are written for the increment `Θ^{n+1} − Θ^n`, so
/// constant temperatures without sources are reproduced bit for bit.
fn increment(theta: &[f64], delta: &[f64]) -> Field {
    theta.iter().zip(delta).map(|(t, d)| t + d).collect::<Vec<_>>().into()
}

fn embed_dirichlet(interior: Vec<f64>) -> Field {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(0.0);
    v.extend(interior);
    v.push(0.0);
    Field::from(v)
}

fn backward_euler(
    s: &State,
    laws: &MaterialLaws,
    a: f64,
    grid: &Grid1D,
    dt: f64,
    sources: Option<&Sources>,
) -> Result<State> {
    let n = grid.n();
    let dx = grid.dx();
    let h2 = dx * dx;
    let c = laws.gamma_field(&s.theta);
    let f = laws.f_field(&s.theta);
    let c_half = half_means(&c);

    let mat = dirichlet_matrix(&c_half, dt, 0.0, dx);
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| {
            let src = sources.map_or(0.0, |s| s.v[i]);
            s.v[i] + dt * (a * lap(&s.u, i, h2) - (f[i + 1] - f[i - 1]) / (2.0 * dx) + src)
        })
        .collect();
    let v = embed_dirichlet(mat.solve(&rhs)?);

    let mut u = s.u.zip_map(&v, |u, v| u + dt * v);
    u[0] = 0.0;
    u[n - 1] = 0.0;

    let heat = heating(&c_half, &v, dx);
    let g = paired_gradient(&v, dx);
    let rhs: Vec<f64> = (0..n)
        .map(|j| {
            let src = sources.map_or(0.0, |s| s.theta[j]);
            dt * (lap_neumann(&s.theta, j, h2) + heat[j] - f[j] * g[j] + src)
        })
        .collect();
    let theta = increment(&s.theta, &neumann_matrix(n, dt, dx).solve(&rhs)?);

    Ok(State {
        t: s.t + dt,
        u,
        v,
        theta,
    })
}

fn crank_nicolson(
    s: &State,
    laws: &MaterialLaws,
    a: f64,
    grid: &Grid1D,
    dt: f64,
    sources: Option<&Sources>,
) -> Result<State> {
    let n = grid.n();
    let dx = grid.dx();
    let h2 = dx * dx;

    let predicted = backward_euler(s, laws, a, grid, dt, sources)?;
    let theta_mid = s.theta.zip_map(&predicted.theta, |x, y| 0.5 * (x + y));
    let c = laws.gamma_field(&theta_mid);
    let f = laws.f_field(&theta_mid);
    let c_half = half_means(&c);

    // elastic term at u^{n+½} = u^n + dt/4 (v^n + v^{n+1}) treated implicitly
    let quarter = 0.25 * a * dt * dt;
    let mat = dirichlet_matrix(&c_half, 0.5 * dt, quarter, dx);
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| {
            let src = sources.map_or(0.0, |s| s.v[i]);
            s.v[i]
                + 0.5 * dt * flux_div(&c_half, &s.v, i, h2)
                + dt * a * lap(&s.u, i, h2)
                + quarter * lap(&s.v, i, h2)
                - dt * (f[i + 1] - f[i - 1]) / (2.0 * dx)
                + dt * src
        })
        .collect();
    let v = embed_dirichlet(mat.solve(&rhs)?);

    let v_mid = s.v.zip_map(&v, |x, y| 0.5 * (x + y));
    let mut u = s.u.zip_map(&v_mid, |u, w| u + dt * w);
    u[0] = 0.0;
    u[n - 1] = 0.0;

    let heat = heating(&c_half, &v_mid, dx);
    let g = paired_gradient(&v_mid, dx);
    let rhs: Vec<f64> = (0..n)
        .map(|j| {
            let src = sources.map_or(0.0, |s| s.theta[j]);
            dt * (lap_neumann(&s.theta, j, h2) + heat[j] - f[j] * g[j] + src)
        })
        .collect();
    let theta = increment(&s.theta, &neumann_matrix(n, 0.5 * dt, dx).solve(&rhs)?);

    Ok(State {
        t: s.t + dt,
        u,
        v,
        theta,
    })
}
