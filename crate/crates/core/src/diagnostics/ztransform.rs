use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::MaterialLaws;

/// Damped antiderivative of the velocity: `V = ∫₀ˣ v`, `z = e^{−κt} V`.
pub fn z_transform(state: &State, kappa: f64, grid: &Grid1D) -> Result<(Field, Field)> {
    let big_v = grid.cumulative_integral(&state.v)?;
    let z = big_v.scaled((-kappa * state.t).exp());
    Ok((z, big_v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZResidual {
    /// L² norm of the residual of `z_t = γ₀ z_xx − κz + h` over (0, L).
    pub l2: f64,
    /// `max(|z(0, t₀)|, |z(0, t₁)|)`; exactly zero by construction.
    pub z_left: f64,
    /// One-sided `z_x(L)` at the later snapshot.
    pub zx_right: f64,
}

/// Residual of the mixed-boundary parabolic problem satisfied by z between two
/// consecutive snapshots.
///
/// The source is `h = (γ(Θ) − γ₀) z_xx + a e^{−κt} u_x − e^{−κt} f(Θ)` evaluated
/// at the later snapshot, plus the boundary term `−e^{−κt}(γ(Θ)v_x + a u_x − f(Θ))|_{x=0}`
/// that integrating the momentum equation from 0 to x leaves behind. `z_xx` is
/// taken as `e^{−κt} v_x` since `V_xx = v_x`.
pub fn z_residual(
    prev: &State,
    next: &State,
    laws: &MaterialLaws,
    a: f64,
    gamma0: f64,
    kappa: f64,
    grid: &Grid1D,
) -> Result<ZResidual> {
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::domain("z residual needs two snapshots ordered in time"));
    }
    let (z0, _) = z_transform(prev, kappa, grid)?;
    let (z1, _) = z_transform(next, kappa, grid)?;
    let decay = (-kappa * next.t).exp();
    let vx = grid.d1(&next.v)?;
    let ux = grid.d1(&next.u)?;
    let n = grid.n();
    let th0 = next.theta[0];
    let left_flux = laws.gamma_at(th0) * vx[0] + a * ux[0] - laws.f_at(th0);
    let mut res = vec![0.0; n];
    for i in 0..n {
        let th = next.theta[i];
        let zxx = decay * vx[i];
        let h = (laws.gamma_at(th) - gamma0) * zxx + a * decay * ux[i] - decay * laws.f_at(th);
        let rhs = gamma0 * zxx - kappa * z1[i] + h - decay * left_flux;
        res[i] = (z1[i] - z0[i]) / dt - rhs;
    }
    let zx = grid.d1(&z1)?;
    Ok(ZResidual {
        l2: grid.trapezoid_map(&res, |x| x * x).sqrt(),
        z_left: z0[0].abs().max(z1[0].abs()),
        zx_right: zx[n - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FFamily, GammaFamily};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn with_v(g: &Grid1D, t: f64, v: Field) -> State {
        State {
            t,
            u: Field::zeros(g.n()),
            v,
            theta: Field::zeros(g.n()),
        }
    }

    #[test]
    fn zero_velocity_gives_zero() {
        let g = Grid1D::new(1.0, 17).unwrap();
        let (z, v) = z_transform(&with_v(&g, 0.3, Field::zeros(17)), 2.0, &g).unwrap();
        assert!(z.iter().chain(v.iter()).all(|&x| x == 0.0));
        let laws = MaterialLaws::new(GammaFamily::Constant, FFamily::Zero, 1.0, 0.0, 1.0, 1.0);
        let r = z_residual(
            &with_v(&g, 0.0, Field::zeros(17)),
            &with_v(&g, 0.1, Field::zeros(17)),
            &laws,
            1.0,
            1.0,
            1.0,
            &g,
        )
        .unwrap();
        assert_eq!((r.l2, r.z_left, r.zx_right), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sine_velocity_antiderivative() {
        let l = 2.0;
        let g = Grid1D::new(l, 401).unwrap();
        let mut v = Field::from_fn(&g, |x| (PI * x / l).sin());
        v[400] = 0.0;
        let (z, big_v) = z_transform(&with_v(&g, 0.0, v.clone()), 5.0, &g).unwrap();
        for i in 0..401 {
            let exact = l / PI * (1.0 - (PI * g.x(i) / l).cos());
            assert_abs_diff_eq!(big_v[i], exact, epsilon = 2e-5);
            assert_eq!(z[i], big_v[i]);
        }
        assert_eq!(z[0], 0.0);
        let zx = g.d1(&z).unwrap();
        assert_abs_diff_eq!(zx[400], 0.0, epsilon = 1e-4);

        let (z1, big_v1) = z_transform(&with_v(&g, 1.0, v), 1.0, &g).unwrap();
        for i in 0..401 {
            assert_abs_diff_eq!(z1[i], (-1.0f64).exp() * big_v1[i], epsilon = 1e-15);
        }
    }
}
