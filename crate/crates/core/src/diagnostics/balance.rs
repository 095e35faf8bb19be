use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::grid::{BcKind, Grid1D};
use crate::model::MaterialLaws;

/// `½∫v² + (a/2)∫u_x² + ∫Θ` split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub thermal: f64,
    pub total: f64,
    /// `E(t) − E(0)`; zero unless set through [`EnergyBudget::relative_to`].
    pub drift: f64,
}

impl EnergyBudget {
    pub fn relative_to(mut self, initial_total: f64) -> Self {
        self.drift = self.total - initial_total;
        self
    }
}

/// Energy budget of a state. Kinetic and thermal parts use the trapezoid
/// rule; the elastic part integrates the squared slope of the piecewise-linear
/// interpolant of u.
pub fn energy(state: &State, a: f64, grid: &Grid1D) -> Result<EnergyBudget> {
    state.check(grid)?;
    let kinetic = 0.5 * grid.trapezoid_map(&state.v, |v| v * v);
    let elastic = 0.5 * a * grid.gradient_energy(&state.u)?;
    let thermal = grid.trapezoid(&state.theta);
    Ok(EnergyBudget {
        t: state.t,
        kinetic,
        elastic,
        thermal,
        total: kinetic + elastic + thermal,
        drift: 0.0,
    })
}

/// Terms of `d/dt∫(Θ+1)^q = −dissipation + viscous_gain − coupling_loss`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqBalance {
    pub lhs_rate: f64,
    /// `q(q−1)∫(Θ+1)^{q−2}Θ_x²` (nonnegative).
    pub dissipation: f64,
    /// `q∫γ(Θ)(Θ+1)^{q−1}v_x²`.
    pub viscous_gain: f64,
    /// `q∫f(Θ)(Θ+1)^{q−1}v_x`.
    pub coupling_loss: f64,
}

pub fn lq_balance(state: &State, laws: &MaterialLaws, q: f64, grid: &Grid1D) -> Result<LqBalance> {
    state.check(grid)?;
    if !(q > 1.0) {
        return Err(Error::domain(format!("Lq balance needs q > 1, got {q}")));
    }
    let thx = grid.d1(&state.theta)?;
    let vx = grid.d1(&state.v)?;
    let n = grid.n();
    let mut diss = vec![0.0; n];
    let mut gain = vec![0.0; n];
    let mut coup = vec![0.0; n];
    for i in 0..n {
        let th = state.theta[i].max(0.0);
        let p1 = (th + 1.0).powf(q - 1.0);
        diss[i] = (th + 1.0).powf(q - 2.0) * thx[i] * thx[i];
        gain[i] = laws.gamma_at(th) * p1 * vx[i] * vx[i];
        coup[i] = laws.f_at(th) * p1 * vx[i];
    }
    let dissipation = q * (q - 1.0) * grid.trapezoid(&diss);
    let viscous_gain = q * grid.trapezoid(&gain);
    let coupling_loss = q * grid.trapezoid(&coup);
    Ok(LqBalance {
        lhs_rate: -dissipation + viscous_gain - coupling_loss,
        dissipation,
        viscous_gain,
        coupling_loss,
    })
}

/// L² norms (interior nodes) of the pointwise residuals of the strong-form
/// identities `u_tt = γ u_xxt + γ′Θ_x u_xt + a u_xx − f′Θ_x` and
/// `Θ_t = Θ_xx + γ u_xt² − f u_xt`, with time derivatives taken as
/// difference quotients between two snapshots and spatial terms at the later one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongResidual {
    pub momentum: f64,
    pub heat: f64,
}

pub fn strong_form_residual(
    prev: &State,
    next: &State,
    laws: &MaterialLaws,
    a: f64,
    grid: &Grid1D,
) -> Result<StrongResidual> {
    prev.check(grid)?;
    next.check(grid)?;
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::domain("snapshots must be ordered in time"));
    }
    let vx = grid.d1(&next.v)?;
    let vxx = grid.d2(&next.v, BcKind::DirichletBoth)?;
    let uxx = grid.d2(&next.u, BcKind::DirichletBoth)?;
    let thx = grid.d1(&next.theta)?;
    let thxx = grid.d2(&next.theta, BcKind::NeumannBoth)?;
    let n = grid.n();
    let mut mom = vec![0.0; n];
    let mut heat = vec![0.0; n];
    for i in 1..n - 1 {
        let th = next.theta[i];
        let utt = (next.v[i] - prev.v[i]) / dt;
        mom[i] = utt
            - (laws.gamma_at(th) * vxx[i] + laws.gamma_prime(th) * thx[i] * vx[i] + a * uxx[i]
                - laws.f_prime(th) * thx[i]);
        let tht = (next.theta[i] - prev.theta[i]) / dt;
        heat[i] = tht - (thxx[i] + laws.gamma_at(th) * vx[i] * vx[i] - laws.f_at(th) * vx[i]);
    }
    Ok(StrongResidual {
        momentum: grid.trapezoid_map(&mom, |x| x * x).sqrt(),
        heat: grid.trapezoid_map(&heat, |x| x * x).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::model::{FFamily, GammaFamily};
    use approx::assert_abs_diff_eq;

    fn st(g: &Grid1D, u: Field, v: Field, th: Field) -> State {
        let _ = g;
        State { t: 0.0, u, v, theta: th }
    }

    #[test]
    fn energy_examples() {
        let g = Grid1D::new(1.0, 201).unwrap();
        let z = st(&g, Field::zeros(201), Field::zeros(201), Field::zeros(201));
        let e = energy(&z, 1.0, &g).unwrap();
        assert_eq!((e.kinetic, e.elastic, e.thermal, e.total), (0.0, 0.0, 0.0, 0.0));

        let s = st(
            &g,
            Field::from_fn(&g, |x| x * (1.0 - x)),
            Field::zeros(201),
            Field::constant(201, 1.0),
        );
        let e = energy(&s, 2.0, &g).unwrap();
        assert_abs_diff_eq!(e.elastic, 1.0 / 3.0, epsilon = 1e-4);
        assert_abs_diff_eq!(e.thermal, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.total, 4.0 / 3.0, epsilon = 1e-4);
        assert_eq!(e.total, e.kinetic + e.elastic + e.thermal);

        // single hat of height h at node 3: trapezoid of v² = h²·dx
        let g = Grid1D::new(1.0, 11).unwrap();
        let mut v = Field::zeros(11);
        v[3] = 0.7;
        let s = st(&g, Field::zeros(11), v, Field::zeros(11));
        assert_abs_diff_eq!(energy(&s, 1.0, &g).unwrap().kinetic, 0.5 * 0.49 * 0.1, epsilon = 1e-15);
    }

    #[test]
    fn lq_constant_temperature() {
        let g = Grid1D::new(1.0, 101).unwrap();
        let laws = MaterialLaws::new(GammaFamily::Saturating, FFamily::Zero, 1.0, 0.1, 1.0, 1.0);
        let v = Field::from_fn(&g, |x| (std::f64::consts::PI * x).sin());
        let s = st(&g, Field::zeros(101), v.clone(), Field::constant(101, 2.0));
        let b = lq_balance(&s, &laws, 3.0, &g).unwrap();
        assert_eq!(b.dissipation, 0.0);
        assert_eq!(b.coupling_loss, 0.0);
        let vx = g.d1(&v).unwrap();
        let expect = 3.0 * 9.0 * laws.gamma_at(2.0) * g.trapezoid_map(&vx, |x| x * x);
        assert_abs_diff_eq!(b.viscous_gain, expect, epsilon = 1e-10);
        assert!(lq_balance(&s, &laws, 1.0, &g).is_err());
    }

    #[test]
    fn lq_pure_diffusion_decays() {
        let g = Grid1D::new(1.0, 101).unwrap();
        let laws = MaterialLaws::new(GammaFamily::Constant, FFamily::Linear, 1.0, 0.0, 1.0, 1.0);
        let th = Field::from_fn(&g, |x| 1.0 + (std::f64::consts::PI * x).cos());
        let s = st(&g, Field::zeros(101), Field::zeros(101), th);
        let b = lq_balance(&s, &laws, 2.0, &g).unwrap();
        assert_eq!(b.viscous_gain, 0.0);
        assert_eq!(b.coupling_loss, 0.0);
        assert!(b.lhs_rate < 0.0);
        assert_eq!(b.lhs_rate, -b.dissipation);
    }
}
