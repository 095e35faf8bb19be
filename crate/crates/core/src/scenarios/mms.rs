use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Forcing, Sources};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::MaterialLaws;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmsId {
    /// `u* = 0`, `Θ* = 1`.
    Stationary,
    /// `u* = e^{−t} sin(kx)`, `Θ* = 1 + e^{−t} cos(kx)`, `k = π/L`.
    Exponential,
}

impl MmsId {
    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "stationary" => Ok(MmsId::Stationary),
            "exponential" | "exp" => Ok(MmsId::Exponential),
            other => Err(Error::domain(format!("unknown manufactured solution {other:?}"))),
        }
    }
}

/// Manufactured solution with the body forces it induces in the v- and
/// Θ-equations.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsCase {
    pub id: MmsId,
    pub laws: MaterialLaws,
    pub a: f64,
    pub length: f64,
}

/// Exact nodal fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFields {
    pub u: Field,
    pub v: Field,
    pub theta: Field,
}

pub fn mms_case(id: &str, laws: MaterialLaws, a: f64, length: f64) -> Result<MmsCase> {
    Ok(MmsCase {
        id: MmsId::parse(id)?,
        laws,
        a,
        length,
    })
}

/// Pointwise values `(u, v, Θ)` and the derivatives the forcing needs.
struct Jet {
    u_xx: f64,
    v: f64,
    v_t: f64,
    v_x: f64,
    v_xx: f64,
    th: f64,
    th_t: f64,
    th_x: f64,
    th_xx: f64,
    u: f64,
}

impl MmsCase {
    fn k(&self) -> f64 {
        PI / self.length
    }

    fn jet(&self, x: f64, t: f64) -> Jet {
        match self.id {
            MmsId::Stationary => Jet {
                u: 0.0,
                u_xx: 0.0,
                v: 0.0,
                v_t: 0.0,
                v_x: 0.0,
                v_xx: 0.0,
                th: 1.0,
                th_t: 0.0,
                th_x: 0.0,
                th_xx: 0.0,
            },
            MmsId::Exponential => {
                let k = self.k();
                let e = (-t).exp();
                let (s, c) = (k * x).sin_cos();
                Jet {
                    u: e * s,
                    u_xx: -k * k * e * s,
                    v: -e * s,
                    v_t: e * s,
                    v_x: -k * e * c,
                    v_xx: k * k * e * s,
                    th: 1.0 + e * c,
                    th_t: -e * c,
                    th_x: -k * e * s,
                    th_xx: -k * k * e * c,
                }
            }
        }
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        self.jet(x, t).u
    }

    pub fn v(&self, x: f64, t: f64) -> f64 {
        self.jet(x, t).v
    }

    pub fn theta(&self, x: f64, t: f64) -> f64 {
        self.jet(x, t).th
    }

    /// `v_t − (γ(Θ)v_x)_x − a u_xx + (f(Θ))_x` at the exact fields.
    pub fn forcing_v(&self, x: f64, t: f64) -> f64 {
        let j = self.jet(x, t);
        let l = &self.laws;
        let flux_x = l.gamma_prime(j.th) * j.th_x * j.v_x + l.gamma_at(j.th) * j.v_xx;
        j.v_t - flux_x - self.a * j.u_xx + l.f_prime(j.th) * j.th_x
    }

    /// `Θ_t − Θ_xx − γ(Θ)v_x² + f(Θ)v_x` at the exact fields.
    pub fn forcing_theta(&self, x: f64, t: f64) -> f64 {
        let j = self.jet(x, t);
        let l = &self.laws;
        j.th_t - j.th_xx - l.gamma_at(j.th) * j.v_x * j.v_x + l.f_at(j.th) * j.v_x
    }

    /// Exact fields on the grid; end values of u and v are set to exactly zero.
    pub fn exact(&self, grid: &Grid1D, t: f64) -> ExactFields {
        let n = grid.n();
        let mut u = Field::from_fn(grid, |x| self.u(x, t));
        let mut v = Field::from_fn(grid, |x| self.v(x, t));
        for f in [&mut u, &mut v] {
            f[0] = 0.0;
            f[n - 1] = 0.0;
        }
        ExactFields {
            u,
            v,
            theta: Field::from_fn(grid, |x| self.theta(x, t)),
        }
    }
}

impl Forcing for MmsCase {
    fn sources(&self, t: f64, grid: &Grid1D) -> Sources {
        Sources {
            v: grid.nodes().map(|x| self.forcing_v(x, t)).collect(),
            theta: grid.nodes().map(|x| self.forcing_theta(x, t)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FFamily, GammaFamily};
    use approx::assert_abs_diff_eq;

    fn case() -> MmsCase {
        let laws = MaterialLaws::new(GammaFamily::Saturating, FFamily::Linear, 1.0, 0.1, 1.0, 1.0);
        mms_case("exponential", laws, 1.0, 1.0).unwrap()
    }

    #[test]
    fn stationary_case_is_unforced() {
        let laws = MaterialLaws::new(GammaFamily::Constant, FFamily::Linear, 1.0, 0.0, 1.0, 1.0);
        let c = mms_case("stationary", laws, 1.0, 1.0).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(c.u(x, 0.7), 0.0);
            assert_eq!(c.theta(x, 0.7), 1.0);
            assert_eq!(c.forcing_v(x, 0.7), 0.0);
            assert_eq!(c.forcing_theta(x, 0.7), 0.0);
        }
    }

    #[test]
    fn exponential_initial_fields() {
        let g = Grid1D::new(1.0, 17).unwrap();
        let e = case().exact(&g, 0.0);
        for (i, x) in g.nodes().enumerate() {
            if i > 0 && i < 16 {
                assert_abs_diff_eq!(e.u[i], (PI * x).sin(), epsilon = 1e-15);
            }
            assert_abs_diff_eq!(e.theta[i], 1.0 + (PI * x).cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn forcing_matches_symbolic_values() {
        // Symbolic substitution (computed independently): at (1/2, 0) the momentum
        // forcing is 1 − π − π²/20 and the heat forcing vanishes.
        let c = case();
        assert_abs_diff_eq!(c.forcing_v(0.5, 0.0), 1.0 - PI - PI * PI / 20.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.forcing_theta(0.5, 0.0), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.forcing_v(0.25, 0.5), -1.198_279_006_450_749, epsilon = 1e-13);
        assert_abs_diff_eq!(c.forcing_theta(0.25, 0.5), -0.043_433_659_811_032_03, epsilon = 1e-13);
    }

    #[test]
    fn forcing_matches_nested_differences() {
        let c = case();
        let h = 1e-4;
        let (x, t) = (0.37, 0.2);
        let l = &c.laws;
        let flux = |x: f64| l.gamma_at(c.theta(x, t)) * (c.v(x + h, t) - c.v(x - h, t)) / (2.0 * h);
        let v_t = (c.v(x, t + h) - c.v(x, t - h)) / (2.0 * h);
        let u_xx = (c.u(x + h, t) - 2.0 * c.u(x, t) + c.u(x - h, t)) / (h * h);
        let f_x = (l.f_at(c.theta(x + h, t)) - l.f_at(c.theta(x - h, t))) / (2.0 * h);
        let fd = v_t - (flux(x + h) - flux(x - h)) / (2.0 * h) - u_xx + f_x;
        assert_abs_diff_eq!(c.forcing_v(x, t), fd, epsilon = 1e-5);
    }

    #[test]
    fn unknown_id_is_an_error() {
        assert!(mms_case("cubic", case().laws, 1.0, 1.0).is_err());
    }
}
