//! Built-in scenarios, manufactured solutions, mollification of rough data
//! and the mollification cascade.

mod cascade;
mod mms;
mod mollify;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cascade::{eps_cascade, CascadeReport};
pub use mms::{mms_case, ExactFields, MmsCase, MmsId};
pub use mollify::{cutoff, mollify, w12_distance, w14_distance, w22_distance};

use crate::dynamics::{DiagnosticSettings, RunSpec, SchemeConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::{FFamily, GammaFamily, InitialData, MaterialLaws, Regularity};

/// What a scenario is expected to do, which decides the available oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Stationary,
    ClosedForm,
    Mms,
    Generic,
}

/// Initial-data generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialProfile {
    /// `u = v = 0`, `Θ ≡ theta`.
    Stationary { theta: f64 },
    /// `u = v = 0`, `Θ = mean + amplitude·cos(πx/L)`.
    HeatEigenmode { mean: f64, amplitude: f64 },
    /// `u = 0`, `v = amplitude·sin(πx/L)`, `Θ = 0`.
    DampedWave { amplitude: f64 },
    /// Finite sine series for u and v, cosine series for Θ (mode m has wavenumber mπ/L).
    Modes {
        u: Vec<f64>,
        v: Vec<f64>,
        theta_mean: f64,
        theta: Vec<f64>,
    },
    /// `u = 0`, a hat velocity peaked at L/3 and a tent temperature centred at L/2.
    RoughCorner { base: f64, peak: f64, v_amp: f64 },
    /// Initial values of a manufactured solution.
    Mms { case: MmsId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub laws: MaterialLaws,
    pub a: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
    pub profile: InitialProfile,
    #[serde(rename = "T_end")]
    pub t_end: f64,
    pub tag: Tag,
    #[serde(default)]
    pub scheme: SchemeConfig,
}

fn zero_ends(mut f: Field) -> Field {
    let n = f.len();
    f[0] = 0.0;
    f[n - 1] = 0.0;
    f
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.length, self.n)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let grid = self.grid()?;
        let n = grid.n();
        let l = self.length;
        let k = PI / l;
        let smooth = |u0, v0, theta0| InitialData {
            u0,
            v0,
            theta0,
            regularity: Regularity::Smooth,
        };
        let data = match &self.profile {
            InitialProfile::Stationary { theta } => smooth(Field::zeros(n), Field::zeros(n), Field::constant(n, *theta)),
            InitialProfile::HeatEigenmode { mean, amplitude } => smooth(
                Field::zeros(n),
                Field::zeros(n),
                Field::from_fn(&grid, |x| (mean + amplitude * (k * x).cos()).max(0.0)),
            ),
            InitialProfile::DampedWave { amplitude } => smooth(
                Field::zeros(n),
                zero_ends(Field::from_fn(&grid, |x| amplitude * (k * x).sin())),
                Field::zeros(n),
            ),
            InitialProfile::Modes { u, v, theta_mean, theta } => {
                let sines = |c: &[f64]| {
                    zero_ends(Field::from_fn(&grid, |x| {
                        c.iter()
                            .enumerate()
                            .map(|(m, cm)| cm * ((m + 1) as f64 * k * x).sin())
                            .sum()
                    }))
                };
                let th = Field::from_fn(&grid, |x| {
                    theta_mean
                        + theta
                            .iter()
                            .enumerate()
                            .map(|(m, cm)| cm * ((m + 1) as f64 * k * x).cos())
                            .sum::<f64>()
                });
                smooth(sines(u), sines(v), th)
            }
            InitialProfile::RoughCorner { base, peak, v_amp } => InitialData {
                u0: Field::zeros(n),
                v0: zero_ends(Field::from_fn(&grid, |x| v_amp * (3.0 * x / l).min(1.5 * (l - x) / l))),
                theta0: Field::from_fn(&grid, |x| base + peak * (1.0 - (x - 0.5 * l).abs() / (0.25 * l)).max(0.0)),
                regularity: Regularity::Rough,
            },
            InitialProfile::Mms { case } => {
                let c = MmsCase {
                    id: *case,
                    laws: self.laws.clone(),
                    a: self.a,
                    length: l,
                };
                let e = c.exact(&grid, 0.0);
                smooth(e.u, e.v, e.theta)
            }
        };
        data.validate(&grid)
            .map_err(|e| Error::config("profile", format!("scenario {}: {e}", self.name)))?;
        Ok(data)
    }

    /// The manufactured solution driving this scenario, if any.
    pub fn mms(&self) -> Option<MmsCase> {
        match &self.profile {
            InitialProfile::Mms { case } => Some(MmsCase {
                id: *case,
                laws: self.laws.clone(),
                a: self.a,
                length: self.length,
            }),
            _ => None,
        }
    }

    /// Exact nodal fields at time `t`, for scenarios that have them.
    pub fn exact(&self, t: f64) -> Result<Option<ExactFields>> {
        let grid = self.grid()?;
        let n = grid.n();
        Ok(match (&self.profile, self.tag) {
            (InitialProfile::Stationary { theta }, _) => Some(ExactFields {
                u: Field::zeros(n),
                v: Field::zeros(n),
                theta: Field::constant(n, *theta),
            }),
            (InitialProfile::HeatEigenmode { mean, amplitude }, _)
                if matches!(self.laws.f_family, FFamily::Zero) =>
            {
                let k = PI / self.length;
                let decay = (-k * k * t).exp();
                Some(ExactFields {
                    u: Field::zeros(n),
                    v: Field::zeros(n),
                    theta: Field::from_fn(&grid, |x| mean + amplitude * decay * (k * x).cos()),
                })
            }
            (InitialProfile::Mms { .. }, _) => self.mms().map(|c| c.exact(&grid, t)),
            _ => None,
        })
    }

    pub fn has_exact_solution(&self) -> bool {
        matches!(self.tag, Tag::Stationary | Tag::ClosedForm | Tag::Mms)
    }

    pub fn with_resolution(&self, n: usize) -> Scenario {
        Scenario { n, ..self.clone() }
    }

    /// Run specification with the scenario's scheme and MMS forcing attached.
    pub fn run_spec(&self, diagnostics: DiagnosticSettings) -> Result<RunSpec> {
        let mut spec = RunSpec::new(
            self.laws.clone(),
            self.a,
            self.grid()?,
            self.initial_data()?,
            self.t_end,
            self.scheme,
        );
        spec.diagnostics = diagnostics;
        spec.forcing = self.mms().map(|c| Arc::new(c) as Arc<dyn crate::dynamics::Forcing>);
        Ok(spec)
    }
}

fn constant_laws() -> MaterialLaws {
    MaterialLaws::new(GammaFamily::Constant, FFamily::Zero, 1.0, 0.0, 1.0, 1.0)
}

/// Saturating viscosity with `γ₀ = 1`, `δ = 0.1` and `f(Θ) = Θ`.
fn coupled_laws() -> MaterialLaws {
    MaterialLaws::new(GammaFamily::Saturating, FFamily::Linear, 1.0, 0.1, 1.0, 1.0)
}

fn smooth_modes() -> InitialProfile {
    InitialProfile::Modes {
        u: vec![0.1],
        v: vec![0.5, 0.2],
        theta_mean: 0.5,
        theta: vec![0.3],
    }
}

fn scenario(name: &str, laws: MaterialLaws, profile: InitialProfile, t_end: f64, tag: Tag) -> Scenario {
    Scenario {
        name: name.into(),
        laws,
        a: 1.0,
        length: 1.0,
        n: 129,
        profile,
        t_end,
        tag,
        scheme: SchemeConfig::default(),
    }
}

/// The standard scenario battery.
pub fn builtin_battery() -> Vec<Scenario> {
    vec![
        scenario(
            "stationary",
            constant_laws(),
            InitialProfile::Stationary { theta: 1.0 },
            1.0,
            Tag::Stationary,
        ),
        scenario(
            "heat-eigenmode",
            constant_laws(),
            InitialProfile::HeatEigenmode {
                mean: 1.0,
                amplitude: 1.0,
            },
            0.5,
            Tag::ClosedForm,
        ),
        scenario(
            "damped-wave",
            constant_laws(),
            InitialProfile::DampedWave { amplitude: 1.0 },
            1.0,
            Tag::Generic,
        ),
        scenario("coupled", coupled_laws(), smooth_modes(), 1.0, Tag::Generic),
        scenario(
            "rough-corner",
            coupled_laws(),
            InitialProfile::RoughCorner {
                base: 0.5,
                peak: 0.5,
                v_amp: 0.2,
            },
            0.2,
            Tag::Generic,
        ),
        scenario(
            "near-boundary",
            MaterialLaws::new(GammaFamily::Saturating, FFamily::Power, 1.0, 0.1, 1.0, 1.45),
            smooth_modes(),
            1.0,
            Tag::Generic,
        ),
    ]
}

/// Manufactured-solution scenarios; addressable by name but not part of the battery.
pub fn mms_scenarios() -> Vec<Scenario> {
    vec![
        scenario(
            "mms-exp",
            coupled_laws(),
            InitialProfile::Mms {
                case: MmsId::Exponential,
            },
            0.5,
            Tag::Mms,
        ),
        scenario(
            "mms-stationary",
            MaterialLaws::new(GammaFamily::Constant, FFamily::Linear, 1.0, 0.0, 1.0, 1.0),
            InitialProfile::Mms {
                case: MmsId::Stationary,
            },
            0.5,
            Tag::Mms,
        ),
    ]
}

pub fn scenario_by_name(name: &str) -> Result<Scenario> {
    builtin_battery()
        .into_iter()
        .chain(mms_scenarios())
        .find(|s| s.name == name)
        .ok_or_else(|| Error::config("scenario", format!("unknown scenario {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_contents() {
        let b = builtin_battery();
        assert!(b.len() >= 6);
        let st = b.iter().find(|s| s.name == "stationary").unwrap();
        assert_eq!(st.tag, Tag::Stationary);
        for s in &b {
            let report = s.laws.validate_hypotheses(10.0, 200);
            assert!(report.passed(), "{}: {:?}", s.name, report.failures().collect::<Vec<_>>());
            let data = s.initial_data().unwrap();
            data.validate(&s.grid().unwrap()).unwrap();
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(scenario_by_name("mms-exp").unwrap().tag, Tag::Mms);
        assert!(matches!(scenario_by_name("nope"), Err(Error::Config { .. })));
    }

    #[test]
    fn heat_exact_at_zero_matches_data() {
        let s = scenario_by_name("heat-eigenmode").unwrap();
        let e = s.exact(0.0).unwrap().unwrap();
        let d = s.initial_data().unwrap();
        for (a, b) in e.theta.iter().zip(d.theta0.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(scenario_by_name("coupled").unwrap().exact(0.0).unwrap().is_none());
    }

    #[test]
    fn rough_profile_is_rough() {
        let s = scenario_by_name("rough-corner").unwrap();
        let d = s.initial_data().unwrap();
        assert_eq!(d.regularity, Regularity::Rough);
        assert!(d.theta0.min() >= 0.5);
        assert!((d.theta0.max() - 1.0).abs() < 1e-12);
    }
}
