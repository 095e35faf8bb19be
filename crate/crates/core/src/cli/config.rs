use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{BlowupSettings, SchemeConfig};
use crate::error::{Error, Result};
use crate::model::{FFamily, GammaFamily, Table};
use crate::scenarios::{scenario_by_name, Scenario};

/// Built-in scenario name or a full inline scenario table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Name(String),
    Inline(Box<Scenario>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaLaw {
    Constant,
    Saturating,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FLaw {
    Zero,
    Linear,
    Power,
    Tabulated,
}

/// One run. Physical parameters override the referenced scenario when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FLaw>,
    /// Two-column `ξ, γ(ξ)` file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_table: Option<PathBuf>,
    /// Two-column `ξ, f(ξ)` file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "K_f", default, skip_serializing_if = "Option::is_none")]
    pub k_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "T_end", default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Horizon for the derived damping rate; defaults to `T_end`.
    #[serde(rename = "T0", default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Lq monitor exponent; defaults to `4α − 2` when that exceeds 1, else 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Trials for the maximal-regularity estimate reported in the summary.
    #[serde(default = "default_k_trials")]
    pub k_trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeConfig>,
    #[serde(default)]
    pub blowup: BlowupSettings,
}

fn default_kappa() -> f64 {
    1.0
}

fn default_cadence() -> usize {
    10
}

fn default_k_trials() -> usize {
    8
}

impl RunConfig {
    pub fn for_scenario(name: &str) -> Self {
        RunConfig {
            scenario: ScenarioRef::Name(name.into()),
            gamma: None,
            f: None,
            gamma_table: None,
            f_table: None,
            gamma0: None,
            delta: None,
            k_f: None,
            alpha: None,
            a: None,
            length: None,
            n: None,
            t_end: None,
            t0: None,
            kappa: default_kappa(),
            q: None,
            cadence: default_cadence(),
            out: None,
            seed: 0,
            k_trials: default_k_trials(),
            scheme: None,
            blowup: BlowupSettings::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(toml_field(&e), e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// The referenced scenario with all overrides applied and checked.
    /// Relative table paths are resolved against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedRun> {
        let mut s = match &self.scenario {
            ScenarioRef::Name(name) => scenario_by_name(name)?,
            ScenarioRef::Inline(s) => (**s).clone(),
        };
        let laws = &mut s.laws;
        set(&mut laws.gamma0, self.gamma0);
        set(&mut laws.delta, self.delta);
        set(&mut laws.k_f, self.k_f);
        set(&mut laws.alpha, self.alpha);
        set(&mut s.a, self.a);
        set(&mut s.length, self.length);
        set(&mut s.n, self.n);
        set(&mut s.t_end, self.t_end);
        if let Some(scheme) = self.scheme {
            s.scheme = scheme;
        }

        let table = |path: &Option<PathBuf>, field: &str| -> Result<Table> {
            let path = path
                .as_ref()
                .ok_or_else(|| Error::config(field, "a tabulated law needs a table file"))?;
            let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
            Table::from_file(&full).map_err(|e| Error::config(field, format!("{}: {e}", full.display())))
        };
        match self.gamma {
            None => {}
            Some(GammaLaw::Constant) => s.laws.gamma_family = GammaFamily::Constant,
            Some(GammaLaw::Saturating) => s.laws.gamma_family = GammaFamily::Saturating,
            Some(GammaLaw::Tabulated) => {
                s.laws.gamma_family = GammaFamily::Tabulated {
                    table: table(&self.gamma_table, "gamma_table")?,
                }
            }
        }
        match self.f {
            None => {}
            Some(FLaw::Zero) => s.laws.f_family = FFamily::Zero,
            Some(FLaw::Linear) => s.laws.f_family = FFamily::Linear,
            Some(FLaw::Power) => s.laws.f_family = FFamily::Power,
            Some(FLaw::Tabulated) => {
                s.laws.f_family = FFamily::Tabulated {
                    table: table(&self.f_table, "f_table")?,
                }
            }
        }

        let l = &s.laws;
        check(l.gamma0 > 0.0, "gamma0", format!("must be positive, got {}", l.gamma0))?;
        check(l.delta >= 0.0, "delta", format!("must be nonnegative, got {}", l.delta))?;
        check(l.k_f > 0.0, "K_f", format!("must be positive, got {}", l.k_f))?;
        check(
            l.alpha > 0.0 && l.alpha < 1.5,
            "alpha",
            format!("must lie in (0, 3/2), got {}", l.alpha),
        )?;
        check(s.a > 0.0, "a", format!("must be positive, got {}", s.a))?;
        check(s.length > 0.0, "L", format!("must be positive, got {}", s.length))?;
        check(s.n >= 3, "n", format!("must be at least 3, got {}", s.n))?;
        check(s.t_end > 0.0, "T_end", format!("must be positive, got {}", s.t_end))?;
        check(self.kappa >= 0.0, "kappa", format!("must be nonnegative, got {}", self.kappa))?;
        check(self.cadence >= 1, "cadence", "must be at least 1")?;
        check(self.k_trials >= 1, "k_trials", "must be at least 1")?;
        let t0 = self.t0.unwrap_or(s.t_end);
        check(t0 > 0.0, "T0", format!("must be positive, got {t0}"))?;
        let q = match self.q {
            Some(q) => q,
            None if 4.0 * l.alpha - 2.0 > 1.0 => 4.0 * l.alpha - 2.0,
            None => 2.0,
        };
        check(q > 1.0, "q", format!("must exceed 1, got {q}"))?;
        s.scheme.validate()?;
        let report = s.laws.validate_hypotheses((2.0 * s.initial_data()?.theta0.max()).max(10.0), 400);
        if let Some(fail) = report.failures().next() {
            return Err(Error::config(
                "laws",
                format!("{}: {}", fail.name, fail.detail.as_deref().unwrap_or("failed")),
            ));
        }
        Ok(ResolvedRun {
            scenario: s,
            kappa: self.kappa,
            q,
            t0,
            cadence: self.cadence,
            seed: self.seed,
            k_trials: self.k_trials,
            blowup: self.blowup,
        })
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn check(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

/// Best guess at the offending key in a TOML parse error.
fn toml_field(e: &toml::de::Error) -> String {
    let msg = e.message();
    for marker in ["unknown field `", "missing field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    "config".into()
}

/// A validated run: the concrete scenario plus diagnostic settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub scenario: Scenario,
    pub kappa: f64,
    pub q: f64,
    pub t0: f64,
    pub cadence: usize,
    pub seed: u64,
    pub k_trials: usize,
    pub blowup: BlowupSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Delta,
    Alpha,
    Kappa,
    N,
    Dt,
}

/// How sweep values are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScale {
    #[default]
    Absolute,
    /// Values are multiples of the estimated `delta_est` (delta axis only).
    DeltaEst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub scale: SweepScale,
    pub base: RunConfig,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: SweepConfig =
            toml::from_str(text).map_err(|e| Error::config(toml_field(&e), e.message().to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep value list is empty"));
        }
        if self.scale == SweepScale::DeltaEst && self.axis != SweepAxis::Delta {
            return Err(Error::config("scale", "delta_est scaling applies to the delta axis only"));
        }
        Ok(())
    }

    /// Base config with `value` applied on the sweep axis.
    pub fn point(&self, value: f64, delta_est: Option<f64>) -> Result<RunConfig> {
        let mut c = self.base.clone();
        match self.axis {
            SweepAxis::Delta => {
                let scale = match self.scale {
                    SweepScale::Absolute => 1.0,
                    SweepScale::DeltaEst => delta_est.ok_or_else(|| Error::config("scale", "delta_est unavailable"))?,
                };
                c.delta = Some(value * scale);
            }
            SweepAxis::Alpha => {
                c.alpha = Some(value);
                // The linear law only exists at α = 1; promote it to the power family.
                if c.f.is_none() || c.f == Some(FLaw::Linear) {
                    c.f = Some(FLaw::Power);
                }
            }
            SweepAxis::Kappa => c.kappa = value,
            SweepAxis::N => {
                if value.fract() != 0.0 || value < 3.0 {
                    return Err(Error::config("values", format!("grid size must be an integer >= 3, got {value}")));
                }
                c.n = Some(value as usize);
            }
            SweepAxis::Dt => {
                let mut scheme = c.scheme.unwrap_or_default();
                scheme.dt_initial = value;
                scheme.dt_max = value;
                scheme.adaptive = false;
                c.scheme = Some(scheme);
            }
        }
        Ok(c)
    }
}

/// Grid-refinement study on a scenario with an exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    #[serde(default = "default_levels")]
    pub n_values: Vec<usize>,
    /// Explicit time steps, one per level. When absent, `dt = dt_factor·dx²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_values: Option<Vec<f64>>,
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    pub base: RunConfig,
}

fn default_levels() -> Vec<usize> {
    vec![33, 65, 129]
}

fn default_dt_factor() -> f64 {
    0.5
}

impl ConvergeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ConvergeConfig =
            toml::from_str(text).map_err(|e| Error::config(toml_field(&e), e.message().to_string()))?;
        if c.n_values.len() < 2 {
            return Err(Error::config("n_values", "need at least two resolutions"));
        }
        if let Some(dts) = &c.dt_values {
            if dts.len() != c.n_values.len() {
                return Err(Error::config("dt_values", "need one time step per resolution"));
            }
        }
        if !(c.dt_factor > 0.0) {
            return Err(Error::config("dt_factor", "must be positive"));
        }
        Ok(c)
    }
}
