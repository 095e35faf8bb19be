//! Material laws γ(Θ), f(Θ), their structural hypotheses, and initial-data bounds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BcKind, Field, Grid1D};

/// Piecewise-linear law given by knots `(ξ_k, value_k)` with strictly
/// increasing ξ. Values are clamped to the end knots outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("table needs at least one knot"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::domain("table contains non-finite entries"));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain(format!(
                "table abscissae must be strictly increasing ({} followed by {})",
                w[0].0, w[1].0
            )));
        }
        Ok(Table {
            xs: points.iter().map(|p| p.0).collect(),
            ys: points.iter().map(|p| p.1).collect(),
        })
    }

    /// Reads a two-column whitespace- or comma-separated text file. Lines
    /// starting with `#` are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::domain(format!("{}:{}: cannot parse `{s}`", path.display(), lineno + 1))
                })
            };
            if cols.len() != 2 {
                return Err(Error::domain(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            }
            points.push((parse(cols[0])?, parse(cols[1])?));
        }
        Table::new(&points)
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, xi: f64) -> Option<usize> {
        let n = self.xs.len();
        if n < 2 || xi <= self.xs[0] || xi >= self.xs[n - 1] {
            return None;
        }
        Some(self.xs.partition_point(|&x| x <= xi) - 1)
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match self.segment(xi) {
            None if xi <= self.xs[0] => self.ys[0],
            None => *self.ys.last().unwrap(),
            Some(k) => {
                let t = (xi - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
                self.ys[k] + t * (self.ys[k + 1] - self.ys[k])
            }
        }
    }

    pub fn slope(&self, xi: f64) -> f64 {
        match self.segment(xi) {
            None => 0.0,
            Some(k) => (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum GammaFamily {
    /// γ ≡ γ₀.
    Constant,
    /// γ(ξ) = γ₀ + δ·ξ/(1+ξ).
    Saturating,
    Tabulated { table: Table },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum FFamily {
    Zero,
    /// f(ξ) = K_f·ξ.
    Linear,
    /// f(ξ) = K_f·((ξ+1)^α − 1).
    Power,
    Tabulated { table: Table },
}

/// Viscosity and coupling laws together with the hypothesis parameters
/// `γ₀ ≤ γ ≤ γ₀ + δ`, `f(0) = 0`, `|f(ξ)| ≤ K_f (ξ+1)^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialLaws {
    pub gamma_family: GammaFamily,
    pub f_family: FFamily,
    pub gamma0: f64,
    pub delta: f64,
    #[serde(rename = "K_f")]
    pub k_f: f64,
    pub alpha: f64,
}

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("material laws are defined for ξ ≥ 0, got {xi}")))
    }
}

impl MaterialLaws {
    pub fn new(
        gamma_family: GammaFamily,
        f_family: FFamily,
        gamma0: f64,
        delta: f64,
        k_f: f64,
        alpha: f64,
    ) -> Self {
        MaterialLaws {
            gamma_family,
            f_family,
            gamma0,
            delta,
            k_f,
            alpha,
        }
    }

    pub fn eval_gamma(&self, xi: f64) -> Result<f64> {
        check_xi(xi)?;
        Ok(self.gamma_at(xi))
    }

    pub fn eval_f(&self, xi: f64) -> Result<f64> {
        check_xi(xi)?;
        Ok(self.f_at(xi))
    }

    /// γ evaluated at `max(ξ, 0)`; used on solver fields where round-off may
    /// leave Θ marginally negative.
    pub fn gamma_at(&self, xi: f64) -> f64 {
        let xi = xi.max(0.0);
        match &self.gamma_family {
            GammaFamily::Constant => self.gamma0,
            GammaFamily::Saturating => self.gamma0 + self.delta * xi / (1.0 + xi),
            GammaFamily::Tabulated { table } => table.eval(xi),
        }
    }

    pub fn f_at(&self, xi: f64) -> f64 {
        let xi = xi.max(0.0);
        match &self.f_family {
            FFamily::Zero => 0.0,
            FFamily::Linear => self.k_f * xi,
            FFamily::Power => self.k_f * ((xi + 1.0).powf(self.alpha) - 1.0),
            FFamily::Tabulated { table } => table.eval(xi),
        }
    }

    pub fn gamma_prime(&self, xi: f64) -> f64 {
        let xi = xi.max(0.0);
        match &self.gamma_family {
            GammaFamily::Constant => 0.0,
            GammaFamily::Saturating => self.delta / ((1.0 + xi) * (1.0 + xi)),
            GammaFamily::Tabulated { table } => table.slope(xi),
        }
    }

    pub fn f_prime(&self, xi: f64) -> f64 {
        let xi = xi.max(0.0);
        match &self.f_family {
            FFamily::Zero => 0.0,
            FFamily::Linear => self.k_f,
            FFamily::Power => self.k_f * self.alpha * (xi + 1.0).powf(self.alpha - 1.0),
            FFamily::Tabulated { table } => table.slope(xi),
        }
    }

    pub fn gamma_field(&self, theta: &[f64]) -> Field {
        theta.iter().map(|&t| self.gamma_at(t)).collect::<Vec<_>>().into()
    }

    pub fn f_field(&self, theta: &[f64]) -> Field {
        theta.iter().map(|&t| self.f_at(t)).collect::<Vec<_>>().into()
    }

    /// Samples γ and f on `[0, xi_max]` (plus table knots) and checks every
    /// structural hypothesis. Failures are reported, never returned as errors.
    pub fn validate_hypotheses(&self, xi_max: f64, n_samples: usize) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.push("gamma0 > 0", self.gamma0 > 0.0, || format!("gamma0 = {}", self.gamma0));
        report.push("delta >= 0", self.delta >= 0.0, || format!("delta = {}", self.delta));
        report.push("K_f > 0", self.k_f > 0.0, || format!("K_f = {}", self.k_f));
        report.push(
            "alpha in (0, 3/2)",
            self.alpha > 0.0 && self.alpha < 1.5,
            || format!("alpha outside (0, 3/2): alpha = {}", self.alpha),
        );

        let n = n_samples.max(2);
        let xi_max = if xi_max > 0.0 { xi_max } else { 1.0 };
        let mut samples: Vec<f64> = (0..n).map(|k| xi_max * k as f64 / (n - 1) as f64).collect();
        if let GammaFamily::Tabulated { table } = &self.gamma_family {
            samples.extend(table.knots().map(|(x, _)| x).filter(|&x| x >= 0.0));
        }
        if let FFamily::Tabulated { table } = &self.f_family {
            samples.extend(table.knots().map(|(x, _)| x).filter(|&x| x >= 0.0));
        }

        let tol = 1e-12 * (1.0 + self.gamma0.abs() + self.delta.abs());
        let lo = self.gamma0;
        let hi = self.gamma0 + self.delta;
        let bad_gamma = samples.iter().map(|&xi| (xi, self.gamma_at(xi))).find(|&(_, g)| {
            !(g.is_finite() && g >= lo - tol && g <= hi + tol)
        });
        report.push("gamma0 <= gamma <= gamma0 + delta", bad_gamma.is_none(), || {
            let (xi, g) = bad_gamma.unwrap();
            format!("gamma({xi}) = {g} outside [{lo}, {hi}]")
        });

        let f0 = self.f_at(0.0);
        report.push("f(0) = 0", f0 == 0.0, || format!("f(0) = {f0}"));

        let bad_f = samples.iter().map(|&xi| (xi, self.f_at(xi))).find(|&(xi, f)| {
            let bound = self.k_f * (xi + 1.0).powf(self.alpha);
            !(f.is_finite() && f.abs() <= bound * (1.0 + 1e-12))
        });
        report.push("|f| <= K_f (xi+1)^alpha", bad_f.is_none(), || {
            let (xi, f) = bad_f.unwrap();
            format!(
                "|f({xi})| = {} exceeds K_f (xi+1)^alpha = {}",
                f.abs(),
                self.k_f * (xi + 1.0).powf(self.alpha)
            )
        });
        report
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, passed: bool, detail: impl FnOnce() -> String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: (!passed).then(detail),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    /// Θ₀ has zero end slopes and all fields are regular enough for classical solutions.
    Smooth,
    /// Only Θ₀ ∈ W^{1,2}, u₀ ∈ W^{2,2}, u₀ₜ ∈ W^{1,4}.
    Rough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u0: Field,
    pub v0: Field,
    pub theta0: Field,
    pub regularity: Regularity,
}

impl InitialData {
    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        grid.check(&self.u0)?;
        grid.check(&self.v0)?;
        grid.check(&self.theta0)?;
        let n = grid.n();
        for (name, f) in [("u0", &self.u0), ("v0", &self.v0)] {
            if f[0] != 0.0 || f[n - 1] != 0.0 {
                return Err(Error::domain(format!(
                    "{name} must vanish at both ends (got {} and {})",
                    f[0],
                    f[n - 1]
                )));
            }
        }
        if !(self.u0.is_finite() && self.v0.is_finite() && self.theta0.is_finite()) {
            return Err(Error::domain("initial data contain non-finite values"));
        }
        let min = self.theta0.min();
        if min < 0.0 {
            return Err(Error::domain(format!("theta0 must be nonnegative, min = {min}")));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> InitialData {
        InitialData {
            u0: self.u0.scaled(s),
            v0: self.v0.scaled(s),
            theta0: self.theta0.scaled(s),
            regularity: self.regularity,
        }
    }
}

/// Discrete aggregate initial-data bound together with its seven summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataBoundM {
    pub m: f64,
    /// `[‖u₀‖∞, ‖u₀ₓ‖∞, ‖u₀ₓₓ‖₂, ‖v₀‖∞, ‖v₀ₓ‖₄, ‖Θ₀‖∞, ‖Θ₀ₓ‖₂]`
    pub terms: [f64; 7],
}

pub fn data_bound_m(data: &InitialData, grid: &Grid1D) -> Result<DataBoundM> {
    grid.check(&data.u0)?;
    grid.check(&data.v0)?;
    grid.check(&data.theta0)?;
    let ux = grid.d1(&data.u0)?;
    let uxx = grid.d2(&data.u0, BcKind::DirichletBoth)?;
    let vx = grid.d1(&data.v0)?;
    let thx = grid.d1(&data.theta0)?;
    let terms = [
        data.u0.max_abs(),
        ux.max_abs(),
        grid.trapezoid_map(&uxx, |x| x * x).sqrt(),
        data.v0.max_abs(),
        grid.trapezoid_map(&vx, |x| x.powi(4)).powf(0.25),
        data.theta0.max_abs(),
        grid.trapezoid_map(&thx, |x| x * x).sqrt(),
    ];
    Ok(DataBoundM {
        m: terms.iter().sum(),
        terms,
    })
}

/// Energy-based bounds: `B = M²L/2 + aM²L/2 + ML` with
/// `∫v² ≤ 2B`, `∫u_x² ≤ 2B/a`, `∫Θ ≤ B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda1 {
    pub b: f64,
    pub v2: f64,
    pub ux2: f64,
    pub theta: f64,
}

pub fn lambda1_bound(m: f64, a: f64, length: f64) -> Lambda1 {
    debug_assert!(a > 0.0 && length > 0.0);
    let b = 0.5 * m * m * length + 0.5 * a * m * m * length + m * length;
    Lambda1 {
        b,
        v2: 2.0 * b,
        ux2: 2.0 * b / a,
        theta: b,
    }
}
