//! Uniform co-located mesh on (0, L) with second-order difference operators.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh with `n` nodes `x_i = i·dx`, `dx = L/(n−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n: usize,
    dx: f64,
}

/// Boundary-condition pairing used by [`Grid1D::d2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    DirichletBoth,
    NeumannBoth,
    /// Dirichlet at x = 0, Neumann at x = L.
    MixedLeftDirichletRightNeumann,
}

/// Nodal values co-located with the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field(vec![value; n])
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Field(grid.nodes().map(f).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Field(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain(format!("grid length must be positive, got {length}")));
        }
        if n < 3 {
            return Err(Error::domain(format!("grid needs at least 3 nodes, got {n}")));
        }
        Ok(Grid1D {
            length,
            n,
            dx: length / (n - 1) as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.length
        } else {
            i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    pub fn check(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: field.len(),
            });
        }
        Ok(())
    }

    /// First derivative: central in the interior, one-sided second order at the ends.
    pub fn d1(&self, field: &[f64]) -> Result<Field> {
        self.check(field)?;
        let n = self.n;
        let h = self.dx;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (field[i + 1] - field[i - 1]) / (2.0 * h);
        }
        out[0] = (-3.0 * field[0] + 4.0 * field[1] - field[2]) / (2.0 * h);
        out[n - 1] = (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) / (2.0 * h);
        Ok(Field(out))
    }

    /// Second derivative with the boundary treatment selected by `bc`.
    ///
    /// Neumann ends mirror the first interior node into a ghost node. Dirichlet
    /// ends report the one-sided second-order extrapolation
    /// `(2f₀ − 5f₁ + 4f₂ − f₃)/dx²`, which is exact on cubics.
    pub fn d2(&self, field: &[f64], bc: BcKind) -> Result<Field> {
        self.check(field)?;
        let n = self.n;
        let h2 = self.dx * self.dx;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (field[i + 1] - 2.0 * field[i] + field[i - 1]) / h2;
        }
        let (left_neumann, right_neumann) = match bc {
            BcKind::DirichletBoth => (false, false),
            BcKind::NeumannBoth => (true, true),
            BcKind::MixedLeftDirichletRightNeumann => (false, true),
        };
        out[0] = if left_neumann {
            2.0 * (field[1] - field[0]) / h2
        } else {
            self.dirichlet_end(field, true)
        };
        out[n - 1] = if right_neumann {
            2.0 * (field[n - 2] - field[n - 1]) / h2
        } else {
            self.dirichlet_end(field, false)
        };
        Ok(Field(out))
    }

    fn dirichlet_end(&self, f: &[f64], from_left: bool) -> f64 {
        let n = self.n;
        let h2 = self.dx * self.dx;
        let at = |k: usize| if from_left { f[k] } else { f[n - 1 - k] };
        if n >= 4 {
            (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2
        } else {
            (at(0) - 2.0 * at(1) + at(2)) / h2
        }
    }

    /// Conservative discretization of `(c w_x)_x` with arithmetic-mean
    /// half-node coefficients. Boundary entries are linearly extrapolated from
    /// the two nearest interior values.
    pub fn div_flux(&self, coef: &[f64], field: &[f64]) -> Result<Field> {
        self.check(coef)?;
        self.check(field)?;
        if let Some((i, c)) = coef.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
            return Err(Error::domain(format!(
                "flux coefficient must be positive, got {c} at node {i}"
            )));
        }
        let n = self.n;
        let h2 = self.dx * self.dx;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            let c_right = 0.5 * (coef[i] + coef[i + 1]);
            let c_left = 0.5 * (coef[i - 1] + coef[i]);
            out[i] = (c_right * (field[i + 1] - field[i]) - c_left * (field[i] - field[i - 1])) / h2;
        }
        if n >= 4 {
            out[0] = 2.0 * out[1] - out[2];
            out[n - 1] = 2.0 * out[n - 2] - out[n - 3];
        } else {
            out[0] = out[1];
            out[n - 1] = out[1];
        }
        Ok(Field(out))
    }

    /// Trapezoid rule over (0, L).
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check(field)?;
        Ok(self.trapezoid(field))
    }

    pub(crate) fn trapezoid(&self, field: &[f64]) -> f64 {
        let n = field.len();
        let inner: f64 = field[1..n - 1].iter().sum();
        self.dx * (inner + 0.5 * (field[0] + field[n - 1]))
    }

    /// Trapezoid integral of `g(field_i)` without allocating.
    pub(crate) fn trapezoid_map(&self, field: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        let n = field.len();
        let inner: f64 = field[1..n - 1].iter().map(|&x| g(x)).sum();
        self.dx * (inner + 0.5 * (g(field[0]) + g(field[n - 1])))
    }

    /// `∫ w_x²` for the piecewise-linear interpolant of the nodal data, i.e.
    /// `Σ (w_{i+1} − w_i)²/dx`.
    pub fn gradient_energy(&self, field: &[f64]) -> Result<f64> {
        self.check(field)?;
        Ok(field.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / self.dx)
    }

    /// `V(x_i) = ∫₀^{x_i} w` by cumulative trapezoid; `V(0) = 0`.
    pub fn cumulative_integral(&self, field: &[f64]) -> Result<Field> {
        self.check(field)?;
        let mut out = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        out.push(0.0);
        for w in field.windows(2) {
            acc += 0.5 * self.dx * (w[0] + w[1]);
            out.push(acc);
        }
        Ok(Field(out))
    }

    /// Doubled grid on (0, 2L) with `2n − 1` nodes.
    pub fn doubled(&self) -> Grid1D {
        Grid1D {
            length: 2.0 * self.length,
            n: 2 * self.n - 1,
            dx: self.dx,
        }
    }

    /// Even reflection about x = L onto the doubled grid.
    pub fn reflect_extend(&self, field: &[f64]) -> Result<(Grid1D, Field)> {
        self.check(field)?;
        let n = self.n;
        let mut out = Vec::with_capacity(2 * n - 1);
        out.extend_from_slice(field);
        out.extend(field[..n - 1].iter().rev());
        Ok((self.doubled(), Field(out)))
    }

    /// Restriction of a doubled-grid field back to (0, L).
    pub fn restrict(&self, doubled: &[f64]) -> Result<Field> {
        if doubled.len() != 2 * self.n - 1 {
            return Err(Error::SizeMismatch {
                expected: 2 * self.n - 1,
                got: doubled.len(),
            });
        }
        Ok(Field(doubled[..self.n].to_vec()))
    }
}
