use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BcKind, Field, Grid1D};
use crate::par::{self, Exec};
use crate::tridiag::Tridiagonal;

/// Source of `(z₀, g)` pairs for a maximal-regularity trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum TrialFamily {
    /// `z₀ = sin(πx/(2L))`, `g = 0`.
    Eigenmode,
    /// Random combinations of the first `modes` mixed eigenmodes for `z₀`,
    /// and of the same modes with random oscillating time factors for `g`.
    RandomModes { modes: usize },
    /// `z₀ = 0`, `g = 0`. Always skipped.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub p: f64,
    pub d: f64,
    /// Per-trial ratio, `None` for skipped degenerate trials.
    pub ratios: Vec<Option<f64>>,
    /// Running maximum after each trial (NaN until the first valid trial).
    pub running_max: Vec<f64>,
    pub k_est: f64,
}

/// Settings for [`estimate_k_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSettings {
    pub p: f64,
    pub d: f64,
    pub trials: usize,
    pub t_final: f64,
    pub steps: usize,
    pub modes: usize,
    pub seed: u64,
}

impl Default for KSettings {
    fn default() -> Self {
        KSettings {
            p: 4.0,
            d: 1.0,
            trials: 8,
            t_final: 1.0,
            steps: 1000,
            modes: 4,
            seed: 0,
        }
    }
}

/// Lower bound for the maximal-regularity constant `K(p, D)` of
/// `z_t = D z_xx + g`, `z(0) = 0`, `z_x(L) = 0`.
///
/// Trial 0 is the single eigenmode; the rest draw random mode combinations
/// from a generator seeded with `seed + trial`.
pub fn estimate_k(p: f64, d: f64, trials: usize, grid: &Grid1D, t_final: f64, seed: u64) -> Result<KEstimate> {
    let settings = KSettings {
        p,
        d,
        trials,
        t_final,
        seed,
        ..KSettings::default()
    };
    estimate_k_with(&settings, grid, Exec::default())
}

pub fn estimate_k_with(s: &KSettings, grid: &Grid1D, exec: Exec) -> Result<KEstimate> {
    if !(s.p > 1.0) {
        return Err(Error::domain(format!("estimate_k needs p > 1, got {}", s.p)));
    }
    if !(s.d > 0.0) || !(s.t_final > 0.0) || s.steps == 0 {
        return Err(Error::domain("estimate_k needs D > 0, T > 0 and at least one step"));
    }
    if s.trials == 0 {
        return Err(Error::domain("estimate_k needs at least one trial"));
    }
    let families: Vec<(usize, TrialFamily)> = (0..s.trials)
        .map(|i| {
            let fam = if i == 0 {
                TrialFamily::Eigenmode
            } else {
                TrialFamily::RandomModes { modes: s.modes.max(1) }
            };
            (i, fam)
        })
        .collect();
    let results = par::map(exec, families, |(i, fam)| {
        trial_ratio(fam, s, grid, s.seed.wrapping_add(i as u64))
    });
    let mut ratios = Vec::with_capacity(s.trials);
    for r in results {
        ratios.push(r?);
    }
    let mut running_max = Vec::with_capacity(ratios.len());
    let mut best = f64::NAN;
    for r in &ratios {
        if let Some(r) = *r {
            best = if best.is_nan() { r } else { best.max(r) };
        }
        running_max.push(best);
    }
    Ok(KEstimate {
        p: s.p,
        d: s.d,
        ratios,
        running_max,
        k_est: best,
    })
}

/// Ratio `∫∫|z_xx|^p / (∫|z₀ₓₓ|^p + ∫∫|g|^p)` for one trial, or `None` when
/// both denominator terms vanish.
pub fn trial_ratio(family: TrialFamily, s: &KSettings, grid: &Grid1D, seed: u64) -> Result<Option<f64>> {
    let length = grid.length();
    let mode = |m: usize| move |x: f64| ((m as f64 - 0.5) * PI * x / length).sin();
    let (z0, g_modes): (Field, Vec<(usize, f64, f64, f64)>) = match family {
        TrialFamily::Zero => (Field::zeros(grid.n()), Vec::new()),
        TrialFamily::Eigenmode => (Field::from_fn(grid, mode(1)), Vec::new()),
        TrialFamily::RandomModes { modes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut z0 = Field::zeros(grid.n());
            let mut g = Vec::with_capacity(modes);
            for m in 1..=modes {
                let lam = ((m as f64 - 0.5) * PI / length).powi(2);
                let c: f64 = rng.gen_range(-1.0..1.0);
                let amp = s.d * lam * rng.gen_range(-1.0..1.0);
                let omega = rng.gen_range(0.0..6.0 * PI / s.t_final);
                let phase = rng.gen_range(0.0..2.0 * PI);
                let shape = Field::from_fn(grid, mode(m));
                for (z, b) in z0.iter_mut().zip(shape.iter()) {
                    *z += c * b;
                }
                g.push((m, amp, omega, phase));
            }
            (z0, g)
        }
    };
    let g_at = |t: f64| -> Field {
        let mut out = Field::zeros(grid.n());
        for &(m, amp, omega, phase) in &g_modes {
            let f = amp * (omega * t + phase).cos();
            for (i, o) in out.iter_mut().enumerate() {
                *o += f * mode(m)(grid.x(i));
            }
        }
        out
    };
    let forced = !g_modes.is_empty();
    mixed_problem_ratio(s, grid, &z0, if forced { Some(&g_at) } else { None })
}

fn mixed_problem_ratio(
    s: &KSettings,
    grid: &Grid1D,
    z0: &Field,
    g: Option<&dyn Fn(f64) -> Field>,
) -> Result<Option<f64>> {
    let p = s.p;
    let dt = s.t_final / s.steps as f64;
    let (big, mut z) = grid.reflect_extend(z0)?;
    let n = big.n();
    let h2 = big.dx() * big.dx();
    let lp = |f: &Field| -> Result<f64> {
        let zxx = big.d2(f, BcKind::DirichletBoth)?;
        let zxx = grid.restrict(&zxx)?;
        Ok(grid.trapezoid_map(&zxx, |w| w.abs().powf(p)))
    };
    let g_lp = |t: f64| -> f64 {
        g.map_or(0.0, |g| grid.trapezoid_map(&g(t), |w| w.abs().powf(p)))
    };
    let g_big = |t: f64| -> Result<Field> {
        match g {
            Some(g) => Ok(grid.reflect_extend(&g(t))?.1),
            None => Ok(Field::zeros(n)),
        }
    };

    let z0_term = lp(&z)?;
    let mut num_prev = z0_term;
    let mut g_prev = g_lp(0.0);
    let (mut num, mut g_term) = (0.0, 0.0);

    // Crank–Nicolson on the interior of the doubled Dirichlet problem.
    let m = n - 2;
    let r = 0.5 * dt * s.d / h2;
    let mut mat = Tridiagonal::new(m);
    for k in 0..m {
        mat.diag[k] = 1.0 + 2.0 * r;
        if k > 0 {
            mat.lower[k] = -r;
        }
        if k + 1 < m {
            mat.upper[k] = -r;
        }
    }
    let mut gb_prev = g_big(0.0)?;
    for step in 1..=s.steps {
        let t = step as f64 * dt;
        let gb = g_big(t)?;
        let rhs: Vec<f64> = (1..n - 1)
            .map(|i| {
                z[i] + r * (z[i - 1] - 2.0 * z[i] + z[i + 1]) + 0.5 * dt * (gb_prev[i] + gb[i])
            })
            .collect();
        let inner = mat.solve(&rhs)?;
        z[1..n - 1].copy_from_slice(&inner);
        z[0] = 0.0;
        z[n - 1] = 0.0;
        gb_prev = gb;

        let num_now = lp(&z)?;
        let g_now = g_lp(t);
        num += 0.5 * dt * (num_prev + num_now);
        g_term += 0.5 * dt * (g_prev + g_now);
        num_prev = num_now;
        g_prev = g_now;
    }
    let denom = z0_term + g_term;
    if denom == 0.0 {
        return Ok(None);
    }
    Ok(Some(num / denom))
}

/// Constants derived from an estimate of `K`, labelled as estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub k_est: f64,
    pub delta_est: f64,
    pub kappa_est: f64,
    pub q: f64,
    /// `q > 1`, i.e. `alpha > 3/4`.
    pub q_admissible: bool,
}

/// `delta_est` and `kappa_est` saturate `256 K δ⁴ ≤ 1/4` and
/// `27·32 K a⁴ T₀ / κ³ ≤ 1/4`; `q = 4α − 2`.
pub fn theory_constants(k_est: f64, a: f64, t0: f64, alpha: f64) -> Result<TheoryConstants> {
    if !(k_est > 0.0) || !(a > 0.0) || !(t0 > 0.0) {
        return Err(Error::domain(format!(
            "theory constants need K, a, T0 > 0 (K = {k_est}, a = {a}, T0 = {t0})"
        )));
    }
    let q = 4.0 * alpha - 2.0;
    Ok(TheoryConstants {
        k_est,
        delta_est: (1.0 / (1024.0 * k_est)).powf(0.25),
        kappa_est: (3456.0 * k_est * a.powi(4) * t0).cbrt(),
        q,
        q_admissible: q > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn eigenmode_ratio_matches_decay_integral() {
        let g = Grid1D::new(1.0, 129).unwrap();
        let s = KSettings::default();
        let r = trial_ratio(TrialFamily::Eigenmode, &s, &g, 0).unwrap().unwrap();
        let lam = (PI / 2.0).powi(2);
        let exact = (1.0 - (-4.0 * lam).exp()) / (4.0 * lam);
        assert_relative_eq!(r, exact, max_relative = 5e-3);
    }

    #[test]
    fn zero_trial_is_skipped() {
        let g = Grid1D::new(1.0, 33).unwrap();
        let r = trial_ratio(TrialFamily::Zero, &KSettings::default(), &g, 0).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn running_max_is_monotone() {
        let g = Grid1D::new(1.0, 33).unwrap();
        let s = KSettings {
            trials: 5,
            steps: 200,
            ..KSettings::default()
        };
        let k = estimate_k_with(&s, &g, Exec::Sequential).unwrap();
        assert_eq!(k.running_max.len(), 5);
        for w in k.running_max.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(k.k_est, *k.running_max.last().unwrap());
    }

    #[test]
    fn constants_examples() {
        let c = theory_constants(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(c.delta_est, 2f64.powf(-2.5), epsilon = 1e-15);
        assert_abs_diff_eq!(c.kappa_est, 15.119, epsilon = 1e-3);
        assert_eq!(c.q, 2.0);
        assert!(c.q_admissible);
        assert!(!theory_constants(1.0, 1.0, 1.0, 0.7).unwrap().q_admissible);
        assert!(theory_constants(0.0, 1.0, 1.0, 1.0).is_err());
    }
}
