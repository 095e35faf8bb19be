use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::model::{InitialData, Regularity};

/// Smooth cutoff: 1 on `s ≤ 2`, 0 on `s ≥ 4`, C^∞ in between.
pub fn cutoff(s: f64) -> f64 {
    let psi = |r: f64| if r > 0.0 { (-1.0 / r).exp() } else { 0.0 };
    let r = (4.0 - s) / 2.0;
    let (a, b) = (psi(r), psi(1.0 - r));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// DST-I of the interior nodes; coefficient `k − 1` multiplies `sin(πkj/N)`.
fn sine_coefficients(f: &[f64]) -> Vec<f64> {
    let big_n = f.len() - 1;
    (1..big_n)
        .map(|k| {
            let s: f64 = (1..big_n)
                .map(|j| f[j] * (PI * (k * j) as f64 / big_n as f64).sin())
                .sum();
            2.0 * s / big_n as f64
        })
        .collect()
}

fn sine_synthesis(c: &[f64], n: usize) -> Vec<f64> {
    let big_n = n - 1;
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate().take(big_n).skip(1) {
        *o = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * (PI * ((k + 1) * j) as f64 / big_n as f64).sin())
            .sum();
    }
    out
}

/// DCT-I with half weights at both ends.
fn cosine_coefficients(f: &[f64]) -> Vec<f64> {
    let big_n = f.len() - 1;
    (0..=big_n)
        .map(|k| {
            let s: f64 = (0..=big_n)
                .map(|j| {
                    let w = if j == 0 || j == big_n { 0.5 } else { 1.0 };
                    w * f[j] * (PI * (k * j) as f64 / big_n as f64).cos()
                })
                .sum();
            2.0 * s / big_n as f64
        })
        .collect()
}

fn cosine_synthesis(c: &[f64]) -> Vec<f64> {
    let big_n = c.len() - 1;
    (0..=big_n)
        .map(|j| {
            c.iter()
                .enumerate()
                .map(|(k, ck)| {
                    let w = if k == 0 || k == big_n { 0.5 } else { 1.0 };
                    w * ck * (PI * (k * j) as f64 / big_n as f64).cos()
                })
                .sum()
        })
        .collect()
}

fn filter_sine(f: &[f64], eps: f64) -> Field {
    let mut c = sine_coefficients(f);
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= cutoff((k + 1) as f64 * eps);
    }
    sine_synthesis(&c, f.len()).into()
}

fn filter_cosine(f: &[f64], eps: f64) -> Field {
    let mut c = cosine_coefficients(f);
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= cutoff(k as f64 * eps);
    }
    cosine_synthesis(&c).into()
}

/// Smooths initial data by damping eigenmodes above wavenumber `~2/eps`:
/// sine modes for u and v, cosine modes for Θ. Θ is clamped at zero.
pub fn mollify(data: &InitialData, eps: f64, grid: &Grid1D) -> Result<InitialData> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    grid.check(&data.u0)?;
    grid.check(&data.v0)?;
    grid.check(&data.theta0)?;
    Ok(InitialData {
        u0: filter_sine(&data.u0, eps),
        v0: filter_sine(&data.v0, eps),
        theta0: filter_cosine(&data.theta0, eps).map(|t| t.max(0.0)),
        regularity: Regularity::Smooth,
    })
}

/// `W^{1,2}` norm of `a − b`.
pub fn w12_distance(a: &[f64], b: &[f64], grid: &Grid1D) -> Result<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.check(&d)?;
    Ok((grid.trapezoid_map(&d, |x| x * x) + grid.gradient_energy(&d)?).sqrt())
}

/// `W^{2,2}` norm of `a − b` for fields vanishing at both ends; the second
/// difference at the ends uses the odd reflection.
pub fn w22_distance(a: &[f64], b: &[f64], grid: &Grid1D) -> Result<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.check(&d)?;
    let n = d.len();
    let h2 = grid.dx() * grid.dx();
    let lap: Vec<f64> = (0..n)
        .map(|j| {
            let l = if j == 0 { -d[1] } else { d[j - 1] };
            let r = if j == n - 1 { -d[n - 2] } else { d[j + 1] };
            (l - 2.0 * d[j] + r) / h2
        })
        .collect();
    Ok((grid.trapezoid_map(&d, |x| x * x) + grid.gradient_energy(&d)? + grid.trapezoid_map(&lap, |x| x * x)).sqrt())
}

/// `W^{1,4}` norm of `a − b` with cellwise slopes.
pub fn w14_distance(a: &[f64], b: &[f64], grid: &Grid1D) -> Result<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.check(&d)?;
    let dx = grid.dx();
    let slopes: f64 = d.windows(2).map(|w| ((w[1] - w[0]) / dx).powi(4) * dx).sum();
    Ok((grid.trapezoid_map(&d, |x| x.powi(4)) + slopes).powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn corner_data(g: &Grid1D) -> InitialData {
        let n = g.n();
        let mut v0 = Field::from_fn(g, |x| 0.2 * (x / 0.3).min((1.0 - x) / 0.7));
        v0[0] = 0.0;
        v0[n - 1] = 0.0;
        InitialData {
            u0: Field::zeros(n),
            v0,
            theta0: Field::from_fn(g, |x| 0.5 + 0.5 * (1.0 - (x - 0.5).abs() / 0.25).max(0.0)),
            regularity: Regularity::Rough,
        }
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(2.0), 1.0);
        assert_eq!(cutoff(4.0), 0.0);
        assert_abs_diff_eq!(cutoff(3.0), 0.5, epsilon = 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let c = cutoff(2.0 + 0.02 * i as f64);
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn transforms_invert() {
        let g = Grid1D::new(1.0, 17).unwrap();
        let f: Vec<f64> = g.nodes().map(|x| x * x * (1.3 - x)).collect();
        let back = cosine_synthesis(&cosine_coefficients(&f));
        for (a, b) in f.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        let mut s = f.clone();
        s[0] = 0.0;
        s[16] = 0.0;
        let back = sine_synthesis(&sine_coefficients(&s), 17);
        for (a, b) in s.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn low_modes_pass_unchanged() {
        let g = Grid1D::new(1.0, 65).unwrap();
        let mut u0 = Field::from_fn(&g, |x| (PI * x).sin());
        u0[64] = 0.0;
        let data = InitialData {
            u0: u0.clone(),
            v0: u0.scaled(0.5),
            theta0: Field::from_fn(&g, |x| 1.0 + 0.5 * (PI * x).cos()),
            regularity: Regularity::Smooth,
        };
        let m = mollify(&data, 0.5, &g).unwrap();
        for i in 0..65 {
            assert_abs_diff_eq!(m.u0[i], data.u0[i], epsilon = 1e-13);
            assert_abs_diff_eq!(m.theta0[i], data.theta0[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn corner_data_converge_monotonically() {
        let g = Grid1D::new(1.0, 129).unwrap();
        let data = corner_data(&g);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for k in 1..=6 {
            let eps = 0.5f64.powi(k);
            let m = mollify(&data, eps, &g).unwrap();
            let n = g.n();
            assert_eq!(m.u0[0], 0.0);
            assert_eq!(m.v0[n - 1], 0.0);
            let d_theta = w12_distance(&m.theta0, &data.theta0, &g).unwrap();
            let d_v = w14_distance(&m.v0, &data.v0, &g).unwrap();
            assert!(d_theta <= prev.0 + 1e-12, "eps {eps}: {d_theta} > {}", prev.0);
            assert!(d_v <= prev.1 + 1e-12, "eps {eps}: {d_v} > {}", prev.1);
            prev = (d_theta, d_v);
        }
        assert!(prev.0 < 0.1, "final W12 distance {}", prev.0);
    }

    #[test]
    fn eps_outside_unit_interval_is_rejected() {
        let g = Grid1D::new(1.0, 9).unwrap();
        let data = corner_data(&g);
        assert!(mollify(&data, 0.0, &g).is_err());
        assert!(mollify(&data, 1.0, &g).is_err());
    }
}
