use crate::error::{Error, Result};

/// Tridiagonal system `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n−1]` are ignored. The matrix must be (weakly)
/// diagonally dominant with a strictly dominant row somewhere; the Thomas
/// algorithm is then stable without pivoting.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        debug_assert_eq!(rhs.len(), n);
        let mut strict = false;
        for i in 0..n {
            let off = if i > 0 { self.lower[i].abs() } else { 0.0 }
                + if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            let d = self.diag[i].abs();
            if !(d.is_finite() && off.is_finite()) || d < off * (1.0 - 1e-12) {
                return Err(Error::Solve(format!(
                    "row {i} is not diagonally dominant (|diag| = {d:e}, off-diagonal sum = {off:e})"
                )));
            }
            strict |= d > off;
        }
        if !strict {
            return Err(Error::Solve("matrix is singular (no strictly dominant row)".into()));
        }
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut denom = self.diag[0];
        c[0] = if n > 1 { self.upper[0] / denom } else { 0.0 };
        x[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.lower[i] * c[i - 1];
            if denom == 0.0 {
                return Err(Error::Solve(format!("zero pivot at row {i}")));
            }
            if i + 1 < n {
                c[i] = self.upper[i] / denom;
            }
            x[i] = (rhs[i] - self.lower[i] * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_like_system() {
        let n = 6;
        let mut m = Tridiagonal::new(n);
        for i in 0..n {
            m.diag[i] = 4.0;
            m.lower[i] = -1.0;
            m.upper[i] = -1.0;
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                4.0 * x_true[i]
                    - if i > 0 { x_true[i - 1] } else { 0.0 }
                    - if i + 1 < n { x_true[i + 1] } else { 0.0 }
            })
            .collect();
        let x = m.solve(&rhs).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_dominant() {
        let mut m = Tridiagonal::new(3);
        m.diag = vec![1.0, 0.5, 1.0];
        m.lower = vec![0.0, 1.0, 0.2];
        m.upper = vec![0.2, 1.0, 0.0];
        assert!(matches!(m.solve(&[1.0, 1.0, 1.0]), Err(Error::Solve(_))));
    }
}
