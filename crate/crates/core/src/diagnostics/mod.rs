//! Trajectory diagnostics: energy budget, Lq balance, z-transform residual,
//! running monitors, maximal-regularity constant estimation, derived
//! constants, and blow-up detection.

mod balance;
mod monitors;
mod regularity;
mod ztransform;

pub use balance::{energy, lq_balance, strong_form_residual, EnergyBudget, LqBalance, StrongResidual};
pub use monitors::{blowup_check, monitors_update, BlowupReport, TheoryMonitors};
pub use regularity::{
    estimate_k, estimate_k_with, theory_constants, trial_ratio, KEstimate, KSettings, TheoryConstants, TrialFamily,
};
pub(crate) use monitors::monitors_at;
pub use ztransform::{z_residual, z_transform, ZResidual};

/// Least-squares slope of `ys` against `xs`. Returns NaN for fewer than two
/// points or degenerate abscissae.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx).powi(2);
    }
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::fit_slope;

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((fit_slope(&xs, &ys) - 2.0).abs() < 1e-14);
        assert!(fit_slope(&[1.0], &[1.0]).is_nan());
        assert!(fit_slope(&[1.0, 1.0], &[0.0, 2.0]).is_nan());
    }
}
