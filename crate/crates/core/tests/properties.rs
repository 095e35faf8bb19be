use std::f64::consts::PI;

use proptest::prelude::*;
use thermovisco::diagnostics::{blowup_check, energy, monitors_update, theory_constants, TheoryMonitors};
use thermovisco::dynamics::{step, PositivityPolicy, Scheme, SchemeConfig, State};
use thermovisco::grid::{BcKind, Field, Grid1D};
use thermovisco::model::{FFamily, GammaFamily, InitialData, MaterialLaws, Regularity};
use thermovisco::scenarios::mollify;

fn laws(delta: f64, alpha: f64) -> MaterialLaws {
    MaterialLaws::new(GammaFamily::Saturating, FFamily::Power, 1.0, delta, 1.0, alpha)
}

/// Smooth admissible state built from a few modes.
fn state(grid: &Grid1D, c: &[f64; 5]) -> State {
    let n = grid.n();
    let mut u = Field::from_fn(grid, |x| c[0] * (PI * x).sin() + c[1] * (2.0 * PI * x).sin());
    let mut v = Field::from_fn(grid, |x| c[2] * (PI * x).sin() + c[3] * (3.0 * PI * x).sin());
    for f in [&mut u, &mut v] {
        f[0] = 0.0;
        f[n - 1] = 0.0;
    }
    State {
        t: 0.0,
        u,
        v,
        theta: Field::from_fn(grid, |x| 1.0 + c[4] * (PI * x).cos()),
    }
}

fn coeffs() -> impl Strategy<Value = [f64; 5]> {
    [-0.5..0.5f64, -0.5..0.5f64, -1.0..1.0f64, -0.3..0.3f64, -0.9..0.9f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn second_difference_is_exact_on_quadratics(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, n in 5usize..40) {
        let g = Grid1D::new(1.7, n).unwrap();
        let f = Field::from_fn(&g, |x| a * x * x + b * x + c);
        let d2 = g.d2(&f, BcKind::DirichletBoth).unwrap();
        for v in d2.iter() {
            prop_assert!((v - 2.0 * a).abs() < 1e-8 * (1.0 + a.abs()) * (n * n) as f64);
        }
    }

    #[test]
    fn energy_parts_add_up(c in coeffs(), a in 0.1..5.0f64) {
        let g = Grid1D::new(1.0, 33).unwrap();
        let e = energy(&state(&g, &c), a, &g).unwrap();
        prop_assert_eq!(e.total, e.kinetic + e.elastic + e.thermal);
        prop_assert!(e.kinetic >= 0.0 && e.elastic >= 0.0);
    }

    #[test]
    fn constant_temperature_at_rest_is_fixed(theta in 0.0..5.0f64, dt in 1e-6..1.0f64, cn in any::<bool>()) {
        let g = Grid1D::new(1.0, 21).unwrap();
        let s = State { t: 0.0, u: Field::zeros(21), v: Field::zeros(21), theta: Field::constant(21, theta) };
        let l = MaterialLaws::new(GammaFamily::Saturating, FFamily::Zero, 1.0, 0.1, 1.0, 1.0);
        let scheme = if cn { Scheme::ImexCn } else { Scheme::ImexBe };
        let (next, clamped) = step(&s, &l, 1.0, &g, &SchemeConfig::fixed(scheme, dt), dt, None).unwrap();
        prop_assert_eq!(clamped, 0);
        prop_assert_eq!(next.u, s.u);
        prop_assert_eq!(next.v, s.v);
        prop_assert_eq!(next.theta, s.theta);
    }

    #[test]
    fn steps_keep_boundary_values(c in coeffs(), dt in 1e-5..1e-2f64, cn in any::<bool>(), alpha in 0.2..1.45f64) {
        let g = Grid1D::new(1.0, 33).unwrap();
        let scheme = if cn { Scheme::ImexCn } else { Scheme::ImexBe };
        let cfg = SchemeConfig::fixed(scheme, dt);
        let (next, _) = step(&state(&g, &c), &laws(0.2, alpha), 1.0, &g, &cfg, dt, None).unwrap();
        prop_assert_eq!(next.u[0], 0.0);
        prop_assert_eq!(next.u[32], 0.0);
        prop_assert_eq!(next.v[0], 0.0);
        prop_assert_eq!(next.v[32], 0.0);
        prop_assert!(next.theta.min() >= 0.0);
    }

    #[test]
    fn rejected_steps_suggest_smaller_dt(c in coeffs(), dt in 1e-5..1e-2f64) {
        let g = Grid1D::new(1.0, 33).unwrap();
        let cfg = SchemeConfig { positivity_policy: PositivityPolicy::RejectStep, ..SchemeConfig::fixed(Scheme::ImexBe, dt) };
        match step(&state(&g, &c), &laws(0.2, 1.0), 1.0, &g, &cfg, dt, None) {
            Ok((next, clamped)) => {
                prop_assert_eq!(clamped, 0);
                prop_assert!(next.theta.min() >= -cfg.positivity_tolerance);
            }
            Err(thermovisco::Error::PositivityRejected { suggested_dt, .. }) => prop_assert!(suggested_dt < dt),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn cumulative_monitors_never_decrease(c in coeffs(), dts in proptest::collection::vec(1e-4..1e-2f64, 1..8)) {
        let g = Grid1D::new(1.0, 33).unwrap();
        let s = state(&g, &c);
        let mut m = TheoryMonitors::default();
        for dt in dts {
            let next = monitors_update(&m, &s, dt, 2.0, 1.0, &g).unwrap();
            prop_assert!(next.cum_vx4 >= m.cum_vx4);
            prop_assert!(next.cum_theta_pow >= m.cum_theta_pow);
            prop_assert!(next.cum_thetaxx2 >= m.cum_thetaxx2);
            prop_assert!(next.cum_vxx2 >= m.cum_vxx2);
            prop_assert!(next.w12_theta >= 0.0 && next.l2_vx >= 0.0 && next.l2_uxx >= 0.0);
            m = next;
        }
    }

    #[test]
    fn blowup_fires_only_when_both_conditions_hold(trace in proptest::collection::vec(1e-3..1e3f64, 2..30), window in 2usize..10, threshold in 0.0..500.0f64, rate_min in -0.5..0.5f64) {
        let r = blowup_check(&trace, window, threshold, rate_min);
        let last = *trace.last().unwrap();
        prop_assert_eq!(r.fired, last > threshold && r.growth_rate > rate_min);
    }

    #[test]
    fn theory_constants_saturate_their_inequalities(k in 1e-3..1e3f64, a in 0.1..10.0f64, t0 in 0.1..10.0f64) {
        let c = theory_constants(k, a, t0, 1.2).unwrap();
        prop_assert!((256.0 * k * c.delta_est.powi(4) - 0.25).abs() <= 1e-12);
        prop_assert!((864.0 * k * a.powi(4) * t0 / c.kappa_est.powi(3) - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn saturating_laws_satisfy_hypotheses(g0 in 0.1..5.0f64, delta in 0.0..2.0f64, kf in 0.1..5.0f64, alpha in 0.05..1.49f64) {
        let l = MaterialLaws::new(GammaFamily::Saturating, FFamily::Power, g0, delta, kf, alpha);
        let r = l.validate_hypotheses(20.0, 100);
        prop_assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn mollified_data_are_compatible(c in coeffs(), eps in 0.02..0.9f64, corner in 0.1..0.9f64) {
        let g = Grid1D::new(1.0, 33).unwrap();
        let s = state(&g, &c);
        let data = InitialData {
            u0: s.u,
            v0: s.v,
            theta0: Field::from_fn(&g, |x| (0.5 - (x - corner).abs()).max(0.0)),
            regularity: Regularity::Rough,
        };
        let m = mollify(&data, eps, &g).unwrap();
        prop_assert_eq!(m.u0[0], 0.0);
        prop_assert_eq!(m.u0[32], 0.0);
        prop_assert_eq!(m.v0[0], 0.0);
        prop_assert_eq!(m.v0[32], 0.0);
        prop_assert!(m.theta0.min() >= 0.0);
        prop_assert!(m.validate(&g).is_ok());
    }
}
