use aklab_core::scalarfuncs::{audit_profile, t_sweep, ConformalProfile};
use proptest::prelude::*;

/// Bisection on `2t y^3 - c y - 1 = 0` in `y = e^{-F}`.
fn bisect_big_f(c: f64, t: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0 / c.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * t * mid.powi(3) - c * mid - 1.0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    -(0.5 * (lo + hi)).ln()
}

/// Adaptive Simpson quadrature used as an independent oracle.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn oracle_f(c: f64, t: f64) -> f64 {
    let fprime = |s: f64| {
        let big_f = bisect_big_f(c, s);
        2.0 / (6.0 * s - c * (2.0 * big_f).exp())
    };
    let s = t.cbrt();
    -s * adaptive_simpson(&|sigma: f64| 3.0 * fprime(sigma.powi(3)) * sigma, 0.0, s, 1e-12)
}

#[test]
fn big_f_at_zero_is_log_abs_c() {
    for c in [-0.5, -1.0, -2.0] {
        let p = ConformalProfile::new(c).unwrap();
        assert!((p.eval_F(0.0).unwrap() - c.abs().ln()).abs() < 1e-12);
    }
    let p = ConformalProfile::new(-2.0).unwrap();
    assert!((p.eval_F(0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn big_f_at_one_matches_bisection() {
    let p = ConformalProfile::new(-1.0).unwrap();
    let v = p.eval_F(1.0).unwrap();
    assert!((v - bisect_big_f(-1.0, 1.0)).abs() < 1e-13);
    assert!((v - 0.5280).abs() < 1e-4, "F(1) = {v}");
}

#[test]
fn closed_form_agrees_for_several_c() {
    for c in [-0.5, -1.0, -2.0] {
        let p = ConformalProfile::new(c).unwrap();
        for &t in t_sweep(1000, 1e-6, 1e4).iter().skip(1) {
            let gap = (p.eval_F(t).unwrap() - p.eval_F_closed_form(t).unwrap()).abs();
            assert!(gap < 1e-9, "c = {c}, t = {t}, gap = {gap}");
        }
    }
}

#[test]
fn big_f_prime_values() {
    let p = ConformalProfile::new(-1.0).unwrap();
    assert!((p.eval_F_prime(0.0).unwrap() - 2.0).abs() < 1e-14);
    let h = 1e-6;
    let fd = (p.eval_F(1.0 + h).unwrap() - p.eval_F(1.0 - h).unwrap()) / (2.0 * h);
    let v = p.eval_F_prime(1.0).unwrap();
    assert!(((v - fd) / v).abs() < 1e-6);
    let oracle = 2.0 / (6.0 + (2.0 * bisect_big_f(-1.0, 1.0)).exp());
    assert!((v - oracle).abs() < 1e-13);
    assert!((v - 0.22535).abs() < 1e-5, "F'(1) = {v}");
}

#[test]
fn big_f_second_matches_finite_difference() {
    let p = ConformalProfile::new(-1.0).unwrap();
    for t in [0.01f64, 0.5, 3.0, 40.0] {
        let h = 1e-5 * t.max(1.0);
        let fd = (p.eval_F_prime(t + h).unwrap() - p.eval_F_prime(t - h).unwrap()) / (2.0 * h);
        let v = p.eval_F_second(t).unwrap();
        assert!(((v - fd) / v).abs() < 1e-6, "t = {t}: {v} vs {fd}");
    }
}

#[test]
fn small_f_matches_adaptive_quadrature() {
    for c in [-1.0, -0.5] {
        let p = ConformalProfile::new(c).unwrap();
        for t in [1.0, 0.01, 250.0] {
            let v = p.eval_f(t).unwrap();
            let o = oracle_f(c, t);
            assert!(v < 0.0);
            assert!((v - o).abs() < 1e-9 * o.abs().max(1.0), "c = {c}, t = {t}: {v} vs {o}");
        }
    }
}

#[test]
fn small_f_is_monotone_decreasing() {
    let p = ConformalProfile::new(-1.0).unwrap();
    let (f1, f2) = (p.eval_f(1.0).unwrap(), p.eval_f(2.0).unwrap());
    assert!(f2 < f1 && f1 < 0.0);
    assert_eq!(p.eval_f(0.0).unwrap(), 0.0);
}

#[test]
fn small_f_prime_limit_and_finite_difference() {
    let p = ConformalProfile::new(-1.0).unwrap();
    assert!((p.eval_f_prime(0.0).unwrap() + 3.0).abs() < 1e-14);
    // The small-t expansion f(t) ≈ -(3/2) F'(0) t gives the same limit.
    let t = 1e-9;
    assert!((p.eval_f(t).unwrap() / t + 3.0).abs() < 1e-5);
    let h = 1e-6;
    let fd = (p.eval_f(1.0 + h).unwrap() - p.eval_f(1.0 - h).unwrap()) / (2.0 * h);
    let v = p.eval_f_prime(1.0).unwrap();
    assert!(((v - fd) / v).abs() < 1e-6, "{v} vs {fd}");
    assert!(p.eval_f_prime(-1.0).is_err());
}

#[test]
fn small_f_second_matches_finite_difference() {
    let p = ConformalProfile::new(-1.0).unwrap();
    for t in [0.1, 1.0, 30.0] {
        let h = 1e-5 * t;
        let fd = (p.eval_f_prime(t + h).unwrap() - p.eval_f_prime(t - h).unwrap()) / (2.0 * h);
        let v = p.eval_f_second(t).unwrap();
        assert!(((v - fd) / v).abs() < 1e-5, "t = {t}: {v} vs {fd}");
    }
}

#[test]
fn negative_argument_is_domain_error() {
    let p = ConformalProfile::new(-1.0).unwrap();
    assert!(p.eval_F(-1e-3).is_err());
    assert!(p.eval_f(-1.0).is_err());
    assert!(p.eval_F_prime(f64::NAN).is_err());
}

#[test]
fn sweep_audit_meets_all_bounds() {
    for c in [-0.5, -1.0, -2.0] {
        let p = ConformalProfile::new(c).unwrap();
        let audit = audit_profile(&p, &t_sweep(1000, 1e-6, 1e4)).unwrap();
        assert!(audit.max_functional_residual <= 1e-10, "{audit:?}");
        assert!(audit.f_at_zero_error <= 1e-12);
        assert!(audit.max_closed_form_gap <= 1e-9, "{audit:?}");
        assert_eq!(audit.f_zero_value, 0.0);
        assert!(audit.max_f_prime < 0.0);
        assert_eq!(audit.f_prime_monotone_violations, 0, "{audit:?}");
        assert!(audit.min_positivity > 0.0);
        assert!(audit.max_positivity_rel_gap <= 1e-6, "{audit:?}");
        assert!(audit.min_monotonicity_gap >= 0.0, "{audit:?}");
    }
}

proptest! {
    #[test]
    fn functional_equation_holds(c in -3.0f64..-0.2, log_t in -6.0f64..4.0) {
        let p = ConformalProfile::new(c).unwrap();
        let t = 10f64.powf(log_t);
        let big_f = p.eval_F(t).unwrap();
        prop_assert!(p.functional_residual(t, big_f).abs() <= 1e-10);
        prop_assert!(p.eval_F_prime(t).unwrap() > 0.0);
    }

    #[test]
    fn positivity_combination_is_positive(c in -3.0f64..-0.2, log_t in -6.0f64..4.0) {
        let p = ConformalProfile::new(c).unwrap();
        let t = 10f64.powf(log_t);
        let pos = p.positivity_combination(t).unwrap();
        prop_assert!(pos > 0.0);
        prop_assert!(((p.aux_log_derivative(t) - pos) / pos).abs() < 1e-6);
    }
}
