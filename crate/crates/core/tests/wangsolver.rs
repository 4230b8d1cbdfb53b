use std::f64::consts::PI;

use aklab_core::error::LabError;
use aklab_core::linalg::M2;
use aklab_core::scalarfuncs::ConformalProfile;
use aklab_core::surfacefields::scenarios::{titeica_field, ShearMap};
use aklab_core::surfacefields::{FieldState, Grid, TorusGrid};
use aklab_core::wangsolver::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

fn sample(n: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    (0..n * n).map(|i| f((i % n) as f64 / n as f64, (i / n) as f64 / n as f64)).collect()
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Real root of `x³ − x² − 1 = 0` by bisection.
fn cubic_root_oracle() -> f64 {
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powi(3) - mid * mid - 1.0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn zero_phi_gives_zero() {
    let n = 32;
    let p = WangProblem::new(grid(n), vec![0.0; n * n]).unwrap();
    let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    assert_eq!(s.iterations, 0);
    assert!(s.u.iter().all(|u| *u == 0.0));
}

#[test]
fn constant_phi_matches_scalar_root() {
    let u_star = cubic_root_oracle().ln();
    assert!((u_star - 0.38224).abs() < 1e-5);
    assert!((constant_solution(2.0, -1.0).unwrap() - u_star).abs() < 1e-14);
    for n in [16, 64] {
        let p = WangProblem::new(grid(n), vec![2.0; n * n]).unwrap();
        let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
        assert!(s.u.iter().all(|u| (u - u_star).abs() <= 1e-10), "n = {n}");
    }
}

#[test]
fn solution_is_independent_of_initial_guess() {
    let n = 64;
    let phi = sample(n, |x, y| 2.0 + (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
    let p = WangProblem::new(grid(n), phi).unwrap();
    let a = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let u0: Vec<f64> = (0..n * n).map(|_| r.random_range(-0.5..0.5)).collect();
    let b = solve_wang(&p, &u0).unwrap();
    assert!(sup_gap(&a.u, &b.u) <= 1e-9);
    assert!(a.iterations <= 20 && a.residual_inf <= p.newton_tol);
    assert!(a.jacobian_margin <= 0.0 && b.jacobian_margin <= 0.0);
}

#[test]
fn newton_converges_quadratically() {
    let n = 64;
    let phi = sample(n, |x, y| 3.0 + 2.0 * (2.0 * PI * x).cos() * (4.0 * PI * y).sin());
    let p = WangProblem::new(grid(n), phi).unwrap();
    let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    let h = &s.history;
    assert!(h.len() >= 4, "{h:?}");
    // Once in the asymptotic regime, e_{k+1} ≤ C e_k² with a moderate C.
    let k = h.len() - 2;
    let (e0, e1) = (h[k - 1], h[k]);
    assert!(e1 <= 10.0 * e0 * e0 || e1 < 1e-13, "{h:?}");
}

#[test]
fn manufactured_solution_is_recovered() {
    let n = 64;
    let exact = sample(n, |x, _| 0.1 * (2.0 * PI * x).sin());
    let lap = sample(n, |x, _| -0.1 * 4.0 * PI * PI * (2.0 * PI * x).sin());
    let phi: Vec<f64> = (0..n * n).map(|i| (2.0 * exact[i].exp() - 2.0 - lap[i]) * (2.0 * exact[i]).exp()).collect();
    assert!(phi.iter().any(|v| *v < 0.0));
    assert!(WangProblem::new(grid(n), phi.clone()).is_err());
    let mut p = WangProblem { grid: grid(n), phi, k0: -1.0, newton_tol: 1e-12, max_iters: 30, allow_signed_phi: true };
    p.validate().unwrap();
    let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    assert!(sup_gap(&s.u, &exact) <= 1e-10, "{}", sup_gap(&s.u, &exact));
    p.allow_signed_phi = false;
    assert!(solve_wang(&p, &vec![0.0; n * n]).is_err());
}

#[test]
fn iteration_cap_reports_history() {
    let n = 32;
    let p = WangProblem::new(grid(n), vec![50.0; n * n]).unwrap().with_tolerance(1e-12, 1);
    match solve_wang(&p, &vec![0.0; n * n]) {
        Err(LabError::NoConvergence { iterations, history }) => {
            assert_eq!(iterations, 1);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn constant_cubic_on_flat_background() {
    // With k₀ = 0 the flat-torus equation gives e^{3u} = ‖q‖² and K_h − ‖q‖²_h = −1.
    let n = 32;
    let q2 = 1.7;
    let p = WangProblem::from_cubic(grid(n), &vec![q2; n * n], CubicNormalization::Halved).unwrap().with_k0(0.0);
    let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    assert!(s.u.iter().all(|u| (u - q2.ln() / 3.0).abs() < 1e-10));
    let r = vortex_residual(&p.grid, &s.u, &vec![q2; n * n], 0.0);
    assert!(r.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn fuchsian_surrogate_and_background_offset() {
    let n = 32;
    let p = WangProblem::new(grid(n), vec![0.0; n * n]).unwrap();
    let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    let r = vortex_residual(&p.grid, &s.u, &vec![0.0; n * n], -1.0);
    assert!(r.iter().all(|v| v.abs() <= p.newton_tol));
    // With k₀ = 0 the same solution leaves the residual e^{−u}.
    let r0 = vortex_residual(&p.grid, &s.u, &vec![0.0; n * n], 0.0);
    assert!(r0.iter().zip(&s.u).all(|(v, u)| (v - (-u).exp()).abs() < 1e-12));
}

#[test]
fn smooth_cubic_vortex_residual() {
    let n = 64;
    let q2 = sample(n, |x, y| {
        let q = Complex64::new(1.0 + 0.3 * (2.0 * PI * x).cos(), 0.4 * (2.0 * PI * y).sin());
        q.norm_sqr()
    });
    let p = WangProblem::from_cubic(grid(n), &q2, CubicNormalization::Halved).unwrap();
    let s = solve_wang(&p, &vec![0.0; n * n]).unwrap();
    let r = vortex_residual(&p.grid, &s.u, &q2, p.k0);
    let worst = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-8, "{worst}");
    assert!(worst <= p.newton_tol * (-s.u.iter().copied().fold(f64::INFINITY, f64::min)).exp() / 2.0 + 1e-15);
}

#[test]
fn halved_normalization_reproduces_conformal_profile() {
    let n = 16;
    for c in [-0.5, -1.0, -2.0] {
        let profile = ConformalProfile::new(c).unwrap();
        let tau2 = 1.3;
        let expect = profile.eval_F(tau2 / 2.0).unwrap();
        let halved = WangProblem::from_cubic(grid(n), &vec![tau2; n * n], CubicNormalization::Halved).unwrap().with_k0(c);
        let u = solve_wang(&halved, &vec![0.0; n * n]).unwrap().u;
        assert!(u.iter().all(|v| (v - expect).abs() < 1e-10), "c = {c}");
        let other = WangProblem::from_cubic(grid(n), &vec![tau2; n * n], CubicNormalization::Unscaled).unwrap().with_k0(c);
        let u = solve_wang(&other, &vec![0.0; n * n]).unwrap().u;
        assert!((u[0] - expect).abs() > 1e-3);
    }
}

#[test]
fn conformal_metric_from_profile() {
    let profile = ConformalProfile::new(-1.5).unwrap();
    let g = Grid::torus(16).unwrap();
    let zero = FieldState::new(g.clone(), vec![aklab_core::linalg::j0(); g.len()], vec![[M2::zeros(); 2]; g.len()]).unwrap();
    let h = conformal_metric_F(&profile, &zero).unwrap();
    assert!(h.iter().zip(zero.g()).all(|(h, g)| (h - g * 1.5).amax() < 1e-12));
    let w = Complex64::new(0.7, 0.2);
    let fs = titeica_field(&g, w, &ShearMap::standard(0.05)).unwrap();
    let factor = conformal_factor_F(&profile, &fs).unwrap();
    let expect = profile.eval_F(w.norm_sqr() / 2.0).unwrap().exp();
    assert!(factor.iter().all(|f| (f - expect).abs() < 1e-9));
    for (i, f) in factor.iter().enumerate() {
        let direct = profile.eval_F(fs.point(i).norm0_sq()).unwrap().exp();
        assert!((f - direct).abs() < 1e-12);
    }
}
