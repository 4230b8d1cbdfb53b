//! Verification suites, one per acceptance criterion. Each returns the worst
//! residuals it found as [`Check`]s; randomized suites draw from a ChaCha8
//! stream derived from the seed.

use std::f64::consts::{PI, TAU};

use aklab_core::framesphere::{
    connection_matrices, integrate_path, loop_holonomy, titeica_immersion, verify_immersion, FrameData, FrameState,
    Perturbed, PullbackData, TiteicaData, MAX_STEP,
};
use aklab_core::linalg::{M2, V2};
use aklab_core::pointmodel::{
    chart_differential, circle_act, circle_act_tangent, circle_generator, cplx_i, gram_signature, hamiltonian_hat,
    moment_hat, omega_closedness_residual, point_from_coords, sl2_act, sl2_act_tangent, sl2_generator, symp_omega,
    tangent_from_coords, CoordPoint, PointState, PointWeights, TangentVector,
};
use aklab_core::scalarfuncs::{audit_profile, t_sweep, ConformalProfile};
use aklab_core::surfacefields::scenarios::{
    holomorphic_field, patch_polynomial, random_smooth_field, random_tangent, titeica_at, titeica_field, titeica_point, ShearMap, TrigPoly,
    Warp,
};
use aklab_core::surfacefields::{
    codazzi_residual, dmu_fd_consistency, fuchsian_restriction_check, gauss_curvature, integration_by_parts_check, lie_derivative,
    linearized_codazzi_residual, pullback_point, symbol_det, symbol_det_closed_form, symbol_schur_det, w_system,
    wang_bridge, wang_bridge_residual, wp_pairings, FieldState, Grid, TangentField, TorusGrid,
};
use aklab_core::wangsolver::{constant_solution, solve_wang, WangProblem};
use anyhow::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Suite};

/// The three background constants swept by the profile suites.
pub const PROFILE_CONSTANTS: [f64; 3] = [-0.5, -1.0, -2.0];

/// The reference sweep: `t = 0` and 999 log-spaced points in `[1e-6, 1e4]`.
pub fn reference_sweep() -> Vec<f64> {
    t_sweep(1000, 1e-6, 1e4)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn tag(c: f64) -> String {
    format!("c={c}")
}

/// Criterion 1: functional equation, `F(0)`, closed form.
pub fn conformal_profile(cs: &[f64], ts: &[f64]) -> Result<Suite> {
    let mut checks = Vec::new();
    for &c in cs {
        let a = audit_profile(&ConformalProfile::new(c)?, ts)?;
        checks.push(Check::at_most(format!("functional_residual[{}]", tag(c)), a.max_functional_residual, 1e-10));
        checks.push(Check::at_most(format!("F0_minus_ln_abs_c[{}]", tag(c)), a.f_at_zero_error, 1e-12));
        checks.push(Check::at_most(format!("closed_form_gap[{}]", tag(c)), a.max_closed_form_gap, 1e-9));
    }
    Ok(Suite::new("conformal_profile", Some(1), checks))
}

/// Criterion 2: properties of `f`.
pub fn profile_lemmas(cs: &[f64], ts: &[f64]) -> Result<Suite> {
    let mut checks = Vec::new();
    for &c in cs {
        let a = audit_profile(&ConformalProfile::new(c)?, ts)?;
        let t = tag(c);
        checks.push(Check::at_most(format!("abs_f0[{t}]"), a.f_zero_value.abs(), 0.0));
        checks.push(Check::below(format!("max_f_prime[{t}]"), a.max_f_prime, 0.0));
        checks.push(Check::zero_count(format!("f_prime_monotonicity_violations[{t}]"), a.f_prime_monotone_violations));
        checks.push(Check::above(format!("min_positivity_combination[{t}]"), a.min_positivity, 0.0));
        checks.push(Check::at_most(format!("positivity_vs_log_derivative_rel[{t}]"), a.max_positivity_rel_gap, 1e-6));
        checks.push(Check::at_least(format!("min_monotonicity_gap[{t}]"), a.min_monotonicity_gap, 0.0));
    }
    Ok(Suite::new("profile_lemmas", Some(2), checks))
}

fn coord(x: f64, y: f64, u: f64, v: f64) -> Result<CoordPoint> {
    Ok(CoordPoint::new(Complex64::new(x, y), Complex64::new(u, v))?)
}

fn random_coord(r: &mut ChaCha8Rng) -> Result<CoordPoint> {
    coord(r.random_range(-2.0..2.0), r.random_range(0.3..3.0), r.random_range(-1.5..1.5), r.random_range(-1.5..1.5))
}

fn random_chart_tangent(r: &mut ChaCha8Rng, p: &CoordPoint) -> Result<TangentVector> {
    let d: [f64; 4] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
    Ok(tangent_from_coords(p, d[0], d[1], d[2], d[3])?)
}

fn random_sl2(r: &mut ChaCha8Rng) -> M2 {
    loop {
        let m = M2::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let d = m.determinant();
        if d > 0.1 {
            return m / d.sqrt();
        }
    }
}

fn random_traceless(r: &mut ChaCha8Rng) -> M2 {
    let x = M2::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), 0.0);
    x - M2::identity() * (0.5 * x.trace())
}

/// Criterion 3: pseudo-Kähler identities of the point model.
pub fn pseudo_kaehler(c: f64, seed: u64, samples: usize) -> Result<Suite> {
    let prof = ConformalProfile::new(c)?;
    let mut r = rng(seed, 3);
    let (mut i_sq, mut g_inv, mut compat, mut sl2, mut circle) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut bad_signature, mut min_eig) = (0usize, f64::INFINITY);
    for _ in 0..samples {
        let p = random_coord(&mut r)?;
        let pt = point_from_coords(&p)?;
        let (t1, t2) = (random_chart_tangent(&mut r, &p)?, random_chart_tangent(&mut r, &p)?);
        let w = PointWeights::at(&prof, &pt)?;
        let scale = 1.0 + t1.max_abs() * t2.max_abs() * (1.0 + pt.norm0_sq());
        let (it1, it2) = (cplx_i(&pt, &t1), cplx_i(&pt, &t2));
        i_sq = i_sq.max(cplx_i(&pt, &it1).add(&t1).max_abs() / (1.0 + t1.max_abs()));
        let g0 = w.metric(&pt, &t1, &t2);
        g_inv = g_inv.max((w.metric(&pt, &it1, &it2) - g0).abs() / scale);
        let om = w.omega(&pt, &t1, &t2);
        compat = compat.max((om - w.metric(&pt, &t1, &it2)).abs() / scale);
        let pm = random_sl2(&mut r);
        let moved = sl2_act(&pm, &pt)?;
        let (m1, m2) = (sl2_act_tangent(&pm, &t1)?, sl2_act_tangent(&pm, &t2)?);
        let wm = PointWeights::at(&prof, &moved)?;
        // Transported tangents can be much larger than the originals.
        let sl2_scale = scale.max(1.0 + m1.max_abs() * m2.max_abs() * (1.0 + pt.norm0_sq()));
        sl2 = sl2.max((wm.metric(&moved, &m1, &m2) - g0).abs() / sl2_scale).max((wm.omega(&moved, &m1, &m2) - om).abs() / sl2_scale);
        let th = r.random_range(-PI..PI);
        let rot = circle_act(th, &pt);
        let (c1, c2) = (circle_act_tangent(th, &pt, &t1), circle_act_tangent(th, &pt, &t2));
        let wr = PointWeights::at(&prof, &rot)?;
        circle = circle.max((wr.metric(&rot, &c1, &c2) - g0).abs() / scale).max((wr.omega(&rot, &c1, &c2) - om).abs() / scale);
        match gram_signature(&prof, &pt) {
            Ok(s) if s.n_plus == 2 && s.n_minus == 2 => min_eig = min_eig.min(s.min_abs_eigenvalue),
            Ok(s) => {
                bad_signature += 1;
                min_eig = min_eig.min(s.min_abs_eigenvalue);
            }
            Err(_) => {
                bad_signature += 1;
                min_eig = 0.0;
            }
        }
    }
    let mut closed = 0.0_f64;
    let mut points = vec![coord(0.0, 1.0, 0.0, 0.0)?, coord(0.0, 1.0, 1.0, 1.0)?, coord(0.7, 1.6, -0.4, 0.9)?];
    for _ in 0..5 {
        points.push(random_coord(&mut r)?);
    }
    for p in &points {
        closed = closed.max(omega_closedness_residual(&prof, p, 1e-3)?);
    }
    let p = coord(0.3, 1.4, 1.0, 1.0)?;
    let decay = omega_closedness_residual(&prof, &p, 2e-2)? / omega_closedness_residual(&prof, &p, 1e-2)?;
    let mut checks = vec![
        Check::at_most("complex_structure_squares_to_minus_one", i_sq, 1e-12),
        Check::at_most("metric_invariant_under_complex_structure", g_inv, 1e-12),
        Check::at_most("omega_equals_metric_of_rotated", compat, 1e-12),
        Check::at_most("sl2_invariance", sl2, 1e-9),
        Check::at_most("circle_invariance", circle, 1e-9),
        Check::zero_count("signature_not_2_2", bad_signature),
        Check::at_least("min_abs_gram_eigenvalue", min_eig, 1e-10),
        Check::at_most("omega_closedness_fd_h1e-3", closed, 1e-5),
    ];
    checks.extend(Check::within("omega_closedness_halving_ratio", decay, 3.5, 4.5));
    Ok(Suite::new("pseudo_kaehler", Some(3), checks))
}

fn chart_shift(p: &CoordPoint, d: &[f64; 4], s: f64) -> Result<PointState> {
    Ok(point_from_coords(&coord(p.z.re + s * d[0], p.z.im + s * d[1], p.w.re + s * d[2], p.w.im + s * d[3])?)?)
}

/// Criterion 4: moment map, equivariance, circle Hamiltonian.
pub fn moment_maps(c: f64, seed: u64, samples: usize) -> Result<Suite> {
    let prof = ConformalProfile::new(c)?;
    let mut r = rng(seed, 4);
    let h = 1e-5;
    let (mut defining, mut equivariance, mut hamiltonian) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..samples {
        let p = random_coord(&mut r)?;
        let pt = point_from_coords(&p)?;
        let x = random_traceless(&mut r);
        let d: [f64; 4] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let v = chart_differential(&p, d[0], d[1], d[2], d[3])?;
        let (plus, minus) = (chart_shift(&p, &d, h)?, chart_shift(&p, &d, -h)?);
        let fd = (moment_hat(&prof, &plus, &x)? - moment_hat(&prof, &minus, &x)?) / (2.0 * h);
        let pairing = symp_omega(&prof, &pt, &sl2_generator(&pt, &x), &v)?;
        defining = defining.max((fd - pairing).abs() / fd.abs().max(1.0));
        let pm = random_sl2(&mut r);
        let pinv = pm.try_inverse().ok_or_else(|| anyhow::anyhow!("singular group element"))?;
        let lhs = moment_hat(&prof, &sl2_act(&pm, &pt)?, &x)?;
        let rhs = moment_hat(&prof, &pt, &(pinv * x * pm))?;
        equivariance = equivariance.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        let fd = (hamiltonian_hat(&prof, &plus)? - hamiltonian_hat(&prof, &minus)?) / (2.0 * h);
        let pairing = symp_omega(&prof, &pt, &circle_generator(&pt), &v)?;
        hamiltonian = hamiltonian.max((fd - pairing).abs() / fd.abs().max(1.0));
    }
    let checks = vec![
        Check::at_most("moment_map_defining_property_rel", defining, 1e-6),
        Check::at_most("moment_map_equivariance_rel", equivariance, 1e-6),
        Check::at_most("circle_hamiltonian_property_rel", hamiltonian, 1e-6),
    ];
    Ok(Suite::new("moment_maps", Some(4), checks))
}

/// Criterion 5: symbol determinant against its closed form.
pub fn symbol(c: f64, seed: u64, samples: usize) -> Result<Suite> {
    let prof = ConformalProfile::new(c)?;
    let mut r = rng(seed, 5);
    let (mut gap, mut schur_gap, mut min_det) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for _ in 0..samples {
        let w = Complex64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let xi = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
        let det = symbol_det(&prof, w, xi)?;
        let closed = symbol_det_closed_form(&prof, w, xi)?;
        gap = gap.max(((det - closed) / closed).abs());
        let schur = symbol_schur_det(&prof, w, xi)?.unwrap_or(f64::NAN);
        schur_gap = schur_gap.max(((schur - closed) / closed).abs());
        min_det = min_det.min(det / (xi[0] * xi[0] + xi[1] * xi[1]).powi(3));
    }
    let at_zero = symbol_det(&prof, Complex64::new(0.7, 0.2), [0.0, 0.0])?.abs();
    let checks = vec![
        Check::at_most("determinant_vs_closed_form_rel", gap, 1e-10),
        Check::at_most("schur_complement_vs_closed_form_rel", schur_gap, 1e-10),
        Check::above("min_determinant_over_abs_xi_pow6", min_det, 0.0),
        Check::at_most("abs_determinant_at_xi_zero", at_zero, 0.0),
    ];
    Ok(Suite::new("symbol_determinant", Some(5), checks))
}

/// Smooth positive density `2 + sin 2πx sin 2πy` on an `n × n` torus.
pub fn smooth_phi(n: usize) -> Vec<f64> {
    (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as f64 / n as f64, (i / n) as f64 / n as f64);
            2.0 + (TAU * x).sin() * (TAU * y).sin()
        })
        .collect()
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Criterion 6: Wang solver.
pub fn wang(n: usize, k0: f64, seed: u64) -> Result<Suite> {
    let grid = TorusGrid::new(n)?;
    let len = n * n;
    let u_star = constant_solution(2.0, k0)?;
    let constant = solve_wang(&WangProblem::new(grid.clone(), vec![2.0; len])?.with_k0(k0), &vec![0.0; len])?;
    let constant_gap = constant.u.iter().fold(0.0_f64, |m, u| m.max((u - u_star).abs()));
    // x = e^{u*} solves k x^{-2} − 2x − 2k₀ = 0.
    let x = u_star.exp();
    let scalar_residual = (2.0 / (x * x) - 2.0 * x - 2.0 * k0).abs();
    let phi = smooth_phi(n);
    let p = WangProblem::new(grid.clone(), phi)?.with_k0(k0);
    let from_zero = solve_wang(&p, &vec![0.0; len])?;
    let mut r = rng(seed, 6);
    let mut spread = 0.0_f64;
    for _ in 0..3 {
        let u0: Vec<f64> = (0..len).map(|_| r.random_range(-0.5..0.5)).collect();
        spread = spread.max(sup_gap(&solve_wang(&p, &u0)?.u, &from_zero.u));
    }
    let exact: Vec<f64> = (0..len).map(|i| 0.1 * (TAU * (i % n) as f64 / n as f64).sin()).collect();
    let lap = grid.laplacian(&exact);
    let mphi: Vec<f64> = (0..len).map(|i| (2.0 * exact[i].exp() + 2.0 * k0 - lap[i]) * (2.0 * exact[i]).exp()).collect();
    let mp = WangProblem { grid, phi: mphi, k0, newton_tol: 1e-12, max_iters: 30, allow_signed_phi: true };
    let manufactured = solve_wang(&mp, &vec![0.0; len])?;
    let checks = vec![
        Check::at_most("constant_phi_vs_scalar_root", constant_gap, 1e-10),
        Check::at_most("scalar_root_residual", scalar_residual, 1e-12),
        Check::at_most("initialization_spread", spread, 1e-9),
        Check::at_most("newton_iterations_smooth", from_zero.iterations as f64, 20.0),
        Check::at_most("newton_residual_smooth", from_zero.residual_inf, 1e-10),
        Check::at_most("jacobian_margin", from_zero.jacobian_margin, 0.0),
        Check::at_most("manufactured_solution_error", sup_gap(&manufactured.u, &exact), 1e-10),
    ];
    Ok(Suite::new("wang_solver", Some(6), checks))
}

/// Criterion 7: bridge identity on constant and holomorphic data.
pub fn bridge(c: f64, n: usize) -> Result<Suite> {
    let mut constant = 0.0_f64;
    for c in PROFILE_CONSTANTS {
        let p = ConformalProfile::new(c)?;
        let fs = titeica_field(&Grid::torus(16)?, Complex64::new(1.3, 0.4), &ShearMap::identity())?;
        let b = wang_bridge(&p, &fs)?;
        constant = b.mu_tilde.iter().chain(&b.wang_side).fold(constant, |m, v| m.max((v - 2.0 * c).abs()));
    }
    let p = ConformalProfile::new(c)?;
    let fs = holomorphic_field(&Grid::patch(n, [-0.5, -0.5], 1.0)?, patch_polynomial, Warp { strength: 0.15 })?;
    let patch = wang_bridge_residual(&p, &fs)?;
    let curvature = gauss_curvature(&fs).iter().fold(0.0_f64, |m, k| m.max(k.abs()));
    let checks = vec![
        Check::at_most("constant_tau_both_sides_minus_2c", constant, 1e-12),
        Check::at_most("holomorphic_patch_residual", patch, 1e-5),
        Check::at_least("patch_max_abs_curvature", curvature, 1e-2),
    ];
    Ok(Suite::new("wang_bridge", Some(7), checks))
}

fn w0() -> Complex64 {
    Complex64::new(0.6, -0.3)
}

/// Titeica data at a fixed `w` pulled back by the standard shear.
pub fn sheared(n: usize) -> Result<FieldState> {
    Ok(titeica_field(&Grid::torus(n)?, w0(), &ShearMap::standard(0.08))?)
}

fn hamiltonian_field(grid: &Grid, h: &TrigPoly) -> Vec<V2> {
    grid.sample(|x, y| h.hamiltonian_at(x, y))
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Criterion 8: primitive of `dμ̃` and integration by parts.
pub fn primitive(c: f64, n: usize, seed: u64) -> Result<Suite> {
    let p = ConformalProfile::new(c)?;
    let fs = sheared(n)?;
    let mut r = rng(seed, 8);
    let tf = random_tangent(&fs, &mut r, 0.5);
    let consistency = dmu_fd_consistency(&p, &fs, &tf, 1e-4)?;
    let v = hamiltonian_field(fs.grid(), &TrigPoly::random(&mut r, 2, 0.1));
    let (l, rh) = integration_by_parts_check(&p, &fs, &tf, &v)?;
    let ham = rel_gap(l, rh);
    let cv = vec![V2::new(0.4, -0.3); fs.len()];
    let (l, rh) = integration_by_parts_check(&p, &fs, &tf, &cv)?;
    let constant = rel_gap(l, rh);
    let checks = vec![
        Check::at_most("primitive_fd_consistency", consistency, 1e-4),
        Check::at_most("integration_by_parts_hamiltonian_rel", ham, 1e-5),
        Check::at_most("integration_by_parts_constant_rel", constant, 1e-5),
    ];
    Ok(Suite::new("moment_primitive", Some(8), checks))
}

/// Fuchsian data: `A = 0`, `J` from sheared Titeica data, `J̇` a pulled-back
/// constant trace-free symmetric matrix and `Ȧ` the pulled-back constant Pick form.
fn fuchsian_setup(n: usize) -> Result<(FieldState, TangentField)> {
    let grid = Grid::torus(n)?;
    let shear = ShearMap::standard(0.08);
    let zero = [M2::zeros(); 2];
    let pts = grid.sample(|x, y| PointState::new(titeica_at(w0(), &shear, x, y).j, zero));
    let fs = FieldState::from_points(grid.clone(), &pts)?;
    let base = titeica_point(Complex64::new(0.4, 0.9));
    let s = M2::new(0.3, -0.5, -0.5, -0.3);
    let tangents = (0..fs.len())
        .map(|p| {
            let (x, y) = grid.point(p);
            let m = shear.jacobian(x, y);
            let mi = m.try_inverse().ok_or_else(|| anyhow::anyhow!("singular shear"))?;
            Ok(TangentVector { jdot: mi * s * m, adot: pullback_point(&base, &m).a })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((fs, TangentField::from_vectors(&tangents)))
}

/// Criterion 9: linearized Codazzi and W-system.
pub fn codazzi_w(c: f64, n: usize, seed: u64) -> Result<Suite> {
    let p = ConformalProfile::new(c)?;
    let fs = sheared(n)?;
    let mut r = rng(seed, 9);
    let x = hamiltonian_field(fs.grid(), &TrigPoly::random(&mut r, 2, 0.05));
    let orbit = linearized_codazzi_residual(&fs, &lie_derivative(&fs, &x));
    let (px, py) = (TrigPoly::random(&mut r, 2, 0.3), TrigPoly::random(&mut r, 2, 0.3));
    let general: Vec<V2> = fs.grid().sample(|a, b| V2::new(px.eval(a, b), py.eval(a, b)));
    let general = linearized_codazzi_residual(&fs, &lie_derivative(&fs, &general));
    let (f0, tf0) = fuchsian_setup(n)?;
    let fuchsian = w_system(&p, &f0, &tf0)?.residuals(f0.grid());
    let random = random_tangent(&fs, &mut r, 0.5);
    let neg_codazzi = linearized_codazzi_residual(&fs, &random);
    let neg_w = w_system(&p, &fs, &random)?.residuals(fs.grid());
    let checks = vec![
        Check::at_most("orbit_tangency_hamiltonian", orbit, 1e-5),
        Check::at_most("orbit_tangency_general_field", general, 1e-5),
        Check::at_most("fuchsian_w_system", fuchsian.iter().fold(0.0, |a, b| a.max(*b)), 1e-8),
        Check::above("negative_control_linearized_codazzi", neg_codazzi, 1e-3),
        Check::above("negative_control_w_system", neg_w.iter().fold(f64::INFINITY, |a, b| a.min(*b)), 1e-3),
    ];
    Ok(Suite::new("codazzi_w_system", Some(9), checks))
}

/// Criterion 10: metric at `A = 0` against four times Weil-Petersson.
pub fn weil_petersson(c: f64, n: usize, seed: u64, pairs: usize) -> Result<Suite> {
    let p = ConformalProfile::new(c)?;
    let mut r = rng(seed, 10);
    let base = random_smooth_field(&Grid::torus(n)?, &mut r, 0.3)?;
    let fs = base.with_pick(vec![[M2::zeros(); 2]; base.len()])?;
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let a = random_tangent(&fs, &mut r, 1.0).jdot;
        let b = random_tangent(&fs, &mut r, 1.0).jdot;
        let (_, gwp) = wp_pairings(fs.grid(), fs.j(), &a, &b);
        worst = worst.max(fuchsian_restriction_check(&p, &fs, &a, &b)? / gwp.abs().max(1.0));
    }
    Ok(Suite::new("weil_petersson_restriction", Some(10), vec![Check::at_most("restriction_gap_rel", worst, 1e-8)]))
}

fn random_pullback(r: &mut ChaCha8Rng) -> Result<PullbackData> {
    let q = Complex64::from_polar(r.random_range(0.5..2.0), r.random_range(0.0..TAU));
    let a = Complex64::from_polar(r.random_range(0.0..0.5), r.random_range(0.0..TAU));
    Ok(PullbackData { base: TiteicaData::new(q)?, a })
}

fn sup_curvature<D: FrameData>(data: D) -> Result<f64> {
    let cp = connection_matrices(data);
    let mut worst = 0.0_f64;
    for i in 0..5 {
        for j in 0..5 {
            let z = Complex64::new(-0.4 + 0.2 * i as f64, -0.4 + 0.2 * j as f64);
            worst = worst.max(cp.curvature_residual(z)?);
        }
    }
    Ok(worst)
}

/// Criterion 11: frame system of the affine sphere.
pub fn frame(seed: u64) -> Result<Suite> {
    let mut r = rng(seed, 11);
    let mut on = 0.0_f64;
    for _ in 0..50 {
        on = on.max(sup_curvature(random_pullback(&mut r)?)?);
    }
    let mut off = f64::INFINITY;
    for k in 0..50 {
        let base = random_pullback(&mut r)?;
        let (psi_shift, q_antiholo) =
            if k % 2 == 0 { (0.01, Complex64::new(0.0, 0.0)) } else { (0.0, Complex64::new(0.0, 0.01)) };
        off = off.min(sup_curvature(Perturbed { base, psi_shift, q_antiholo })?);
    }
    let tit = connection_matrices(TiteicaData::new(Complex64::new(1.0, 0.0))?);
    let unit = loop_holonomy(&tit, &FrameState::canonical(0.0), Complex64::new(0.0, 0.0), 1.0, 1.0, MAX_STEP)?;
    let data = random_pullback(&mut r)?;
    let cp = connection_matrices(data);
    let corner = Complex64::new(-0.4, -0.4);
    let f0 = FrameState::canonical(data.jet(corner)?.psi);
    let pulled = loop_holonomy(&cp, &f0, corner, 0.8, 0.8, MAX_STEP)?;
    let f0 = FrameState::canonical(data.jet(Complex64::new(0.0, 0.0))?.psi);
    let path = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.45, 0.0),
        Complex64::new(0.45, 0.45),
        Complex64::new(-0.3, 0.1),
    ];
    let reference = integrate_path(&cp, &f0, &path, 1.0 / 2048.0)?.f;
    let err = |h: f64| -> Result<f64> {
        let f = integrate_path(&cp, &f0, &path, h)?.f;
        Ok((f - reference).iter().fold(0.0_f64, |m, v| m.max(v.norm())))
    };
    let order = (err(1.0 / 32.0)? / err(1.0 / 128.0)?).log2() / 2.0;
    let hooks = verify_immersion(&titeica_immersion(Complex64::new(1.0, 0.0), 1.0, 1.0 / 32.0)?)?;
    let mut checks = vec![
        Check::at_most("on_shell_curvature_50", on, 1e-10),
        Check::at_least("off_shell_curvature_50", off, 1e-3),
        Check::at_most("titeica_unit_square_holonomy", unit, 1e-6),
        Check::at_most("pullback_loop_holonomy", pulled, 1e-6),
    ];
    checks.extend(Check::within("rk4_observed_order", order, 3.8, 4.2));
    checks.push(Check::at_most("hook_affine_normal_equals_position", hooks.normal_residual, 1e-5));
    checks.push(Check::at_most("hook_blaschke_metric", hooks.blaschke_residual, 1e-5));
    checks.push(Check::at_most("hook_conformality", hooks.conformal_residual, 1e-5));
    Ok(Suite::new("frame_sphere", Some(11), checks))
}

/// Scenario checks for a field configuration: algebraic invariants,
/// metric compatibility and, for Codazzi data, `d^∇A` and the bridge.
pub fn field_scenario(fs: &FieldState, codazzi: bool, bridge_c: Option<f64>) -> Result<Suite> {
    let mut checks = vec![
        Check::at_most("pointwise_invariants", fs.invariant_residual(), 1e-10),
        Check::at_most("metric_compatibility", fs.metric_compatibility_residual(), 1e-8),
        Check::zero_count("non_smooth_warning", usize::from(fs.non_smooth_warning())),
    ];
    if codazzi {
        checks.push(Check::at_most("codazzi_residual", codazzi_residual(fs), 1e-6));
    }
    if let Some(c) = bridge_c {
        checks.push(Check::at_most("bridge_residual", wang_bridge_residual(&ConformalProfile::new(c)?, fs)?, 1e-5));
    }
    Ok(Suite::new("scenario", None, checks))
}
