use std::f64::consts::SQRT_2;

use aklab_core::framesphere::*;
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &CMat3) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

fn titeica(q: Complex64) -> ConnectionPair<TiteicaData> {
    connection_matrices(TiteicaData::new(q).unwrap())
}

fn random_pullback(r: &mut ChaCha8Rng) -> PullbackData {
    let q = Complex64::from_polar(r.random_range(0.5..2.0), r.random_range(0.0..std::f64::consts::TAU));
    let a = Complex64::from_polar(r.random_range(0.0..0.5), r.random_range(0.0..std::f64::consts::TAU));
    PullbackData { base: TiteicaData::new(q).unwrap(), a }
}

fn sample_points() -> Vec<Complex64> {
    (0..5).flat_map(|i| (0..5).map(move |j| cx(-0.4 + 0.2 * i as f64, -0.4 + 0.2 * j as f64))).collect()
}

fn sup_curvature<D: FrameData>(cp: &ConnectionPair<D>) -> f64 {
    sample_points().iter().map(|z| cp.curvature_residual(*z).unwrap()).fold(0.0, f64::max)
}

fn random_jet(r: &mut ChaCha8Rng) -> Jet {
    Jet {
        psi: r.random_range(-1.0..1.0),
        psi_z: cx(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
        psi_zzbar: r.random_range(-2.0..2.0),
        q: cx(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)),
        q_zbar: cx(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
    }
}

struct Fixed(Jet);

impl FrameData for Fixed {
    fn jet(&self, _z: Complex64) -> aklab_core::Result<Jet> {
        Ok(self.0)
    }
}

#[test]
fn curvature_entries_are_the_integrability_defects() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let j = random_jet(&mut r);
        let k = connection_matrices(Fixed(j)).curvature(cx(0.0, 0.0)).unwrap();
        let e2 = j.q_zbar * (-j.psi).exp() / SQRT_2;
        let mut expect = CMat3::zeros();
        expect[(0, 0)] = cx(j.vortex_defect(), 0.0);
        expect[(1, 1)] = cx(-j.vortex_defect(), 0.0);
        expect[(0, 1)] = e2;
        expect[(1, 0)] = -e2.conj();
        assert!(max_abs(&(k - expect)) <= 1e-12 * (1.0 + max_abs(&expect)));
    }
}

#[test]
fn titeica_connection_is_flat() {
    for q in [cx(1.0, 0.0), cx(0.3, -2.0), cx(-5.0, 0.5)] {
        let cp = titeica(q);
        assert!(sup_curvature(&cp) <= 1e-12);
        let shifted = connection_matrices(Perturbed { base: cp.data, psi_shift: 0.01, q_antiholo: cx(0.0, 0.0) });
        assert!(sup_curvature(&shifted) >= 1e-3);
        let antiholo = connection_matrices(Perturbed { base: cp.data, psi_shift: 0.0, q_antiholo: cx(0.01, 0.0) });
        assert!(sup_curvature(&antiholo) > 1e-4);
    }
}

#[test]
fn zero_curvature_iff_integrability_on_random_data() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for k in 0..50 {
        let data = random_pullback(&mut r);
        let on = sup_curvature(&connection_matrices(data));
        assert!(on <= 1e-10, "on-shell sample {k}: {on}");
        let jet = data.jet(cx(0.1, 0.2)).unwrap();
        assert!(jet.vortex_defect().abs() <= 1e-12);
    }
    for k in 0..50 {
        let data = random_pullback(&mut r);
        let (psi_shift, q_antiholo) = if k % 2 == 0 { (0.01, cx(0.0, 0.0)) } else { (0.0, cx(0.0, 0.01)) };
        let off = sup_curvature(&connection_matrices(Perturbed { base: data, psi_shift, q_antiholo }));
        assert!(off >= 1e-3, "off-shell sample {k}: {off}");
    }
}

#[test]
fn jet_curvature_matches_finite_differences() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let data = random_pullback(&mut r);
    let cps = [connection_matrices(data)];
    for z in [cx(0.1, -0.2), cx(-0.3, 0.25)] {
        for cp in &cps {
            let gap = max_abs(&(cp.curvature(z).unwrap() - cp.curvature_fd(z, 1e-4).unwrap()));
            assert!(gap <= 1e-6, "{gap}");
        }
        let off = connection_matrices(Perturbed { base: data, psi_shift: 0.02, q_antiholo: cx(0.03, -0.01) });
        let gap = max_abs(&(off.curvature(z).unwrap() - off.curvature_fd(z, 1e-4).unwrap()));
        assert!(gap <= 1e-6, "{gap}");
        let hyp = connection_matrices(HyperboloidData);
        assert!(hyp.curvature_residual(z).unwrap() <= 1e-12);
        let gap = max_abs(&(hyp.curvature(z).unwrap() - hyp.curvature_fd(z, 1e-4).unwrap()));
        assert!(gap <= 1e-6, "{gap}");
    }
}

#[test]
fn frame_state_invariants() {
    let f0 = FrameState::canonical(0.7);
    assert!(FrameState::new(f0.f).is_ok());
    assert!((f0.real_frame().determinant() - 0.7_f64.exp()).abs() < 1e-14);
    assert!(f0.det_drift(0.7).abs() < 1e-14);
    assert_eq!(f0.position(), Vector3::new(0.0, 0.0, 1.0));
    let mut bad = f0.f;
    bad[(1, 0)] += cx(0.1, 0.0);
    assert!(FrameState::new(bad).is_err());
    let mut flat = f0.f;
    for k in 0..3 {
        flat[(0, k)] = cx(0.0, 0.0);
        flat[(1, k)] = cx(0.0, 0.0);
    }
    assert!(FrameState::new(flat).is_err());
    assert!(TiteicaData::new(cx(0.0, 0.0)).is_err());
    assert!(HyperboloidData.jet(cx(1.0, 0.5)).is_err());
}

#[test]
fn zero_length_path_returns_start() {
    let cp = titeica(cx(1.0, 0.0));
    let f0 = FrameState::canonical(0.0);
    let z = cx(0.3, 0.1);
    assert_eq!(integrate_frame(&cp, &f0, &[z, z], MAX_STEP).unwrap(), f0);
    assert_eq!(integrate_frame(&cp, &f0, &[], MAX_STEP).unwrap(), f0);
}

#[test]
fn titeica_mesh_matches_matrix_exponential() {
    let q = cx(0.8, 0.6);
    let cp = titeica(q);
    let mesh = titeica_immersion(q, 1.0, 1.0 / 16.0).unwrap();
    let (a, b) = (cp.a(cx(0.0, 0.0)).unwrap(), cp.b(cx(0.0, 0.0)).unwrap());
    assert!(max_abs(&(a * b - b * a)) < 1e-14);
    let f0 = FrameState::canonical(cp.data.psi());
    for (z, frame) in mesh.nodes.iter().zip(&mesh.frames) {
        let exact = (a * *z + b * z.conj()).exp() * f0.f;
        assert!(max_abs(&(exact - frame.f)) <= 1e-9 * max_abs(&exact), "{z}");
    }
}

#[test]
fn titeica_points_lie_on_a_cubic_level_set() {
    // With U = 1/√2 and ψ = 0, A has eigenvectors (λ, 1/(2λ), 1) for λ³ = U/2.
    // In the basis given by the rows of P⁻¹F₀ the three coordinates of f have
    // a constant product.
    let q = cx(1.0, 0.0);
    let mesh = titeica_immersion(q, 1.0, 1.0 / 16.0).unwrap();
    let lam: Vec<Complex64> = (0..3)
        .map(|k| Complex64::from_polar((0.5 / SQRT_2).cbrt(), 2.0 * std::f64::consts::PI * k as f64 / 3.0))
        .collect();
    let p = CMat3::from_fn(|r, k| match r {
        0 => lam[k],
        1 => 0.5 / lam[k],
        _ => cx(1.0, 0.0),
    });
    let basis = p.try_inverse().unwrap() * FrameState::canonical(0.0).f;
    let to_coords = basis.try_inverse().unwrap();
    let product = |f: &Vector3<f64>| {
        let row = nalgebra::RowVector3::new(cx(f.x, 0.0), cx(f.y, 0.0), cx(f.z, 0.0)) * to_coords;
        row[0] * row[1] * row[2]
    };
    let p0 = product(&mesh.points[mesh.side * mesh.side / 2]);
    assert!(p0.norm() > 1e-3);
    for f in &mesh.points {
        assert!((product(f) - p0).norm() <= 1e-9 * p0.norm());
    }
}

#[test]
fn contractible_loops_have_trivial_holonomy() {
    let f0 = FrameState::canonical(0.0);
    let unit = loop_holonomy(&titeica(cx(1.0, 0.0)), &f0, cx(0.0, 0.0), 1.0, 1.0, MAX_STEP).unwrap();
    assert!(unit <= 1e-6, "{unit}");
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let data = random_pullback(&mut r);
    let cp = connection_matrices(data);
    let f0 = FrameState::canonical(data.jet(cx(-0.4, -0.4)).unwrap().psi);
    let hol = loop_holonomy(&cp, &f0, cx(-0.4, -0.4), 0.8, 0.8, MAX_STEP).unwrap();
    assert!(hol <= 1e-6, "{hol}");
    let hyp = connection_matrices(HyperboloidData);
    let f0 = FrameState::canonical(HyperboloidData.jet(cx(-0.3, -0.3)).unwrap().psi);
    assert!(loop_holonomy(&hyp, &f0, cx(-0.3, -0.3), 0.6, 0.6, MAX_STEP).unwrap() <= 1e-6);
    let off = connection_matrices(Perturbed { base: data, psi_shift: 0.01, q_antiholo: cx(0.0, 0.0) });
    let f0 = FrameState::canonical(0.0);
    let hol = loop_holonomy(&off, &f0, cx(-0.4, -0.4), 0.8, 0.8, MAX_STEP).unwrap();
    assert!(hol >= 1e-4, "{hol}");
}

#[test]
fn endpoints_do_not_depend_on_the_path() {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let data = random_pullback(&mut r);
    let cp = connection_matrices(data);
    let f0 = FrameState::canonical(data.jet(cx(0.0, 0.0)).unwrap().psi);
    let target = cx(0.4, 0.3);
    let a = integrate_frame(&cp, &f0, &[cx(0.0, 0.0), cx(0.4, 0.0), target], MAX_STEP).unwrap();
    let b = integrate_frame(&cp, &f0, &[cx(0.0, 0.0), cx(0.0, 0.3), target], MAX_STEP).unwrap();
    let c = integrate_frame(&cp, &f0, &[cx(0.0, 0.0), cx(-0.2, 0.4), cx(0.1, -0.1), target], MAX_STEP).unwrap();
    assert!(max_abs(&(a.f - b.f)) <= 1e-6 * max_abs(&a.f));
    assert!(max_abs(&(a.f - c.f)) <= 1e-6 * max_abs(&a.f));
    assert!(a.reality_defect() <= 1e-8 * max_abs(&a.f));
}

#[test]
fn rk4_is_fourth_order() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let data = random_pullback(&mut r);
    let cp = connection_matrices(data);
    let psi0 = data.jet(cx(0.0, 0.0)).unwrap().psi;
    let f0 = FrameState::canonical(psi0);
    let path = [cx(0.0, 0.0), cx(0.45, 0.0), cx(0.45, 0.45), cx(-0.3, 0.1)];
    let end = *path.last().unwrap();
    let psi1 = data.jet(end).unwrap().psi;
    let drift = |h: f64| integrate_path(&cp, &f0, &path, h).unwrap().det_drift(psi1).abs();
    // The determinant drift falls at least as fast as the fourth power.
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        assert!(drift(h) / drift(h / 2.0) >= 12.0);
    }
    let reference = integrate_path(&cp, &f0, &path, 1.0 / 2048.0).unwrap().f;
    let err = |h: f64| max_abs(&(integrate_path(&cp, &f0, &path, h).unwrap().f - reference));
    let order = (err(1.0 / 32.0) / err(1.0 / 128.0)).log2() / 2.0;
    assert!((3.8..4.2).contains(&order), "{order}");
}

#[test]
fn coarse_steps_are_refused() {
    let cp = titeica(cx(8.0, 0.0));
    let f0 = FrameState::canonical(cp.data.psi());
    let path = [cx(0.0, 0.0), cx(2.0, 0.0)];
    assert!(integrate_frame(&cp, &f0, &path, 0.5).is_err());
    assert!(integrate_frame(&cp, &f0, &path, MAX_STEP).is_ok());
}

#[test]
fn titeica_structure_hooks() {
    let mesh = titeica_immersion(cx(1.0, 0.0), 1.0, 1.0 / 32.0).unwrap();
    let hooks = verify_immersion(&mesh).unwrap();
    assert!(hooks.nodes > 3000);
    assert!(hooks.normal_residual <= 1e-5, "{hooks:?}");
    assert!(hooks.blaschke_residual <= 1e-5, "{hooks:?}");
    assert!(hooks.conformal_residual <= 1e-5, "{hooks:?}");
}

#[test]
fn pullback_and_hyperboloid_hooks() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let data = random_pullback(&mut r);
    let mesh = immersion_mesh(&connection_matrices(data), 0.5, 1.0 / 64.0).unwrap();
    let hooks = verify_immersion(&mesh).unwrap();
    assert!(hooks.normal_residual <= 1e-5 && hooks.blaschke_residual <= 1e-5, "{hooks:?}");
    let mesh = immersion_mesh(&connection_matrices(HyperboloidData), 0.5, 1.0 / 64.0).unwrap();
    let hooks = verify_immersion(&mesh).unwrap();
    assert!(hooks.normal_residual <= 1e-5 && hooks.blaschke_residual <= 1e-5, "{hooks:?}");
    // Q = 0 with the canonical frame is the hyperboloid f₃² − f₁² − f₂² = 1.
    for p in &mesh.points {
        assert!((p.z * p.z - p.x * p.x - p.y * p.y - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn hooks_detect_off_shell_data() {
    let data = Perturbed { base: TiteicaData::new(cx(1.0, 0.0)).unwrap(), psi_shift: 0.0, q_antiholo: cx(0.3, 0.0) };
    let cp = connection_matrices(data);
    let f0 = FrameState::canonical(0.0);
    let a = integrate_path(&cp, &f0, &[cx(0.0, 0.0), cx(0.5, 0.0), cx(0.5, 0.5)], MAX_STEP).unwrap();
    let b = integrate_path(&cp, &f0, &[cx(0.0, 0.0), cx(0.0, 0.5), cx(0.5, 0.5)], MAX_STEP).unwrap();
    assert!(max_abs(&(a.f - b.f)) > 1e-3);
}

#[test]
fn conjugating_q_mirrors_the_immersion() {
    let q = cx(0.6, 0.9);
    let m1 = titeica_immersion(q, 0.75, 1.0 / 16.0).unwrap();
    let m2 = titeica_immersion(q.conj(), 0.75, 1.0 / 16.0).unwrap();
    let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
    let side = m1.side;
    for iy in 0..side {
        for ix in 0..side {
            let p = m1.points[iy * side + ix];
            let mirrored = reflect * m2.points[(side - 1 - iy) * side + ix];
            assert!((p - mirrored).norm() <= 1e-10 * p.norm());
        }
    }
}

#[test]
fn scaling_q_rescales_the_coordinate() {
    // f for λ³Q at z equals f for Q at λz; here λ = 2.
    let q = cx(0.5, 0.5);
    let lam = 2.0_f64;
    let big = TiteicaData::new(q * lam.powi(3)).unwrap();
    let small = TiteicaData::new(q).unwrap();
    assert!((big.psi() - small.psi() - 2.0 * lam.ln()).abs() < 1e-14);
    assert!((3.0 * big.psi()).exp() - big.q.norm_sqr() < 1e-12);
    let m_big = titeica_immersion(big.q, 0.5, 1.0 / 32.0).unwrap();
    let m_small = titeica_immersion(small.q, 1.0, 1.0 / 16.0).unwrap();
    assert_eq!(m_big.side, m_small.side);
    for (k, (a, b)) in m_big.points.iter().zip(&m_small.points).enumerate() {
        assert!((m_small.nodes[k] - m_big.nodes[k] * lam).norm() < 1e-14);
        assert!((a - b).norm() <= 1e-8 * a.norm(), "{k}");
    }
}

#[test]
fn mesh_rejects_bad_geometry() {
    let cp = titeica(cx(1.0, 0.0));
    assert!(immersion_mesh(&cp, 1.0, 0.3).is_err());
    assert!(immersion_mesh(&cp, 1.0, 0.0).is_err());
    assert!(immersion_mesh(&connection_matrices(HyperboloidData), 1.0, 0.25).is_err());
    assert!(FRAME_CONVENTION.contains("[A, B]"));
    let _ = I;
}

proptest! {
    #[test]
    fn curvature_vanishes_exactly_on_shell(
        psi in -1.0..1.0f64, pzr in -1.0..1.0f64, pzi in -1.0..1.0f64,
        qr in -2.0..2.0f64, qi in -2.0..2.0f64,
    ) {
        let q = cx(qr, qi);
        let psi_zzbar = 0.5 * psi.exp() - 0.5 * q.norm_sqr() * (-2.0 * psi).exp();
        let j = Jet { psi, psi_z: cx(pzr, pzi), psi_zzbar, q, q_zbar: cx(0.0, 0.0) };
        let k = connection_matrices(Fixed(j)).curvature_residual(cx(0.0, 0.0)).unwrap();
        prop_assert!(k <= 1e-12);
    }
}
