//! The four-dimensional model of pairs `(J, A)`: a complex structure on the
//! plane compatible with `ρ₀ = dx∧dy`, and a Pick form `A`, an endomorphism
//! valued one-form that is trace-free, `g_J`-symmetric, fully symmetric and
//! satisfies `A(J·) = A(·)J`.
//!
//! Storage is in coordinates: `a[i] = A(∂_i)`. A tangent `(J̇, Ȧ)` stores
//! `J̇` and `Ȧ = g_J^{-1} Ċ`, where `C = g_J A` is the cubic form. Frame
//! components in the `g_J`-orthonormal frame obtained by Gram-Schmidt of the
//! standard basis are available through accessors.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, LabError, Result};
use crate::linalg::{
    commutator, j0, lower_pick, omega, pick_add, pick_conj, pick_inner, pick_max_abs, pick_mul_right,
    pick_precompose, pick_scale, pick_sub, pick_zero, raise_cubic, reflection_e, Cubic, Pick, M2,
};
use crate::scalarfuncs::ConformalProfile;

/// A point `(J, A)` of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub j: M2,
    pub a: Pick,
}

/// A tangent vector `(J̇, Ȧ)` with `Ȧ = g_J^{-1} Ċ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub jdot: M2,
    pub adot: Pick,
}

/// Chart coordinates `(z, w)` with `Im z > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordPoint {
    pub z: Complex64,
    pub w: Complex64,
}

impl CoordPoint {
    pub fn new(z: Complex64, w: Complex64) -> Result<Self> {
        if !(z.im > 0.0) {
            return domain(format!("chart point needs Im z > 0, got {z}"));
        }
        Ok(Self { z, w })
    }
}

/// Metric `g_J = ρ₀(·, J·)` as a matrix.
pub fn metric_of(j: &M2) -> M2 {
    omega() * j
}

/// Inverse of a symmetric matrix with unit determinant.
pub fn unimodular_inverse(g: &M2) -> M2 {
    M2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)])
}

/// Frame matrix with columns `e1 = ∂x/|∂x|_g` and `e2 = J e1`.
pub fn frame_of(j: &M2) -> M2 {
    let g = metric_of(j);
    let e1 = nalgebra::Vector2::new(1.0 / g[(0, 0)].sqrt(), 0.0);
    let e2 = j * e1;
    M2::from_columns(&[e1, e2])
}

/// Complex structure `j(z) = P J₀ P^{-1}` for the upper-triangular `P` sending `i` to `z`.
pub fn complex_structure_at(z: Complex64) -> M2 {
    let (x, y) = (z.re, z.im);
    M2::new(x / y, -(x * x + y * y) / y, 1.0 / y, -x / y)
}

/// Upper-triangular element of SL(2,ℝ) sending `i` to `z`.
pub fn transport_to(z: Complex64) -> M2 {
    let s = z.im.sqrt();
    M2::new(s, z.re / s, 0.0, 1.0 / s)
}

/// `Re(w̄ a⊗a⊗a)` with `a = (1, −z̄)`, the cubic form of the chart.
fn chart_cubic(z: Complex64, w: Complex64) -> Cubic {
    let a = [Complex64::new(1.0, 0.0), -z.conj()];
    let mut c = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                c[i][j][k] = (w.conj() * a[i] * a[j] * a[k]).re;
            }
        }
    }
    c
}

/// Derivative of [`chart_cubic`] along `(ż, ẇ)`.
fn chart_cubic_dot(z: Complex64, w: Complex64, zdot: Complex64, wdot: Complex64) -> Cubic {
    let a = [Complex64::new(1.0, 0.0), -z.conj()];
    let ad = [Complex64::new(0.0, 0.0), -zdot.conj()];
    let mut c = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let sym = ad[i] * a[j] * a[k] + a[i] * ad[j] * a[k] + a[i] * a[j] * ad[k];
                c[i][j][k] = (wdot.conj() * a[i] * a[j] * a[k] + w.conj() * sym).re;
            }
        }
    }
    c
}

impl PointState {
    pub fn new(j: M2, a: Pick) -> Self {
        Self { j, a }
    }

    /// `(J₀, 0)`, the Fuchsian point over `z = i`.
    pub fn standard() -> Self {
        Self { j: j0(), a: pick_zero() }
    }

    pub fn g(&self) -> M2 {
        metric_of(&self.j)
    }

    pub fn g_inv(&self) -> M2 {
        unimodular_inverse(&self.g())
    }

    pub fn frame(&self) -> M2 {
        frame_of(&self.j)
    }

    /// Cubic form `C_{ijm} = g(A(∂_i)∂_j, ∂_m)`.
    pub fn cubic(&self) -> Cubic {
        lower_pick(&self.a, &self.g())
    }

    /// Components in the Gram-Schmidt frame: `A_f[k] = P^{-1} A(P e_k) P`.
    pub fn a_frame(&self) -> Pick {
        let p = self.frame();
        let pi = p.try_inverse().expect("frame is invertible");
        pick_conj(&pick_precompose(&self.a, &p), &pi, &p)
    }

    /// Builds a point from `J` and frame components of `A`.
    pub fn from_frame(j: M2, a_frame: Pick) -> Self {
        let p = frame_of(&j);
        let pi = p.try_inverse().expect("frame is invertible");
        let a = pick_precompose(&pick_conj(&a_frame, &p, &pi), &pi);
        Self { j, a }
    }

    /// `‖A‖₀² = |A|²/8`.
    pub fn norm0_sq(&self) -> f64 {
        pick_inner(&self.a, &self.a, &self.g_inv()) / 8.0
    }

    /// Largest violation of the defining conditions of a point.
    pub fn invariant_residual(&self) -> f64 {
        let j = &self.j;
        let mut r = (j * j + M2::identity()).amax();
        let g = self.g();
        r = r.max((g - g.transpose()).amax());
        if g[(0, 0)] <= 0.0 {
            r = r.max(f64::INFINITY);
        }
        for i in 0..2 {
            r = r.max(self.a[i].trace().abs());
            let ga = g * self.a[i];
            r = r.max((ga - ga.transpose()).amax());
        }
        // A(J·) = A(·)J
        r = r.max(pick_max_abs(&pick_sub(&pick_precompose(&self.a, j), &pick_mul_right(&self.a, j))));
        // A(X)Y = A(Y)X on the coordinate basis
        let c01 = self.a[0].column(1) - self.a[1].column(0);
        r.max(c01.amax())
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let r = self.invariant_residual();
        if r <= tol {
            Ok(())
        } else {
            Err(LabError::Numerical { msg: "point violates the model constraints".into(), residual: r })
        }
    }
}

/// The chart point: `(i, w)` carries the displayed Pick form, and a general `z`
/// is reached by the upper-triangular transport `P_z`, so `‖A‖₀² = |w|²/2`.
pub fn point_from_coords(p: &CoordPoint) -> Result<PointState> {
    if !(p.z.im > 0.0) {
        return domain(format!("chart point needs Im z > 0, got {}", p.z));
    }
    let base = PointState { j: j0(), a: raise_cubic(&chart_cubic(Complex64::i(), p.w), &M2::identity()) };
    sl2_act(&transport_to(p.z), &base)
}

/// The cubic differential chart `(z, w) ↦ (j(z), Re(w̄ (dx − z̄ dy)^3))`.
/// It agrees with [`point_from_coords`] at `(z, w y^{-3/2})`.
pub fn cubic_chart_point(p: &CoordPoint) -> Result<PointState> {
    if !(p.z.im > 0.0) {
        return domain(format!("chart point needs Im z > 0, got {}", p.z));
    }
    let j = complex_structure_at(p.z);
    let g_inv = unimodular_inverse(&metric_of(&j));
    Ok(PointState { j, a: raise_cubic(&chart_cubic(p.z, p.w), &g_inv) })
}

/// Tangent with chart components `(ẋ, ẏ, u̇, v̇)`: the displayed tangent at
/// `(i, w)`, the derivative of the cubic differential chart there, transported
/// by `P_z`. It coincides with [`TangentVector::from_frame_parts`].
pub fn tangent_from_coords(p: &CoordPoint, xd: f64, yd: f64, ud: f64, vd: f64) -> Result<TangentVector> {
    if !(p.z.im > 0.0) {
        return domain(format!("chart point needs Im z > 0, got {}", p.z));
    }
    let jdot = M2::new(xd, -yd, -yd, -xd);
    let cdot = chart_cubic_dot(Complex64::i(), p.w, Complex64::new(xd, yd), Complex64::new(ud, vd));
    let at_i = TangentVector { jdot, adot: raise_cubic(&cdot, &M2::identity()) };
    sl2_act_tangent(&transport_to(p.z), &at_i)
}

/// Differential of [`point_from_coords`] applied to `(ẋ, ẏ, u̇, v̇)`; these are
/// the coordinate vector fields of the chart.
pub fn chart_differential(p: &CoordPoint, xd: f64, yd: f64, ud: f64, vd: f64) -> Result<TangentVector> {
    if !(p.z.im > 0.0) {
        return domain(format!("chart point needs Im z > 0, got {}", p.z));
    }
    let (x, y) = (p.z.re, p.z.im);
    let s = y.sqrt();
    let pz = transport_to(p.z);
    let pz_inv = M2::new(1.0 / s, -x / s, 0.0, s);
    let p_dot = M2::new(0.0, 1.0 / s, 0.0, 0.0) * xd + M2::new(0.5 / s, -0.5 * x / (s * y), 0.0, -0.5 / (s * y)) * yd;
    let pt = point_from_coords(p)?;
    let along_z = sl2_generator(&pt, &(p_dot * pz_inv));
    let cdot = chart_cubic_dot(Complex64::i(), p.w, Complex64::new(0.0, 0.0), Complex64::new(ud, vd));
    let along_w = sl2_act_tangent(&pz, &TangentVector { jdot: M2::zeros(), adot: raise_cubic(&cdot, &M2::identity()) })?;
    Ok(along_z.add(&along_w))
}

impl TangentVector {
    pub fn zero() -> Self {
        Self { jdot: M2::zeros(), adot: pick_zero() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { jdot: self.jdot + o.jdot, adot: pick_add(&self.adot, &o.adot) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { jdot: self.jdot - o.jdot, adot: pick_sub(&self.adot, &o.adot) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { jdot: self.jdot * s, adot: pick_scale(&self.adot, s) }
    }

    pub fn max_abs(&self) -> f64 {
        self.jdot.amax().max(pick_max_abs(&self.adot))
    }

    /// Trace part `Ȧ_tr(X) = ½ tr(Ȧ(X)) Id`.
    pub fn adot_tr(&self) -> Pick {
        [
            M2::identity() * (0.5 * self.adot[0].trace()),
            M2::identity() * (0.5 * self.adot[1].trace()),
        ]
    }

    /// Trace-free part `Ȧ₀ = Ȧ − Ȧ_tr`.
    pub fn adot_0(&self) -> Pick {
        pick_sub(&self.adot, &self.adot_tr())
    }

    /// `J̇` in the frame of `pt`.
    pub fn jdot_frame(&self, pt: &PointState) -> M2 {
        let p = pt.frame();
        p.try_inverse().expect("frame is invertible") * self.jdot * p
    }

    /// `Ȧ` in the frame of `pt`.
    pub fn adot_frame(&self, pt: &PointState) -> Pick {
        let p = pt.frame();
        let pi = p.try_inverse().expect("frame is invertible");
        pick_conj(&pick_precompose(&self.adot, &p), &pi, &p)
    }

    /// `Ȧ₀` in the frame of `pt`.
    pub fn adot_0_frame(&self, pt: &PointState) -> Pick {
        let f = self.adot_frame(pt);
        [crate::linalg::trace_free(&f[0]), crate::linalg::trace_free(&f[1])]
    }

    /// `Ȧ̃₀ = Ȧ₀ − T(J, A, J̇)`, in the frame of `pt`.
    pub fn adot_tilde0_frame(&self, pt: &PointState) -> Pick {
        pick_sub(&self.adot_0_frame(pt), &t_tensor_frame(&pt.a_frame(), &self.jdot_frame(pt)))
    }

    /// Builds the tangent at `pt` whose frame data are `J̇_f = [[a, −b], [−b, −a]]`
    /// and `Ȧ̃₀_f` the Pick form of the cubic `p + iq`.
    pub fn from_frame_parts(pt: &PointState, a: f64, b: f64, p: f64, q: f64) -> Self {
        let jf = M2::new(a, -b, -b, -a);
        let af = pt.a_frame();
        let tilde = [M2::new(p, q, q, -p), M2::new(q, -p, -p, -q)];
        let t = t_tensor_frame(&af, &jf);
        let j = j0();
        let tr = [
            M2::identity() * (0.5 * (j * af[0] * jf).trace()),
            M2::identity() * (0.5 * (j * af[1] * jf).trace()),
        ];
        let adot_f = pick_add(&pick_add(&tilde, &t), &tr);
        let fr = pt.frame();
        let fi = fr.try_inverse().expect("frame is invertible");
        Self { jdot: fr * jf * fi, adot: pick_precompose(&pick_conj(&adot_f, &fr, &fi), &fi) }
    }

    /// Largest violation of the linearized constraints at `pt`.
    pub fn invariant_residual(&self, pt: &PointState) -> f64 {
        let j = &pt.j;
        let mut r = (j * self.jdot + self.jdot * j).amax();
        for i in 0..2 {
            r = r.max((self.adot[i].trace() - (j * pt.a[i] * self.jdot).trace()).abs());
        }
        r
    }
}

/// `T(J, A, J̇) = A₁ J J̇ E e₁* + 2 A₂ J J̇ E e₂*` in frame form (`J = J₀`).
pub fn t_tensor_frame(a_frame: &Pick, jdot_frame: &M2) -> Pick {
    let m = j0() * jdot_frame * reflection_e();
    [a_frame[0] * m, a_frame[1] * m * 2.0]
}

/// `⟨X, Y⟩ = tr(X₁Y₁ + X₂Y₂)` in a `g_J`-orthonormal frame.
pub fn inner_a(pt: &PointState, x: &Pick, y: &Pick) -> f64 {
    pick_inner(x, y, &pt.g_inv())
}

/// `⟨J̇, J̇′⟩ = ½ tr(J̇ J̇′)`.
pub fn inner_j(a: &M2, b: &M2) -> f64 {
    0.5 * (a * b).trace()
}

/// The pseudo-Riemannian metric `ĝ_f`.
pub fn metric_g(profile: &ConformalProfile, pt: &PointState, t1: &TangentVector, t2: &TangentVector) -> Result<f64> {
    let (f, fp) = profile.f_and_prime(pt.norm0_sq())?;
    Ok(metric_with(f, fp, pt, t1, t2))
}

fn metric_with(f: f64, fp: f64, pt: &PointState, t1: &TangentVector, t2: &TangentVector) -> f64 {
    let gi = pt.g_inv();
    (1.0 - f) * inner_j(&t1.jdot, &t2.jdot) + fp / 6.0 * pick_inner(&t1.adot_0(), &t2.adot_0(), &gi)
        - fp / 12.0 * pick_inner(&t1.adot_tr(), &t2.adot_tr(), &gi)
}

/// The complex structure `Î(J̇, Ȧ) = (−J J̇, −Ȧ J − A J̇)`.
pub fn cplx_i(pt: &PointState, t: &TangentVector) -> TangentVector {
    TangentVector {
        jdot: -pt.j * t.jdot,
        adot: pick_scale(&pick_add(&pick_mul_right(&t.adot, &pt.j), &pick_mul_right(&pt.a, &t.jdot)), -1.0),
    }
}

/// The symplectic form `ω̂_f = ĝ_f(·, Î·)`.
pub fn symp_omega(profile: &ConformalProfile, pt: &PointState, t1: &TangentVector, t2: &TangentVector) -> Result<f64> {
    metric_g(profile, pt, t1, &cplx_i(pt, t2))
}

/// Pointwise weights `(f, f')` at `‖A‖₀²`, for repeated pairings at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointWeights {
    pub f: f64,
    pub fp: f64,
}

impl PointWeights {
    pub fn at(profile: &ConformalProfile, pt: &PointState) -> Result<Self> {
        let (f, fp) = profile.f_and_prime(pt.norm0_sq())?;
        Ok(Self { f, fp })
    }

    pub fn metric(&self, pt: &PointState, t1: &TangentVector, t2: &TangentVector) -> f64 {
        metric_with(self.f, self.fp, pt, t1, t2)
    }

    pub fn omega(&self, pt: &PointState, t1: &TangentVector, t2: &TangentVector) -> f64 {
        metric_with(self.f, self.fp, pt, t1, &cplx_i(pt, t2))
    }
}

fn check_sl2(p: &M2) -> Result<M2> {
    let d = p.determinant();
    if (d - 1.0).abs() > 1e-10 {
        return domain(format!("group element must have determinant 1, got {d}"));
    }
    Ok(p.try_inverse().expect("unit determinant"))
}

/// `P·(J, A) = (P J P^{-1}, P A(P^{-1}·) P^{-1})`.
pub fn sl2_act(p: &M2, pt: &PointState) -> Result<PointState> {
    let pi = check_sl2(p)?;
    Ok(PointState { j: p * pt.j * pi, a: pick_conj(&pick_precompose(&pt.a, &pi), p, &pi) })
}

/// Differential of the action on tangent vectors.
pub fn sl2_act_tangent(p: &M2, t: &TangentVector) -> Result<TangentVector> {
    let pi = check_sl2(p)?;
    Ok(TangentVector { jdot: p * t.jdot * pi, adot: pick_conj(&pick_precompose(&t.adot, &pi), p, &pi) })
}

/// Fundamental vector field of a traceless `X`, `d/ds|₀ exp(sX)·pt`.
pub fn sl2_generator(pt: &PointState, x: &M2) -> TangentVector {
    let jdot = commutator(x, &pt.j);
    let aprime: Pick = [0, 1].map(|i| x * pt.a[i] - pt.a[i] * x);
    let aprime = pick_sub(&aprime, &pick_precompose(&pt.a, x));
    tangent_from_derivative(pt, jdot, &aprime)
}

/// Converts the derivative `(J', A')` of a curve of coordinate data into the
/// tangent convention `Ȧ = g^{-1} Ċ = A' − J J' A`.
pub fn tangent_from_derivative(pt: &PointState, jprime: M2, aprime: &Pick) -> TangentVector {
    let jj = pt.j * jprime;
    TangentVector { jdot: jprime, adot: [aprime[0] - jj * pt.a[0], aprime[1] - jj * pt.a[1]] }
}

/// Moment map of the SL(2,ℝ)-action, `μ̂(X) = (1 − f(‖A‖₀²)) tr(J X)`.
pub fn moment_hat(profile: &ConformalProfile, pt: &PointState, x: &M2) -> Result<f64> {
    if x.trace().abs() > 1e-12 * x.amax().max(1.0) {
        return domain("moment map argument must be traceless");
    }
    let f = profile.eval_f(pt.norm0_sq())?;
    Ok((1.0 - f) * (pt.j * x).trace())
}

/// Circle action `(J, cos θ A − sin θ A J)`.
pub fn circle_act(theta: f64, pt: &PointState) -> PointState {
    let (s, c) = theta.sin_cos();
    PointState { j: pt.j, a: pick_sub(&pick_scale(&pt.a, c), &pick_scale(&pick_mul_right(&pt.a, &pt.j), s)) }
}

/// Differential of the circle action.
pub fn circle_act_tangent(theta: f64, pt: &PointState, t: &TangentVector) -> TangentVector {
    let (s, c) = theta.sin_cos();
    let rot = pick_add(&pick_mul_right(&t.adot, &pt.j), &pick_mul_right(&pt.a, &t.jdot));
    TangentVector { jdot: t.jdot, adot: pick_sub(&pick_scale(&t.adot, c), &pick_scale(&rot, s)) }
}

/// Generator of the circle action, `(0, −A J)`.
pub fn circle_generator(pt: &PointState) -> TangentVector {
    TangentVector { jdot: M2::zeros(), adot: pick_scale(&pick_mul_right(&pt.a, &pt.j), -1.0) }
}

/// Hamiltonian of the circle action, `Ĥ = (2/3) f(‖A‖₀²)`.
pub fn hamiltonian_hat(profile: &ConformalProfile, pt: &PointState) -> Result<f64> {
    Ok(2.0 / 3.0 * profile.eval_f(pt.norm0_sq())?)
}

/// The four frame basis tangents `(ẋ, ẏ, u̇, v̇)` at `pt`.
pub fn frame_basis(pt: &PointState) -> [TangentVector; 4] {
    [
        TangentVector::from_frame_parts(pt, 1.0, 0.0, 0.0, 0.0),
        TangentVector::from_frame_parts(pt, 0.0, 1.0, 0.0, 0.0),
        TangentVector::from_frame_parts(pt, 0.0, 0.0, 1.0, 0.0),
        TangentVector::from_frame_parts(pt, 0.0, 0.0, 0.0, 1.0),
    ]
}

/// Gram matrix of `ĝ_f` in the frame basis.
pub fn gram_matrix(profile: &ConformalProfile, pt: &PointState) -> Result<Matrix4<f64>> {
    let w = PointWeights::at(profile, pt)?;
    let basis = frame_basis(pt);
    Ok(Matrix4::from_fn(|a, b| w.metric(pt, &basis[a], &basis[b])))
}

/// Eigenvalue counts of the Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub min_abs_eigenvalue: f64,
}

pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

pub fn gram_signature(profile: &ConformalProfile, pt: &PointState) -> Result<Signature> {
    let eig = SymmetricEigen::new(gram_matrix(profile, pt)?).eigenvalues;
    let min_abs = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min_abs <= DEGENERACY_THRESHOLD {
        return Err(LabError::Numerical { msg: "degenerate Gram matrix".into(), residual: min_abs });
    }
    Ok(Signature {
        n_plus: eig.iter().filter(|v| **v > 0.0).count(),
        n_minus: eig.iter().filter(|v| **v < 0.0).count(),
        min_abs_eigenvalue: min_abs,
    })
}

/// Coordinate components `ω_ab` of `ω̂_f` in the chart `(x, y, u, v)`.
pub fn omega_components(profile: &ConformalProfile, q: [f64; 4]) -> Result<Matrix4<f64>> {
    let p = CoordPoint::new(Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3]))?;
    let pt = point_from_coords(&p)?;
    let w = PointWeights::at(profile, &pt)?;
    let mut basis = [TangentVector::zero(); 4];
    for (k, b) in basis.iter_mut().enumerate() {
        let mut d = [0.0; 4];
        d[k] = 1.0;
        *b = chart_differential(&p, d[0], d[1], d[2], d[3])?;
    }
    Ok(Matrix4::from_fn(|a, b| w.omega(&pt, &basis[a], &basis[b])))
}

/// Largest `|dω(∂_a, ∂_b, ∂_c)|` with central differences of step `h`.
pub fn omega_closedness_residual(profile: &ConformalProfile, p: &CoordPoint, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return domain("step size must be positive");
    }
    let base = [p.z.re, p.z.im, p.w.re, p.w.im];
    let mut deriv = Vec::with_capacity(4);
    for a in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[a] += h;
        minus[a] -= h;
        deriv.push((omega_components(profile, plus)? - omega_components(profile, minus)?) / (2.0 * h));
    }
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            for c in (b + 1)..4 {
                let d = deriv[a][(b, c)] - deriv[b][(a, c)] + deriv[c][(a, b)];
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}
