//! Frame ODE of a hyperbolic affine sphere centred at the origin.
//!
//! In a conformal coordinate `z` with Blaschke metric `h = e^ψ|dz|²` and
//! cubic coefficient `Q`, the frame `F` with rows `(f_z, f_z̄, f)` satisfies
//! `F_z = A F` and `F_z̄ = B F`, where, with `U = Q/√2`,
//!
//! ```text
//! A = | ψ_z  U e^{−ψ}  0     |      B = | 0        0    ½e^ψ |
//!     | 0    0         ½e^ψ  |          | Ū e^{−ψ} ψ_z̄  0    |
//!     | 1    0         0     |          | 0        1    0    |
//! ```
//!
//! The zero-curvature form is `A_z̄ − B_z + [A, B] = 0`. Its `(0,0)` entry is
//! `ψ_zz̄ + ½|Q|²e^{−2ψ} − ½e^ψ` and its `(0,1)` entry is `e^{−ψ} Q_z̄/√2`;
//! every other entry vanishes identically.

use std::f64::consts::SQRT_2;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, LabError, Result};

/// Largest RK4 step used by [`integrate_frame`] and the mesh builders.
pub const MAX_STEP: f64 = 1.0 / 256.0;

/// Row and ordering convention of the frame system.
pub const FRAME_CONVENTION: &str =
    "rows (f_z, f_zbar, f); F_z = A F, F_zbar = B F; zero curvature A_zbar - B_z + [A, B] = 0";

pub type CMat3 = Matrix3<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs(m: &CMat3) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

/// Second-order jet of `(ψ, Q)` at a point. `ψ` is real, so `ψ_z̄ = conj(ψ_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub psi: f64,
    pub psi_z: Complex64,
    pub psi_zzbar: f64,
    pub q: Complex64,
    pub q_zbar: Complex64,
}

impl Jet {
    /// `ψ_zz̄ + ½|Q|²e^{−2ψ} − ½e^ψ`.
    pub fn vortex_defect(&self) -> f64 {
        self.psi_zzbar + 0.5 * self.q.norm_sqr() * (-2.0 * self.psi).exp() - 0.5 * self.psi.exp()
    }

    fn check(self) -> Result<Self> {
        let finite = self.psi.is_finite()
            && self.psi_z.is_finite()
            && self.psi_zzbar.is_finite()
            && self.q.is_finite()
            && self.q_zbar.is_finite();
        if finite {
            Ok(self)
        } else {
            domain("surface data is not finite at this point")
        }
    }
}

/// Source of `(ψ, Q)` jets on a planar domain.
pub trait FrameData: Send + Sync {
    fn jet(&self, z: Complex64) -> Result<Jet>;
}

/// Constant `Q` with the constant solution `e^{3ψ} = |Q|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiteicaData {
    pub q: Complex64,
}

impl TiteicaData {
    pub fn new(q: Complex64) -> Result<Self> {
        if q.norm() == 0.0 || !q.is_finite() {
            return domain("Titeica data need a finite nonzero Q");
        }
        Ok(Self { q })
    }

    /// `ψ = (2/3) ln|Q|`.
    pub fn psi(&self) -> f64 {
        2.0 / 3.0 * self.q.norm().ln()
    }
}

impl FrameData for TiteicaData {
    fn jet(&self, _z: Complex64) -> Result<Jet> {
        Ok(Jet { psi: self.psi(), psi_z: c(0.0), psi_zzbar: 0.0, q: self.q, q_zbar: c(0.0) })
    }
}

/// Titeica data pulled back by `w = z + a z²`: `Q = q₀ (1 + 2az)³`,
/// `ψ = ψ₀ + ln|1 + 2az|²`. On-shell wherever `1 + 2az ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackData {
    pub base: TiteicaData,
    pub a: Complex64,
}

impl FrameData for PullbackData {
    fn jet(&self, z: Complex64) -> Result<Jet> {
        let gp = 1.0 + 2.0 * self.a * z;
        if gp.norm() < 1e-8 {
            return domain("pullback map is singular at this point");
        }
        Jet {
            psi: self.base.psi() + gp.norm_sqr().ln(),
            psi_z: 2.0 * self.a / gp,
            psi_zzbar: 0.0,
            q: self.base.q * gp * gp * gp,
            q_zbar: c(0.0),
        }
        .check()
    }
}

/// `Q = 0` with the Poincaré disk metric `e^ψ = 4/(1 − |z|²)²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperboloidData;

impl FrameData for HyperboloidData {
    fn jet(&self, z: Complex64) -> Result<Jet> {
        let s = 1.0 - z.norm_sqr();
        if s <= 0.0 {
            return domain("hyperboloid data live on the unit disk");
        }
        Ok(Jet {
            psi: 4.0_f64.ln() - 2.0 * s.ln(),
            psi_z: 2.0 * z.conj() / s,
            psi_zzbar: 2.0 / (s * s),
            q: c(0.0),
            q_zbar: c(0.0),
        })
    }
}

/// `ψ + psi_shift` and `Q + q_antiholo·z̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbed<D> {
    pub base: D,
    pub psi_shift: f64,
    pub q_antiholo: Complex64,
}

impl<D: FrameData> FrameData for Perturbed<D> {
    fn jet(&self, z: Complex64) -> Result<Jet> {
        let mut j = self.base.jet(z)?;
        j.psi += self.psi_shift;
        j.q += self.q_antiholo * z.conj();
        j.q_zbar += self.q_antiholo;
        Ok(j)
    }
}

/// The matrices `A`, `B` of the frame system for given surface data.
#[derive(Debug, Clone)]
pub struct ConnectionPair<D> {
    pub data: D,
}

pub fn connection_matrices<D: FrameData>(data: D) -> ConnectionPair<D> {
    ConnectionPair { data }
}

fn a_of(j: &Jet) -> CMat3 {
    let u = j.q / SQRT_2;
    let e = j.psi.exp();
    let z = c(0.0);
    CMat3::new(j.psi_z, u / e, z, z, z, c(0.5 * e), c(1.0), z, z)
}

fn b_of(j: &Jet) -> CMat3 {
    let u = j.q / SQRT_2;
    let e = j.psi.exp();
    let z = c(0.0);
    CMat3::new(z, z, c(0.5 * e), u.conj() / e, j.psi_z.conj(), z, z, c(1.0), z)
}

impl<D: FrameData> ConnectionPair<D> {
    pub fn a(&self, z: Complex64) -> Result<CMat3> {
        Ok(a_of(&self.data.jet(z)?))
    }

    pub fn b(&self, z: Complex64) -> Result<CMat3> {
        Ok(b_of(&self.data.jet(z)?))
    }

    /// `A_z̄ − B_z + [A, B]` with jet derivatives.
    pub fn curvature(&self, z: Complex64) -> Result<CMat3> {
        let j = self.data.jet(z)?;
        let (a, b) = (a_of(&j), b_of(&j));
        let e = j.psi.exp();
        let u = j.q / SQRT_2;
        let u_zbar = j.q_zbar / SQRT_2;
        let psi_zbar = j.psi_z.conj();
        let zero = c(0.0);
        let a_zbar = CMat3::new(
            c(j.psi_zzbar),
            (u_zbar - u * psi_zbar) / e,
            zero,
            zero,
            zero,
            0.5 * psi_zbar * e,
            zero,
            zero,
            zero,
        );
        let ubar_z = u_zbar.conj();
        let b_z = CMat3::new(
            zero,
            zero,
            0.5 * j.psi_z * e,
            (ubar_z - u.conj() * j.psi_z) / e,
            c(j.psi_zzbar),
            zero,
            zero,
            zero,
            zero,
        );
        Ok(a_zbar - b_z + a * b - b * a)
    }

    /// Largest entry of the curvature at `z`.
    pub fn curvature_residual(&self, z: Complex64) -> Result<f64> {
        Ok(max_abs(&self.curvature(z)?))
    }

    /// Curvature with `A_z̄`, `B_z` from central differences of step `h`.
    pub fn curvature_fd(&self, z: Complex64, h: f64) -> Result<CMat3> {
        let dx = |m: &dyn Fn(Complex64) -> Result<CMat3>| -> Result<(CMat3, CMat3)> {
            let mx = (m(z + h)? - m(z - h)?) / c(2.0 * h);
            let my = (m(z + I * h)? - m(z - I * h)?) / c(2.0 * h);
            Ok((mx, my))
        };
        let (ax, ay) = dx(&|w| self.a(w))?;
        let (bx, by) = dx(&|w| self.b(w))?;
        let a_zbar = (ax + ay * I) * c(0.5);
        let b_z = (bx - by * I) * c(0.5);
        let (a, b) = (self.a(z)?, self.b(z)?);
        Ok(a_zbar - b_z + a * b - b * a)
    }

    /// Generator `d·A + d̄·B` of the frame along a segment with direction `d`.
    fn generator(&self, z: Complex64, d: Complex64) -> Result<CMat3> {
        let j = self.data.jet(z)?;
        Ok(a_of(&j) * d + b_of(&j) * d.conj())
    }
}

/// Frame `F` with rows `(f_z, f_z̄, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub f: CMat3,
}

impl FrameState {
    /// Validates conjugation symmetry, reality and transversality.
    pub fn new(f: CMat3) -> Result<Self> {
        let s = Self { f };
        let scale = max_abs(&f).max(1.0);
        if s.reality_defect() > 1e-10 * scale {
            return domain("frame violates f_zbar = conj(f_z) or f real");
        }
        if s.transversality() < 1e-12 {
            return domain("frame is degenerate");
        }
        Ok(s)
    }

    /// Canonical frame `f_z = e^{ψ/2}(1, −i, 0)/2`, `f = (0, 0, 1)`, so that
    /// `det(f_x, f_y, f) = e^ψ`.
    pub fn canonical(psi: f64) -> Self {
        let s = (0.5 * psi).exp();
        let z = c(0.0);
        let f = CMat3::new(c(0.5 * s), -0.5 * s * I, z, c(0.5 * s), 0.5 * s * I, z, z, z, c(1.0));
        Self { f }
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.f[(2, 0)].re, self.f[(2, 1)].re, self.f[(2, 2)].re)
    }

    /// Columns `(f_x, f_y, f)` with `f_x = 2 Re f_z`, `f_y = −2 Im f_z`.
    pub fn real_frame(&self) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for k in 0..3 {
            m[(k, 0)] = 2.0 * self.f[(0, k)].re;
            m[(k, 1)] = -2.0 * self.f[(0, k)].im;
            m[(k, 2)] = self.f[(2, k)].re;
        }
        m
    }

    /// `max |f_z̄ − conj f_z|, |Im f|`.
    pub fn reality_defect(&self) -> f64 {
        (0..3).fold(0.0_f64, |a, k| a.max((self.f[(1, k)] - self.f[(0, k)].conj()).norm()).max(self.f[(2, k)].im.abs()))
    }

    /// `|det(f_x, f_y, f)|` divided by the product of the column norms.
    pub fn transversality(&self) -> f64 {
        let m = self.real_frame();
        let norms: f64 = (0..3).map(|k| m.column(k).norm()).product();
        if norms == 0.0 {
            0.0
        } else {
            m.determinant().abs() / norms
        }
    }

    /// `det(f_x, f_y, f) e^{−ψ} − 1`, which the exact flow keeps at zero for
    /// a canonical start.
    pub fn det_drift(&self, psi: f64) -> f64 {
        self.real_frame().determinant() * (-psi).exp() - 1.0
    }
}

fn rk4_step<D: FrameData>(cp: &ConnectionPair<D>, f: &CMat3, z: Complex64, d: Complex64, h: f64) -> Result<CMat3> {
    let hd = d * h;
    let m0 = cp.generator(z, d)?;
    let mh = cp.generator(z + hd * 0.5, d)?;
    let m1 = cp.generator(z + hd, d)?;
    let hc = c(h);
    let k1 = m0 * f;
    let k2 = mh * (f + k1 * (hc * 0.5));
    let k3 = mh * (f + k2 * (hc * 0.5));
    let k4 = m1 * (f + k3 * hc);
    Ok(f + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (hc / 6.0))
}

/// RK4 along the polyline `path`, each segment split into equal steps no
/// longer than `max_step`. No drift check.
pub fn integrate_path<D: FrameData>(
    cp: &ConnectionPair<D>,
    f0: &FrameState,
    path: &[Complex64],
    max_step: f64,
) -> Result<FrameState> {
    if !(max_step > 0.0) {
        return domain("step must be positive");
    }
    let mut f = f0.f;
    for seg in path.windows(2) {
        let d = seg[1] - seg[0];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let steps = (len / max_step).ceil() as usize;
        let h = 1.0 / steps as f64;
        for s in 0..steps {
            f = rk4_step(cp, &f, seg[0] + d * (s as f64 * h), d, h)?;
        }
    }
    let out = FrameState { f };
    if out.transversality() < 1e-12 || !out.f.iter().all(|v| v.is_finite()) {
        return Err(LabError::Numerical { msg: "frame lost transversality".into(), residual: out.transversality() });
    }
    Ok(out)
}

/// [`integrate_path`] followed by invariant checks: reality to `1e−8`
/// relative and determinant drift against the start below `1e−6`.
pub fn integrate_frame<D: FrameData>(
    cp: &ConnectionPair<D>,
    f0: &FrameState,
    path: &[Complex64],
    max_step: f64,
) -> Result<FrameState> {
    let out = integrate_path(cp, f0, path, max_step)?;
    let (Some(&start), Some(&end)) = (path.first(), path.last()) else {
        return Ok(out);
    };
    let scale = max_abs(&out.f).max(1.0);
    let reality = out.reality_defect() / scale;
    if reality > 1e-8 {
        return Err(LabError::Numerical { msg: "reality of the frame drifted".into(), residual: reality });
    }
    let d0 = f0.real_frame().determinant() * (-cp.data.jet(start)?.psi).exp();
    let d1 = out.real_frame().determinant() * (-cp.data.jet(end)?.psi).exp();
    let drift = ((d1 - d0) / d0).abs();
    if drift > 1e-6 {
        return Err(LabError::Numerical { msg: "determinant drift too large, refine the step".into(), residual: drift });
    }
    Ok(out)
}

/// Rectangle loop from `corner` with sides `w`, `h`; returns
/// `max|F_end − F_0| / max|F_0|`.
pub fn loop_holonomy<D: FrameData>(
    cp: &ConnectionPair<D>,
    f0: &FrameState,
    corner: Complex64,
    w: f64,
    h: f64,
    max_step: f64,
) -> Result<f64> {
    let path = [corner, corner + w, corner + w + I * h, corner + I * h, corner];
    let end = integrate_path(cp, f0, &path, max_step)?;
    Ok(max_abs(&(end.f - f0.f)) / max_abs(&f0.f))
}

/// Immersion sampled on the square `[−extent, extent]²` with nodes
/// `z = (ix − m) s + i (iy − m) s`, index `iy·side + ix`.
#[derive(Debug, Clone)]
pub struct ImmersionMesh {
    pub side: usize,
    pub spacing: f64,
    pub nodes: Vec<Complex64>,
    pub points: Vec<Vector3<f64>>,
    pub psi: Vec<f64>,
    pub frames: Vec<FrameState>,
}

/// Integrates from the canonical frame at `0` along the real axis, then
/// along each vertical line in parallel.
pub fn immersion_mesh<D: FrameData>(cp: &ConnectionPair<D>, extent: f64, spacing: f64) -> Result<ImmersionMesh> {
    if !(spacing > 0.0 && extent >= 0.0) {
        return domain("extent and spacing must be positive");
    }
    let m = (extent / spacing).round() as usize;
    if ((m as f64) * spacing - extent).abs() > 1e-9 * extent.max(1.0) {
        return domain("extent must be a multiple of the spacing");
    }
    let side = 2 * m + 1;
    let node = |ix: usize, iy: usize| Complex64::new((ix as f64 - m as f64) * spacing, (iy as f64 - m as f64) * spacing);
    let f0 = FrameState::canonical(cp.data.jet(c(0.0))?.psi);
    let mut axis = vec![f0.clone(); side];
    for dir in [1isize, -1] {
        let mut f = f0.clone();
        for k in 1..=m {
            let ix = (m as isize + dir * k as isize) as usize;
            let prev = (m as isize + dir * (k as isize - 1)) as usize;
            f = integrate_frame(cp, &f, &[node(prev, m), node(ix, m)], MAX_STEP)?;
            axis[ix] = f.clone();
        }
    }
    let columns: Vec<Vec<FrameState>> = (0..side)
        .into_par_iter()
        .map(|ix| {
            let mut col = vec![axis[ix].clone(); side];
            for dir in [1isize, -1] {
                let mut f = axis[ix].clone();
                for k in 1..=m {
                    let iy = (m as isize + dir * k as isize) as usize;
                    let prev = (m as isize + dir * (k as isize - 1)) as usize;
                    f = integrate_frame(cp, &f, &[node(ix, prev), node(ix, iy)], MAX_STEP)?;
                    col[iy] = f.clone();
                }
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let mut nodes = Vec::with_capacity(side * side);
    let mut frames = Vec::with_capacity(side * side);
    let mut psi = Vec::with_capacity(side * side);
    for iy in 0..side {
        for (ix, col) in columns.iter().enumerate() {
            let z = node(ix, iy);
            nodes.push(z);
            psi.push(cp.data.jet(z)?.psi);
            frames.push(col[iy].clone());
        }
    }
    let points = frames.iter().map(FrameState::position).collect();
    Ok(ImmersionMesh { side, spacing, nodes, points, psi, frames })
}

/// Titeica immersion for constant nonzero `Q`.
pub fn titeica_immersion(q: Complex64, extent: f64, spacing: f64) -> Result<ImmersionMesh> {
    immersion_mesh(&connection_matrices(TiteicaData::new(q)?), extent, spacing)
}

/// Structure-equation checks on the sampled immersion, using only the
/// positions and fourth-order finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersionHooks {
    /// `max |ξ − f| / |f|` with `ξ = ½ Δ_h f`.
    pub normal_residual: f64,
    /// `max |λ e^{−ψ} − 1|` where `h = λ(dx² + dy²)`.
    pub blaschke_residual: f64,
    /// `max (|h₁₂| + |h₁₁ − h₂₂|) / λ`.
    pub conformal_residual: f64,
    /// Number of interior nodes checked.
    pub nodes: usize,
}

/// Reconstructs the Blaschke metric `h_ij = G_ij |det G|^{−1/4}`, with
/// `G_ij = det(f_x, f_y, f_ij)`, and the affine normal `½ Δ_h f`.
pub fn verify_immersion(mesh: &ImmersionMesh) -> Result<ImmersionHooks> {
    let side = mesh.side;
    if side < 5 {
        return domain("mesh needs at least five nodes per side");
    }
    let h = mesh.spacing;
    let p = |ix: usize, iy: usize| mesh.points[iy * side + ix];
    let d1 = |a: [Vector3<f64>; 5]| (a[0] - a[1] * 8.0 + a[3] * 8.0 - a[4]) / (12.0 * h);
    let d2 = |a: [Vector3<f64>; 5]| (-a[0] + a[1] * 16.0 - a[2] * 30.0 + a[3] * 16.0 - a[4]) / (12.0 * h * h);
    let row = |ix: usize, iy: usize| std::array::from_fn::<_, 5, _>(|k| p(ix + k - 2, iy));
    let col = |ix: usize, iy: usize| std::array::from_fn::<_, 5, _>(|k| p(ix, iy + k - 2));
    let mut out = ImmersionHooks { normal_residual: 0.0, blaschke_residual: 0.0, conformal_residual: 0.0, nodes: 0 };
    for iy in 2..side - 2 {
        for ix in 2..side - 2 {
            let fx = d1(row(ix, iy));
            let fy = d1(col(ix, iy));
            let fxx = d2(row(ix, iy));
            let fyy = d2(col(ix, iy));
            let fxy = d1(std::array::from_fn(|k| d1(row(ix, iy + k - 2))));
            let det = |v: Vector3<f64>| Matrix3::from_columns(&[fx, fy, v]).determinant();
            let (g11, g12, g22) = (det(fxx), det(fxy), det(fyy));
            let scale = (g11 * g22 - g12 * g12).abs().powf(0.25);
            if !(scale > 0.0) {
                return Err(LabError::Numerical { msg: "degenerate second fundamental form".into(), residual: scale });
            }
            let (h11, h12, h22) = (g11 / scale, g12 / scale, g22 / scale);
            let lambda = 0.5 * (h11 + h22);
            let f = p(ix, iy);
            let xi = (fxx + fyy) / (2.0 * lambda);
            out.normal_residual = out.normal_residual.max((xi - f).norm() / f.norm());
            out.blaschke_residual =
                out.blaschke_residual.max((lambda * (-mesh.psi[iy * side + ix]).exp() - 1.0).abs());
            out.conformal_residual = out.conformal_residual.max((h12.abs() + (h11 - h22).abs()) / lambda);
            out.nodes += 1;
        }
    }
    Ok(out)
}
