//! Fields of pairs `(J, A)` on a grid, their Levi-Civita calculus, curvature
//! and Lie derivatives.
//!
//! One-forms are stored as their coordinate components `(α_x, α_y)`, vector
//! fields as `(X^x, X^y)`, and two-forms as their coefficient against
//! `ρ = dx∧dy`. Endomorphism-valued two-forms are evaluated on `(∂x, ∂y)`.

use rayon::prelude::*;

use super::grid::Grid;
use crate::error::{domain, LabError, Result};
use crate::linalg::{commutator, pick_add, pick_max_abs, pick_precompose, pick_scale, pick_sub, Pick, M2, V2};
use crate::pointmodel::{metric_of, unimodular_inverse, PointState, TangentVector};

/// Christoffel symbols per node: `gamma[i]` is the matrix `(Γ_i)^k_j = Γ^k_{ij}`.
pub type Christoffel = [M2; 2];

/// Spectral tail above which a torus field is flagged as under-resolved.
pub const SMOOTHNESS_THRESHOLD: f64 = 1e-6;

/// A field of model points `(J, A)` with cached metric and connection.
#[derive(Debug, Clone)]
pub struct FieldState {
    grid: Grid,
    j: Vec<M2>,
    a: Vec<Pick>,
    g: Vec<M2>,
    g_inv: Vec<M2>,
    gamma: Vec<Christoffel>,
}

/// Christoffel symbols of an arbitrary metric field.
pub fn christoffel_from_metric(grid: &Grid, g: &[M2], g_inv: &[M2]) -> Vec<Christoffel> {
    let dg = [grid.dx(g), grid.dy(g)];
    (0..g.len())
        .into_par_iter()
        .map(|p| {
            let mut gamma = [M2::zeros(); 2];
            for (i, gi) in gamma.iter_mut().enumerate() {
                for k in 0..2 {
                    for j in 0..2 {
                        let mut s = 0.0;
                        for l in 0..2 {
                            s += g_inv[p][(k, l)] * (dg[i][p][(l, j)] + dg[j][p][(l, i)] - dg[l][p][(i, j)]);
                        }
                        gi[(k, j)] = 0.5 * s;
                    }
                }
            }
            gamma
        })
        .collect()
}

/// Gauss curvature `K = g(R(∂x,∂y)∂y, ∂x) / det g` of a metric field.
pub fn gauss_curvature_from_metric(grid: &Grid, g: &[M2], gamma: &[Christoffel]) -> Vec<f64> {
    let dx = grid.dx(gamma);
    let dy = grid.dy(gamma);
    (0..g.len())
        .map(|p| {
            let r = dx[p][1] - dy[p][0] + gamma[p][0] * gamma[p][1] - gamma[p][1] * gamma[p][0];
            (g[p] * r)[(0, 1)] / g[p].determinant()
        })
        .collect()
}

impl FieldState {
    /// Builds the state from coordinate data, checking `J² = −Id` and positivity of `g_J`.
    pub fn new(grid: Grid, j: Vec<M2>, a: Vec<Pick>) -> Result<Self> {
        if j.len() != grid.len() || a.len() != grid.len() {
            return domain(format!("field length {} / {} does not match grid size {}", j.len(), a.len(), grid.len()));
        }
        for (idx, jj) in j.iter().enumerate() {
            let r = (jj * jj + M2::identity()).amax();
            if !(r <= 1e-8) || !(metric_of(jj)[(0, 0)] > 0.0) {
                return domain(format!("node {idx} does not carry a compatible complex structure (residual {r:.3e})"));
            }
        }
        let g: Vec<M2> = j.iter().map(metric_of).collect();
        let g_inv: Vec<M2> = g.iter().map(unimodular_inverse).collect();
        let gamma = christoffel_from_metric(&grid, &g, &g_inv);
        Ok(Self { grid, j, a, g, g_inv, gamma })
    }

    pub fn from_points(grid: Grid, pts: &[PointState]) -> Result<Self> {
        Self::new(grid, pts.iter().map(|p| p.j).collect(), pts.iter().map(|p| p.a).collect())
    }

    /// Same complex structure, different Pick field.
    pub fn with_pick(&self, a: Vec<Pick>) -> Result<Self> {
        if a.len() != self.grid.len() {
            return domain("Pick field length does not match grid");
        }
        Ok(Self { a, ..self.clone() })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    pub fn j(&self) -> &[M2] {
        &self.j
    }

    pub fn a(&self) -> &[Pick] {
        &self.a
    }

    pub fn g(&self) -> &[M2] {
        &self.g
    }

    pub fn g_inv(&self) -> &[M2] {
        &self.g_inv
    }

    pub fn christoffel(&self) -> &[Christoffel] {
        &self.gamma
    }

    pub fn point(&self, idx: usize) -> PointState {
        PointState::new(self.j[idx], self.a[idx])
    }

    /// `‖A‖₀² = |A|²/8` per node.
    pub fn norm0_sq(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.point(p).norm0_sq()).collect()
    }

    /// Largest pointwise violation of the model constraints.
    pub fn invariant_residual(&self) -> f64 {
        (0..self.len()).map(|p| self.point(p).invariant_residual()).fold(0.0, f64::max)
    }

    /// True when some component of `J` or `A` has spectral tail above [`SMOOTHNESS_THRESHOLD`].
    pub fn non_smooth_warning(&self) -> bool {
        let Some(t) = self.grid.as_torus() else { return false };
        let mut comp = vec![0.0; self.len()];
        for k in 0..12 {
            for (p, c) in comp.iter_mut().enumerate() {
                *c = if k < 4 { self.j[p][(k / 2, k % 2)] } else { self.a[p][(k - 4) / 4][((k % 4) / 2, k % 2)] };
            }
            if t.spectral_tail(&comp) > SMOOTHNESS_THRESHOLD {
                return true;
            }
        }
        false
    }

    /// `max |∇g|` over the residual nodes.
    pub fn metric_compatibility_residual(&self) -> f64 {
        let dg = [self.grid.dx(&self.g), self.grid.dy(&self.g)];
        self.grid.interior_max((0..self.len()).map(|p| {
            (0..2)
                .map(|i| {
                    let gi = &self.gamma[p][i];
                    (dg[i][p] - gi.transpose() * self.g[p] - self.g[p] * gi).amax()
                })
                .fold(0.0, f64::max)
        }))
    }
}

/// A tangent field `(J̇, Ȧ)` with `Ȧ = g_J^{-1} Ċ` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    pub jdot: Vec<M2>,
    pub adot: Vec<Pick>,
}

impl TangentField {
    pub fn zero(len: usize) -> Self {
        Self { jdot: vec![M2::zeros(); len], adot: vec![[M2::zeros(); 2]; len] }
    }

    pub fn from_vectors(v: &[TangentVector]) -> Self {
        Self { jdot: v.iter().map(|t| t.jdot).collect(), adot: v.iter().map(|t| t.adot).collect() }
    }

    /// Per-node frame data `(a, b, p, q)` as in [`TangentVector::from_frame_parts`].
    pub fn from_frame_parts(fs: &FieldState, a: &[f64], b: &[f64], p: &[f64], q: &[f64]) -> Self {
        let v: Vec<TangentVector> =
            (0..fs.len()).map(|i| TangentVector::from_frame_parts(&fs.point(i), a[i], b[i], p[i], q[i])).collect();
        Self::from_vectors(&v)
    }

    pub fn len(&self) -> usize {
        self.jdot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jdot.is_empty()
    }

    pub fn at(&self, idx: usize) -> TangentVector {
        TangentVector { jdot: self.jdot[idx], adot: self.adot[idx] }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            jdot: self.jdot.iter().zip(&o.jdot).map(|(a, b)| a + b).collect(),
            adot: self.adot.iter().zip(&o.adot).map(|(a, b)| pick_add(a, b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { jdot: self.jdot.iter().map(|a| a * s).collect(), adot: self.adot.iter().map(|a| pick_scale(a, s)).collect() }
    }

    /// Trace-free part `Ȧ₀` per node.
    pub fn adot_0(&self) -> Vec<Pick> {
        (0..self.len()).map(|i| self.at(i).adot_0()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).map(|i| self.at(i).max_abs()).fold(0.0, f64::max)
    }

    /// Largest pointwise violation of the linearized constraints.
    pub fn invariant_residual(&self, fs: &FieldState) -> f64 {
        (0..self.len()).map(|i| self.at(i).invariant_residual(&fs.point(i))).fold(0.0, f64::max)
    }
}

/// `(df_x, df_y)`.
pub fn gradient(grid: &Grid, f: &[f64]) -> Vec<V2> {
    let (dx, dy) = (grid.dx(f), grid.dy(f));
    dx.into_iter().zip(dy).map(|(a, b)| V2::new(a, b)).collect()
}

/// `dα = (∂_x α_y − ∂_y α_x) ρ`.
pub fn exterior_d(grid: &Grid, alpha: &[V2]) -> Vec<f64> {
    let (dx, dy) = (grid.dx(alpha), grid.dy(alpha));
    dx.iter().zip(&dy).map(|(a, b)| a[1] - b[0]).collect()
}

/// `(α ∘ B)_j = α_i B^i_j` per node.
pub fn compose_form(alpha: &[V2], b: &[M2]) -> Vec<V2> {
    alpha.iter().zip(b).map(|(a, m)| m.transpose() * a).collect()
}

/// `d(ι_X ρ) = ∂_x X^x + ∂_y X^y` per node.
pub fn symplectic_defect(grid: &Grid, x: &[V2]) -> Vec<f64> {
    let (dx, dy) = (grid.dx(x), grid.dy(x));
    dx.iter().zip(&dy).map(|(a, b)| a[0] + b[1]).collect()
}

/// The field `X` with `ι_X ρ = dH`: `X = (∂_y H, −∂_x H)`.
pub fn hamiltonian_vector_field(grid: &Grid, h: &[f64]) -> Vec<V2> {
    gradient(grid, h).iter().map(|d| V2::new(d[1], -d[0])).collect()
}

/// `J X` per node.
pub fn rotate_field(fs: &FieldState, x: &[V2]) -> Vec<V2> {
    fs.j.iter().zip(x).map(|(j, v)| j * v).collect()
}

/// Covariant derivatives `(∇_x B, ∇_y B)` of an endomorphism field.
pub fn cov_endo(fs: &FieldState, b: &[M2]) -> [Vec<M2>; 2] {
    [0, 1].map(|i| {
        let d = fs.grid.d(b, i);
        d.iter().zip(b).zip(&fs.gamma).map(|((db, bb), gm)| db + commutator(&gm[i], bb)).collect()
    })
}

/// `(div_g B)(X) = Σ_i g((∇_{e_i} B) X, e_i)`, in coordinates `(div B)_l = Σ_i (∇_i B)^i_l`.
pub fn div_endo(fs: &FieldState, b: &[M2]) -> Vec<V2> {
    let nb = cov_endo(fs, b);
    (0..fs.len())
        .map(|p| {
            V2::new(nb[0][p][(0, 0)] + nb[1][p][(1, 0)], nb[0][p][(0, 1)] + nb[1][p][(1, 1)])
        })
        .collect()
}

/// Covariant derivatives `(∇_x P, ∇_y P)` of an endomorphism-valued one-form.
pub fn cov_pick(fs: &FieldState, pf: &[Pick]) -> [Vec<Pick>; 2] {
    [0, 1].map(|i| {
        let d = fs.grid.d(pf, i);
        (0..fs.len())
            .map(|p| {
                let gm = &fs.gamma[p];
                let pk = &pf[p];
                [0, 1].map(|j| {
                    d[p][j] + commutator(&gm[i], &pk[j]) - pk[0] * gm[i][(0, j)] - pk[1] * gm[i][(1, j)]
                })
            })
            .collect()
    })
}

/// `(d^∇P)(∂x, ∂y) = (∇_x P)(∂y) − (∇_y P)(∂x)`.
pub fn d_nabla_pick(fs: &FieldState, pf: &[Pick]) -> Vec<M2> {
    let np = cov_pick(fs, pf);
    (0..fs.len()).map(|p| np[0][p][1] - np[1][p][0]).collect()
}

/// `‖d^∇A‖_∞` over the residual nodes.
pub fn codazzi_residual(fs: &FieldState) -> f64 {
    fs.grid.interior_max(d_nabla_pick(fs, &fs.a).iter().map(|m| m.amax()))
}

/// `Δ_g ψ = ∂_i (g^{ij} ∂_j ψ)` (unit determinant).
pub fn laplacian(fs: &FieldState, psi: &[f64]) -> Vec<f64> {
    let flux: Vec<V2> = gradient(&fs.grid, psi).iter().zip(&fs.g_inv).map(|(d, gi)| gi * d).collect();
    symplectic_defect(&fs.grid, &flux)
}

/// Gauss curvature of `g_J`.
pub fn gauss_curvature(fs: &FieldState) -> Vec<f64> {
    gauss_curvature_from_metric(&fs.grid, &fs.g, &fs.gamma)
}

/// `J_ε = (J + εJ̇)/√(1 + ε² det J̇)` per node.
pub fn deform_complex_structure(j: &[M2], jdot: &[M2], eps: f64) -> Vec<M2> {
    j.iter().zip(jdot).map(|(jj, jd)| (jj + jd * eps) / (1.0 + eps * eps * jd.determinant()).sqrt()).collect()
}

fn check_anticommutes(fs: &FieldState, jdot: &[M2]) -> Result<()> {
    let r = fs.j.iter().zip(jdot).map(|(j, d)| (j * d + d * j).amax()).fold(0.0, f64::max);
    if r > 1e-8 * (1.0 + jdot.iter().map(|d| d.amax()).fold(0.0, f64::max)) {
        return Err(LabError::Precondition(format!("J̇ does not anticommute with J (residual {r:.3e})")));
    }
    Ok(())
}

/// Compares the central difference of `K` along `J_ε` with `½ d(div_g J̇)/ρ`;
/// returns the largest gap over the residual nodes.
pub fn curvature_variation_check(fs: &FieldState, jdot: &[M2], eps: f64) -> Result<f64> {
    check_anticommutes(fs, jdot)?;
    let zero = vec![[M2::zeros(); 2]; fs.len()];
    let kp = gauss_curvature(&FieldState::new(fs.grid.clone(), deform_complex_structure(&fs.j, jdot, eps), zero.clone())?);
    let km = gauss_curvature(&FieldState::new(fs.grid.clone(), deform_complex_structure(&fs.j, jdot, -eps), zero)?);
    let target = exterior_d(&fs.grid, &div_endo(fs, jdot));
    Ok(fs.grid.interior_max((0..fs.len()).map(|p| (kp[p] - km[p]) / (2.0 * eps) - 0.5 * target[p])))
}

/// Cubic form `C = g A` encoded slotwise, `(C_i)_{mj} = C(∂_i, ∂_j, ∂_m)`.
fn cubic_field(fs: &FieldState) -> Vec<Pick> {
    fs.a.iter().zip(&fs.g).map(|(a, g)| [g * a[0], g * a[1]]).collect()
}

/// `(L_X J, g^{-1} L_X C)` with `DX^i_j = ∂_j X^i`.
pub fn lie_derivative(fs: &FieldState, x: &[V2]) -> TangentField {
    let grid = &fs.grid;
    let (xdx, xdy) = (grid.dx(x), grid.dy(x));
    let (jdx, jdy) = (grid.dx(&fs.j), grid.dy(&fs.j));
    let c = cubic_field(fs);
    let (cdx, cdy) = (grid.dx(&c), grid.dy(&c));
    let mut out = TangentField::zero(fs.len());
    for p in 0..fs.len() {
        let dx = M2::from_columns(&[xdx[p], xdy[p]]);
        let (x0, x1) = (x[p][0], x[p][1]);
        let j = &fs.j[p];
        out.jdot[p] = jdx[p] * x0 + jdy[p] * x1 - dx * j + j * dx;
        let cp = &c[p];
        let pre = pick_precompose(cp, &dx);
        let lc: Pick = [0, 1].map(|i| cdx[p][i] * x0 + cdy[p][i] * x1 + pre[i] + cp[i] * dx + dx.transpose() * cp[i]);
        out.adot[p] = [fs.g_inv[p] * lc[0], fs.g_inv[p] * lc[1]];
    }
    out
}

fn require_symplectic(grid: &Grid, x: &[V2], tol: f64) -> Result<()> {
    let defect = grid.interior_max(symplectic_defect(grid, x).into_iter());
    if defect > tol {
        return Err(LabError::Precondition(format!("vector field is not symplectic: |d(ι_X ρ)| = {defect:.3e}")));
    }
    Ok(())
}

/// `sup |Î(L_X J, g^{-1}L_X C) + (L_{JX} J, g^{-1}L_{JX} C)|` for symplectic `X`.
pub fn complex_structure_lie_check(fs: &FieldState, x: &[V2]) -> Result<f64> {
    require_symplectic(&fs.grid, x, 1e-8)?;
    let lx = lie_derivative(fs, x);
    let ljx = lie_derivative(fs, &rotate_field(fs, x));
    Ok(fs.grid.interior_max((0..fs.len()).map(|p| {
        let i_lx = crate::pointmodel::cplx_i(&fs.point(p), &lx.at(p));
        i_lx.add(&ljx.at(p)).max_abs()
    })))
}

/// Pointwise sides of the trace identity for the Lie derivative of `J`.
#[derive(Debug, Clone)]
pub struct TraceLieSides {
    /// `½ tr(J̇ J L_X J)`.
    pub lhs: Vec<f64>,
    /// `(div_g J̇)(X) − div_g(J X)`.
    pub literal: Vec<f64>,
    /// `(div_g J̇)(X) − div_g(J̇ X)`.
    pub with_jdot: Vec<f64>,
}

pub fn trace_lie_sides(fs: &FieldState, jdot: &[M2], x: &[V2]) -> TraceLieSides {
    let lx = lie_derivative(fs, x);
    let div_jdot = div_endo(fs, jdot);
    let div_jx = symplectic_defect(&fs.grid, &rotate_field(fs, x));
    let jdx: Vec<V2> = jdot.iter().zip(x).map(|(d, v)| d * v).collect();
    let div_jdx = symplectic_defect(&fs.grid, &jdx);
    let mut s = TraceLieSides { lhs: vec![0.0; fs.len()], literal: vec![0.0; fs.len()], with_jdot: vec![0.0; fs.len()] };
    for p in 0..fs.len() {
        s.lhs[p] = 0.5 * (jdot[p] * fs.j[p] * lx.jdot[p]).trace();
        let dx = div_jdot[p].dot(&x[p]);
        s.literal[p] = dx - div_jx[p];
        s.with_jdot[p] = dx - div_jdx[p];
    }
    s
}

/// Left side of the linearized Codazzi equation,
/// `d^∇Ȧ₀(∂x,∂y) − J (div_g J̇ ∧ A)(∂x,∂y)`.
pub fn linearized_codazzi(fs: &FieldState, tf: &TangentField) -> Vec<M2> {
    let a0 = tf.adot_0();
    let dn = d_nabla_pick(fs, &a0);
    let dv = div_endo(fs, &tf.jdot);
    (0..fs.len())
        .map(|p| {
            let a = &fs.a[p];
            let wedge = a[1] * dv[p][0] - a[0] * dv[p][1];
            dn[p] - fs.j[p] * wedge
        })
        .collect()
}

pub fn linearized_codazzi_residual(fs: &FieldState, tf: &TangentField) -> f64 {
    fs.grid.interior_max(linearized_codazzi(fs, tf).iter().map(|m| m.amax()))
}

/// Pulls a pair back by a local diffeomorphism with Jacobian `m`:
/// `(M^{-1} J M, det(M) · M^{-1} A(M·) M)`, the second entry being `g^{-1}φ*C`.
pub fn pullback_point(pt: &PointState, m: &M2) -> PointState {
    let mi = m.try_inverse().expect("Jacobian is invertible");
    let a = crate::linalg::pick_conj(&pick_precompose(&pt.a, m), &mi, m);
    PointState::new(mi * pt.j * m, pick_scale(&a, m.determinant()))
}

/// Largest entry of a Pick-field difference.
pub fn pick_field_gap(a: &[Pick], b: &[Pick]) -> f64 {
    a.iter().zip(b).map(|(x, y)| pick_max_abs(&pick_sub(x, y))).fold(0.0, f64::max)
}
