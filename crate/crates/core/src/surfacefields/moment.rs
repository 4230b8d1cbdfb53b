//! The field moment map `μ̃`, its differential, the W-system, the bridge to
//! the Wang equation, the circle Hamiltonian and the Weil-Petersson pairings.

use rayon::prelude::*;

use super::fields::{
    compose_form, cov_pick, deform_complex_structure, div_endo, exterior_d, gauss_curvature, gradient, laplacian,
    lie_derivative, linearized_codazzi, symplectic_defect, FieldState, TangentField,
};
use super::grid::Grid;
use crate::error::{domain, LabError, Result};
use crate::linalg::{cubic_trace_free, lower_pick, pick_inner, pick_mul_right, raise_cubic, Pick, M2, V2};
use crate::pointmodel::{circle_act, PointState, PointWeights};
use crate::scalarfuncs::ConformalProfile;

/// `t = ‖A‖₀²`, `f(t)` and `f'(t)` per node.
#[derive(Debug, Clone)]
pub struct NodeWeights {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
}

impl NodeWeights {
    pub fn new(profile: &ConformalProfile, fs: &FieldState) -> Result<Self> {
        let t = fs.norm0_sq();
        let pairs: Vec<(f64, f64)> = t.par_iter().map(|&s| profile.f_and_prime(s)).collect::<Result<_>>()?;
        let (f, fp) = pairs.into_iter().unzip();
        Ok(Self { t, f, fp })
    }
}

/// The terms of `μ̃ / ρ`.
#[derive(Debug, Clone)]
pub struct MuTilde {
    /// `−(f'/6) ⟨∇_x A, (∇_y A) J⟩`.
    pub pick_term: Vec<f64>,
    /// `2 K (f − 1)`.
    pub curvature_term: Vec<f64>,
    /// `d(df ∘ J) / ρ`.
    pub laplacian_term: Vec<f64>,
    /// `2c`.
    pub constant: f64,
    pub total: Vec<f64>,
}

fn pick_pairing_term(fs: &FieldState, w: &NodeWeights) -> Vec<f64> {
    let na = cov_pick(fs, fs.a());
    (0..fs.len())
        .map(|p| {
            let yj = pick_mul_right(&na[1][p], &fs.j()[p]);
            -w.fp[p] / 6.0 * pick_inner(&na[0][p], &yj, &fs.g_inv()[p])
        })
        .collect()
}

/// `μ̃(J, A)` as a coefficient of `ρ`.
pub fn moment_field_mu_tilde(profile: &ConformalProfile, fs: &FieldState) -> Result<MuTilde> {
    let w = NodeWeights::new(profile, fs)?;
    let k = gauss_curvature(fs);
    let pick_term = pick_pairing_term(fs, &w);
    let curvature_term: Vec<f64> = k.iter().zip(&w.f).map(|(k, f)| 2.0 * k * (f - 1.0)).collect();
    let laplacian_term = exterior_d(fs.grid(), &compose_form(&gradient(fs.grid(), &w.f), fs.j()));
    let constant = 2.0 * profile.c();
    let total = (0..fs.len()).map(|p| pick_term[p] + curvature_term[p] + laplacian_term[p] + constant).collect();
    Ok(MuTilde { pick_term, curvature_term, laplacian_term, constant, total })
}

/// The two sides of `μ̃ = −2 e^F (K_h − ‖τ‖²_h + 1) ρ` with `h = e^F g_J`.
#[derive(Debug, Clone)]
pub struct BridgeSides {
    pub mu_tilde: Vec<f64>,
    pub wang_side: Vec<f64>,
}

impl BridgeSides {
    pub fn residual(&self, grid: &Grid) -> f64 {
        grid.interior_max(self.mu_tilde.iter().zip(&self.wang_side).map(|(a, b)| a - b))
    }
}

pub fn wang_bridge(profile: &ConformalProfile, fs: &FieldState) -> Result<BridgeSides> {
    let mu = moment_field_mu_tilde(profile, fs)?;
    let t = fs.norm0_sq();
    let big_f: Vec<f64> = t.par_iter().map(|&s| profile.eval_F(s)).collect::<Result<_>>()?;
    let k = gauss_curvature(fs);
    let lap = laplacian(fs, &big_f);
    let wang_side = (0..fs.len())
        .map(|p| {
            let e = big_f[p].exp();
            let k_h = (k[p] - 0.5 * lap[p]) / e;
            let tau_h = 2.0 * t[p] / (e * e * e);
            -2.0 * e * (k_h - tau_h + 1.0)
        })
        .collect();
    Ok(BridgeSides { mu_tilde: mu.total, wang_side })
}

/// Pointwise gap of the bridge identity over the residual nodes.
pub fn wang_bridge_residual(profile: &ConformalProfile, fs: &FieldState) -> Result<f64> {
    Ok(wang_bridge(profile, fs)?.residual(fs.grid()))
}

/// `ḟ = (f'/4)⟨A, Ȧ₀⟩` and `ḟ₀ = −(f'/4)⟨A, Ȧ₀ J⟩` per node.
pub fn f_dots(fs: &FieldState, w: &NodeWeights, tf: &TangentField) -> (Vec<f64>, Vec<f64>) {
    let a0 = tf.adot_0();
    (0..fs.len())
        .map(|p| {
            let (a, gi) = (&fs.a()[p], &fs.g_inv()[p]);
            let fd = w.fp[p] / 4.0 * pick_inner(a, &a0[p], gi);
            let fd0 = -w.fp[p] / 4.0 * pick_inner(a, &pick_mul_right(&a0[p], &fs.j()[p]), gi);
            (fd, fd0)
        })
        .unzip()
}

/// The W-system: one-forms `α₁, α₂`, their exterior derivatives, and the
/// linearized Codazzi field.
#[derive(Debug, Clone)]
pub struct WSystem {
    pub alpha1: Vec<V2>,
    pub alpha2: Vec<V2>,
    pub d_alpha1: Vec<f64>,
    pub d_alpha2: Vec<f64>,
    pub codazzi: Vec<M2>,
}

impl WSystem {
    /// `(max |dα₁|, max |dα₂|, max |Codazzi|)` over the residual nodes.
    pub fn residuals(&self, grid: &Grid) -> [f64; 3] {
        [
            grid.interior_max(self.d_alpha1.iter().copied()),
            grid.interior_max(self.d_alpha2.iter().copied()),
            grid.interior_max(self.codazzi.iter().map(|m| m.amax())),
        ]
    }
}

/// `⟨(∇_i A) J, Ȧ₀⟩` and `⟨∇_i A, Ȧ₀⟩` as one-forms.
fn pick_forms(fs: &FieldState, a0: &[Pick]) -> (Vec<V2>, Vec<V2>) {
    let na = cov_pick(fs, fs.a());
    (0..fs.len())
        .map(|p| {
            let gi = &fs.g_inv()[p];
            let j = &fs.j()[p];
            let beta = V2::new(
                pick_inner(&pick_mul_right(&na[0][p], j), &a0[p], gi),
                pick_inner(&pick_mul_right(&na[1][p], j), &a0[p], gi),
            );
            let plain = V2::new(pick_inner(&na[0][p], &a0[p], gi), pick_inner(&na[1][p], &a0[p], gi));
            (beta, plain)
        })
        .unzip()
}

pub fn w_system(profile: &ConformalProfile, fs: &FieldState, tf: &TangentField) -> Result<WSystem> {
    let grid = fs.grid();
    let w = NodeWeights::new(profile, fs)?;
    let (fd, fd0) = f_dots(fs, &w, tf);
    let scaled: Vec<M2> = tf.jdot.iter().zip(&w.f).map(|(jd, f)| jd * (f - 1.0)).collect();
    let div_scaled = div_endo(fs, &scaled);
    let (beta, plain) = pick_forms(fs, &tf.adot_0());
    let dfd_j = compose_form(&gradient(grid, &fd), fs.j());
    let dfd0_j = compose_form(&gradient(grid, &fd0), fs.j());
    let div_j = compose_form(&div_scaled, fs.j());
    let alpha1: Vec<V2> = (0..fs.len()).map(|p| div_scaled[p] + dfd_j[p] - beta[p] * (w.fp[p] / 6.0)).collect();
    let alpha2: Vec<V2> = (0..fs.len()).map(|p| div_j[p] + dfd0_j[p] + plain[p] * (w.fp[p] / 6.0)).collect();
    Ok(WSystem {
        d_alpha1: exterior_d(grid, &alpha1),
        d_alpha2: exterior_d(grid, &alpha2),
        alpha1,
        alpha2,
        codazzi: linearized_codazzi(fs, tf),
    })
}

/// The primitive `(f−1) div_g J̇ + df∘J̇ + dḟ∘J − (f'/6) β` of `dμ̃(J̇, Ȧ)`.
pub fn dmu_primitive(profile: &ConformalProfile, fs: &FieldState, tf: &TangentField) -> Result<Vec<V2>> {
    let grid = fs.grid();
    let w = NodeWeights::new(profile, fs)?;
    let (fd, _) = f_dots(fs, &w, tf);
    let div_jd = div_endo(fs, &tf.jdot);
    let df_jd = compose_form(&gradient(grid, &w.f), &tf.jdot);
    let dfd_j = compose_form(&gradient(grid, &fd), fs.j());
    let (beta, _) = pick_forms(fs, &tf.adot_0());
    Ok((0..fs.len()).map(|p| div_jd[p] * (w.f[p] - 1.0) + df_jd[p] + dfd_j[p] - beta[p] * (w.fp[p] / 6.0)).collect())
}

/// Moves `(J, A)` to `(J_ε, A_ε)`: `J` along the normalized path and the cubic
/// form `C + ε g Ȧ`, made trace-free for `g_{J_ε}`.
pub fn advance(fs: &FieldState, tf: &TangentField, eps: f64) -> Result<FieldState> {
    let j = deform_complex_structure(fs.j(), &tf.jdot, eps);
    let a: Vec<Pick> = (0..fs.len())
        .map(|p| {
            let g = fs.g()[p];
            let c = lower_pick(&fs.a()[p], &g);
            let cd = lower_pick(&tf.adot[p], &g);
            let mut ce = c;
            for i in 0..2 {
                for k in 0..2 {
                    for m in 0..2 {
                        ce[i][k][m] += eps * cd[i][k][m];
                    }
                }
            }
            let ge = crate::pointmodel::metric_of(&j[p]);
            let gie = crate::pointmodel::unimodular_inverse(&ge);
            raise_cubic(&cubic_trace_free(&ce, &ge, &gie), &gie)
        })
        .collect();
    FieldState::new(fs.grid().clone(), j, a)
}

/// Largest gap between the central difference of `μ̃` along the tangent and
/// the exterior derivative of its primitive.
pub fn dmu_fd_consistency(profile: &ConformalProfile, fs: &FieldState, tf: &TangentField, eps: f64) -> Result<f64> {
    let plus = moment_field_mu_tilde(profile, &advance(fs, tf, eps)?)?.total;
    let minus = moment_field_mu_tilde(profile, &advance(fs, tf, -eps)?)?.total;
    let d_prim = exterior_d(fs.grid(), &dmu_primitive(profile, fs, tf)?);
    Ok(fs.grid().interior_max((0..fs.len()).map(|p| (plus[p] - minus[p]) / (2.0 * eps) - d_prim[p])))
}

fn require_symplectic(grid: &Grid, v: &[V2]) -> Result<()> {
    let defect = grid.interior_max(symplectic_defect(grid, v).into_iter());
    if defect > 1e-8 {
        return Err(LabError::Precondition(format!("vector field is not symplectic: |d(ι_V ρ)| = {defect:.3e}")));
    }
    Ok(())
}

/// `(∫ ω̂_f((L_V J, g^{-1}L_V C), (J̇, Ȧ)) ρ, −∫ P ∧ ι_V ρ)` with `P` the primitive.
pub fn integration_by_parts_check(
    profile: &ConformalProfile,
    fs: &FieldState,
    tf: &TangentField,
    v: &[V2],
) -> Result<(f64, f64)> {
    let grid = fs.grid();
    if grid.as_torus().is_none() {
        return domain("integration by parts needs a closed surface");
    }
    require_symplectic(grid, v)?;
    let lv = lie_derivative(fs, v);
    let prim = dmu_primitive(profile, fs, tf)?;
    let omega: Vec<f64> = (0..fs.len())
        .map(|p| {
            let pt = fs.point(p);
            Ok(PointWeights::at(profile, &pt)?.omega(&pt, &lv.at(p), &tf.at(p)))
        })
        .collect::<Result<_>>()?;
    let pairing: Vec<f64> = prim.iter().zip(v).map(|(a, x)| -a.dot(x)).collect();
    Ok((grid.integrate(&omega), grid.integrate(&pairing)))
}

/// `H(J, A) = (2/3) ∫ f(‖A‖₀²) ρ`.
pub fn field_hamiltonian(profile: &ConformalProfile, fs: &FieldState) -> Result<f64> {
    let w = NodeWeights::new(profile, fs)?;
    Ok(fs.grid().integrate(&w.f) * 2.0 / 3.0)
}

/// The circle action applied at every node.
pub fn circle_act_field(theta: f64, fs: &FieldState) -> Result<FieldState> {
    let a = (0..fs.len()).map(|p| circle_act(theta, &fs.point(p)).a).collect();
    fs.with_pick(a)
}

/// Generator `(0, −A J)` of the circle action as a tangent field.
pub fn circle_generator_field(fs: &FieldState) -> TangentField {
    let v: Vec<_> = (0..fs.len()).map(|p| crate::pointmodel::circle_generator(&fs.point(p))).collect();
    TangentField::from_vectors(&v)
}

/// `∫ ω̂_f(t₁, t₂) ρ`.
pub fn field_omega(profile: &ConformalProfile, fs: &FieldState, t1: &TangentField, t2: &TangentField) -> Result<f64> {
    let vals: Vec<f64> = (0..fs.len())
        .map(|p| {
            let pt = fs.point(p);
            Ok(PointWeights::at(profile, &pt)?.omega(&pt, &t1.at(p), &t2.at(p)))
        })
        .collect::<Result<_>>()?;
    Ok(fs.grid().integrate(&vals))
}

/// `∫ ĝ_f(t₁, t₂) ρ`.
pub fn field_metric(profile: &ConformalProfile, fs: &FieldState, t1: &TangentField, t2: &TangentField) -> Result<f64> {
    let vals: Vec<f64> = (0..fs.len())
        .map(|p| {
            let pt = fs.point(p);
            Ok(PointWeights::at(profile, &pt)?.metric(&pt, &t1.at(p), &t2.at(p)))
        })
        .collect::<Result<_>>()?;
    Ok(fs.grid().integrate(&vals))
}

/// Weil-Petersson pairings `(−⅛ ∫ tr(J̇ J J̇'), ⅛ ∫ tr(J̇ J̇'))`.
pub fn wp_pairings(grid: &Grid, j: &[M2], jd1: &[M2], jd2: &[M2]) -> (f64, f64) {
    let om: Vec<f64> = (0..j.len()).map(|p| -(jd1[p] * j[p] * jd2[p]).trace() / 8.0).collect();
    let gm: Vec<f64> = (0..j.len()).map(|p| (jd1[p] * jd2[p]).trace() / 8.0).collect();
    (grid.integrate(&om), grid.integrate(&gm))
}

/// `|∫ ĝ_f(J̇₁, J̇₂) ρ − 4 G_WP(J̇₁, J̇₂)|` at a field with `A = 0`.
pub fn fuchsian_restriction_check(profile: &ConformalProfile, fs: &FieldState, jd1: &[M2], jd2: &[M2]) -> Result<f64> {
    if fs.a().iter().any(|a| crate::linalg::pick_max_abs(a) > 0.0) {
        return domain("restriction check needs A = 0");
    }
    let zero = vec![[M2::zeros(); 2]; fs.len()];
    let t1 = TangentField { jdot: jd1.to_vec(), adot: zero.clone() };
    let t2 = TangentField { jdot: jd2.to_vec(), adot: zero };
    let g = field_metric(profile, fs, &t1, &t2)?;
    let (_, g_wp) = wp_pairings(fs.grid(), fs.j(), jd1, jd2);
    Ok((g - 4.0 * g_wp).abs())
}

/// Per-node point states.
pub fn points(fs: &FieldState) -> Vec<PointState> {
    (0..fs.len()).map(|p| fs.point(p)).collect()
}
