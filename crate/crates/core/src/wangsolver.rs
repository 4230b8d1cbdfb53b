//! Newton solver for the semilinear equation
//! `Δu + φ e^{−2u} − 2e^u − 2k₀ = 0` on the flat unit torus, and the
//! conformal metrics built from its solution and from the profile `F`.
//!
//! With `k₀ = −1` this is `Δu + φe^{−2u} − 2e^u + 2 = 0`. The Newton systems
//! `(−Δ + 2φe^{−2u} + 2e^u) δ = E(u)` are solved by conjugate gradients with
//! the spectral preconditioner `(−Δ + mean)^{-1}`, or densely on small grids.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{domain, LabError, Result};
use crate::linalg::M2;
use crate::scalarfuncs::ConformalProfile;
use crate::surfacefields::{FieldState, TorusGrid};

/// Grids below this resolution use a dense linear solve.
pub const DENSE_BELOW: usize = 32;

/// How `φ` is obtained from the cubic differential: `φ = κ‖q‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CubicNormalization {
    /// `φ = 2‖q‖²`.
    #[default]
    Halved,
    /// `φ = 4‖q‖²`, the normalization before the factor-½ rescaling.
    Unscaled,
}

impl CubicNormalization {
    pub fn factor(self) -> f64 {
        match self {
            Self::Halved => 2.0,
            Self::Unscaled => 4.0,
        }
    }
}

/// Data of one solve.
#[derive(Debug, Clone)]
pub struct WangProblem {
    pub grid: TorusGrid,
    pub phi: Vec<f64>,
    /// Background curvature constant; `−1` gives the `+2` form.
    pub k0: f64,
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Accept sign-changing `φ` (manufactured solutions).
    pub allow_signed_phi: bool,
}

impl WangProblem {
    pub fn new(grid: TorusGrid, phi: Vec<f64>) -> Result<Self> {
        let p = Self { grid, phi, k0: -1.0, newton_tol: 1e-11, max_iters: 30, allow_signed_phi: false };
        p.validate()?;
        Ok(p)
    }

    /// `φ = κ‖q‖²` from per-node squared norms of the cubic differential.
    pub fn from_cubic(grid: TorusGrid, q_norm_sq: &[f64], norm: CubicNormalization) -> Result<Self> {
        Self::new(grid, q_norm_sq.iter().map(|q| norm.factor() * q).collect())
    }

    pub fn with_k0(mut self, k0: f64) -> Self {
        self.k0 = k0;
        self
    }

    pub fn with_tolerance(mut self, tol: f64, max_iters: usize) -> Self {
        self.newton_tol = tol;
        self.max_iters = max_iters;
        self
    }

    pub fn allowing_signed_phi(mut self) -> Self {
        self.allow_signed_phi = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        if self.phi.len() != n * n {
            return domain(format!("phi has {} values for a {n}×{n} grid", self.phi.len()));
        }
        if self.phi.iter().any(|v| !v.is_finite()) {
            return domain("phi must be finite");
        }
        if !self.allow_signed_phi && self.phi.iter().any(|&v| v < 0.0) {
            return domain("phi must be non-negative");
        }
        if !(self.newton_tol > 0.0) || self.max_iters == 0 {
            return domain("Newton tolerance and iteration cap must be positive");
        }
        Ok(())
    }

    /// `E(u) = Δu + φe^{−2u} − 2e^u − 2k₀`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let lap = self.grid.laplacian(u);
        (0..u.len())
            .into_par_iter()
            .map(|i| lap[i] + self.phi[i] * (-2.0 * u[i]).exp() - 2.0 * u[i].exp() - 2.0 * self.k0)
            .collect()
    }

    /// Diagonal part `2φe^{−2u} + 2e^u` of the negated Newton operator.
    fn shift(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.phi).map(|(u, p)| 2.0 * p * (-2.0 * u).exp() + 2.0 * u.exp()).collect()
    }
}

/// Result of a converged solve.
#[derive(Debug, Clone)]
pub struct WangSolution {
    pub u: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    /// Sup-norm residual before each iteration and after the last.
    pub history: Vec<f64>,
    /// Largest value over iterates of `−min(2φe^{−2u} + 2e^u) + 2 min e^u`.
    /// The first term bounds the top eigenvalue of the Newton operator, so a
    /// non-positive margin certifies it stays below `−2 min e^u`.
    pub jacobian_margin: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `(−Δ + diag(w)) x = b` by preconditioned conjugate gradients.
fn pcg(grid: &TorusGrid, w: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let sigma = if mean > 0.0 { mean } else { 1.0 };
    let apply = |x: &[f64]| -> Vec<f64> {
        let lap = grid.laplacian(x);
        (0..x.len()).map(|i| -lap[i] + w[i] * x[i]).collect()
    };
    let precond = |r: &[f64]| grid.solve_shifted(r, sigma);
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..500 {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(LabError::Numerical { msg: "Newton operator is not positive definite".into(), residual: pap });
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= 1e-14 * bnorm {
            return Ok(x);
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..x.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LabError::Numerical { msg: "conjugate gradients did not converge".into(), residual: dot(&r, &r).sqrt() / bnorm })
}

/// Dense solve of `(−Δ + diag(w)) x = b` with the spectral Laplacian matrix.
fn dense_solve(grid: &TorusGrid, w: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let m = b.len();
    let mut a = DMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        let col = grid.laplacian(&e);
        e[j] = 0.0;
        for i in 0..m {
            a[(i, j)] = -col[i];
        }
        a[(j, j)] += w[j];
    }
    a.lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or_else(|| LabError::Numerical { msg: "singular Newton system".into(), residual: f64::NAN })
}

/// Newton iteration from `u0` with backtracking on the sup-norm residual.
pub fn solve_wang(p: &WangProblem, u0: &[f64]) -> Result<WangSolution> {
    p.validate()?;
    if u0.len() != p.phi.len() {
        return domain("initial field has the wrong length");
    }
    let mut u = u0.to_vec();
    let mut e = p.residual(&u);
    let mut history = vec![sup(&e)];
    let mut margin = f64::NEG_INFINITY;
    for it in 0..p.max_iters {
        if history[it] <= p.newton_tol {
            return Ok(finish(p, u, history, it, margin));
        }
        let w = p.shift(&u);
        margin = margin.max(jacobian_margin(&w, &u));
        let delta = if p.grid.n() < DENSE_BELOW { dense_solve(&p.grid, &w, &e)? } else { pcg(&p.grid, &w, &e)? };
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let et = p.residual(&trial);
            let rt = sup(&et);
            if rt < history[it] || step < 1e-3 {
                u = trial;
                e = et;
                history.push(rt);
                break;
            }
            step *= 0.5;
        }
    }
    let last = *history.last().expect("history is never empty");
    if last <= p.newton_tol {
        return Ok(finish(p, u, history, p.max_iters, margin));
    }
    Err(LabError::NoConvergence { iterations: p.max_iters, history })
}

fn jacobian_margin(w: &[f64], u: &[f64]) -> f64 {
    let min_w = w.iter().copied().fold(f64::INFINITY, f64::min);
    let min_eu = u.iter().map(|v| v.exp()).fold(f64::INFINITY, f64::min);
    -min_w + 2.0 * min_eu
}

fn finish(p: &WangProblem, u: Vec<f64>, history: Vec<f64>, iterations: usize, margin: f64) -> WangSolution {
    let margin = margin.max(jacobian_margin(&p.shift(&u), &u));
    WangSolution { residual_inf: *history.last().expect("history is never empty"), u, iterations, history, jacobian_margin: margin }
}

/// `K_h + 1 − ‖q‖²_h` for `h = e^u g₀`, with `K_h = e^{−u}(k₀ − ½Δu)` and
/// `‖q‖²_h = ‖q‖²_{g₀} e^{−3u}`.
pub fn vortex_residual(grid: &TorusGrid, u: &[f64], q_norm_sq: &[f64], k0: f64) -> Vec<f64> {
    let lap = grid.laplacian(u);
    (0..u.len())
        .map(|i| (-u[i]).exp() * (k0 - 0.5 * lap[i]) + 1.0 - q_norm_sq[i] * (-3.0 * u[i]).exp())
        .collect()
}

/// Root of `k e^{−2u} − 2e^u − 2k₀ = 0` by bisection (constant `φ = k ≥ 0`).
pub fn constant_solution(k: f64, k0: f64) -> Result<f64> {
    if k < 0.0 {
        return domain("constant phi must be non-negative");
    }
    let g = |u: f64| k * (-2.0 * u).exp() - 2.0 * u.exp() - 2.0 * k0;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) < 0.0 {
        lo *= 2.0;
        if lo < -1e3 {
            return domain("no constant solution");
        }
    }
    while g(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return domain("no constant solution");
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `e^{F(‖A‖₀²)}` per node.
#[allow(non_snake_case)]
pub fn conformal_factor_F(profile: &ConformalProfile, fs: &FieldState) -> Result<Vec<f64>> {
    fs.norm0_sq().par_iter().map(|&t| Ok(profile.eval_F(t)?.exp())).collect()
}

/// `h = e^{F(‖A‖₀²)} g_J` per node.
#[allow(non_snake_case)]
pub fn conformal_metric_F(profile: &ConformalProfile, fs: &FieldState) -> Result<Vec<M2>> {
    Ok(conformal_factor_F(profile, fs)?.iter().zip(fs.g()).map(|(e, g)| g * *e).collect())
}
