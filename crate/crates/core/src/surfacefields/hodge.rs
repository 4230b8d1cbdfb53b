//! Hodge decomposition of one-forms on the flat torus and the splitting of a
//! vector field as `X = V + W + J₀W'`.

use num_complex::Complex64;

use super::fields::{linearized_codazzi_residual, FieldState, TangentField};
use super::grid::{Grid, TorusGrid};
use super::moment::w_system;
use crate::error::{domain, Result};
use crate::linalg::V2;
use crate::scalarfuncs::ConformalProfile;

/// `α = dH + ⋆dK + h` with `h` constant, plus the potentials `H` and `K`
/// (both of zero mean). Here `⋆dK = (−∂_y K, ∂_x K)`.
#[derive(Debug, Clone)]
pub struct HodgeParts {
    pub exact: Vec<V2>,
    pub coexact: Vec<V2>,
    pub harmonic: V2,
    pub potential: Vec<f64>,
    pub copotential: Vec<f64>,
}

fn torus(grid: &Grid) -> Result<&TorusGrid> {
    grid.as_torus().map_or_else(|| domain("Hodge decomposition needs the periodic grid"), Ok)
}

fn split(alpha: &[V2]) -> (Vec<f64>, Vec<f64>) {
    (alpha.iter().map(|a| a[0]).collect(), alpha.iter().map(|a| a[1]).collect())
}

fn join(x: Vec<f64>, y: Vec<f64>) -> Vec<V2> {
    x.into_iter().zip(y).map(|(a, b)| V2::new(a, b)).collect()
}

pub fn hodge_decompose_oneform(grid: &Grid, alpha: &[V2]) -> Result<HodgeParts> {
    let t = torus(grid)?;
    let n = t.n();
    let (ax, ay) = split(alpha);
    let (hx, hy) = (t.forward(&ax), t.forward(&ay));
    let zero = Complex64::new(0.0, 0.0);
    let mut ex = vec![zero; n * n];
    let mut ey = vec![zero; n * n];
    let mut h_hat = vec![zero; n * n];
    let mut k_hat = vec![zero; n * n];
    let i = Complex64::i();
    for iy in 0..n {
        for ix in 0..n {
            let idx = iy * n + ix;
            let (kx, ky) = (t.wavenumber(ix), t.wavenumber(iy));
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let kdot = hx[idx] * kx + hy[idx] * ky;
            ex[idx] = kdot * (kx / k2);
            ey[idx] = kdot * (ky / k2);
            h_hat[idx] = -i * kdot / k2;
            let curl = i * (hy[idx] * kx - hx[idx] * ky);
            k_hat[idx] = -curl / k2;
        }
    }
    let harmonic = V2::new(hx[0].re, hy[0].re) / (n * n) as f64;
    let exact = join(t.inverse_real(ex), t.inverse_real(ey));
    let coexact = alpha.iter().zip(&exact).map(|(a, e)| a - e - harmonic).collect();
    Ok(HodgeParts { exact, coexact, harmonic, potential: t.inverse_real(h_hat), copotential: t.inverse_real(k_hat) })
}

/// `X = V + W + J₀W'` with `V` parallel (`ι_V ρ` harmonic), `W` Hamiltonian
/// for `H`, and `W'` Hamiltonian for `K`.
#[derive(Debug, Clone)]
pub struct VectorFieldParts {
    pub parallel: Vec<V2>,
    pub hamiltonian: Vec<V2>,
    pub rotated: Vec<V2>,
    pub h: Vec<f64>,
    pub k: Vec<f64>,
}

impl VectorFieldParts {
    pub fn reconstruct(&self) -> Vec<V2> {
        (0..self.h.len()).map(|p| self.parallel[p] + self.hamiltonian[p] + self.rotated[p]).collect()
    }
}

pub fn vector_field_decomposition(grid: &Grid, x: &[V2]) -> Result<VectorFieldParts> {
    let contraction: Vec<V2> = x.iter().map(|v| V2::new(-v[1], v[0])).collect();
    let parts = hodge_decompose_oneform(grid, &contraction)?;
    let hv = V2::new(parts.harmonic[1], -parts.harmonic[0]);
    let dh = super::fields::gradient(grid, &parts.potential);
    let dk = super::fields::gradient(grid, &parts.copotential);
    Ok(VectorFieldParts {
        parallel: vec![hv; x.len()],
        hamiltonian: dh.iter().map(|d| V2::new(d[1], -d[0])).collect(),
        rotated: dk,
        h: parts.potential,
        k: parts.copotential,
    })
}

/// Outcome of the test for membership in the distribution cut out by the W-system.
#[derive(Debug, Clone, Copy)]
pub struct VMembership {
    pub harmonic1: f64,
    pub harmonic2: f64,
    pub codazzi: f64,
    pub member: bool,
}

/// `α₁ + iα₂` exact (no harmonic part) and the linearized Codazzi residual within `tol`.
pub fn v_membership_test(profile: &ConformalProfile, fs: &FieldState, tf: &TangentField, tol: f64) -> Result<VMembership> {
    let w = w_system(profile, fs, tf)?;
    let h1 = hodge_decompose_oneform(fs.grid(), &w.alpha1)?.harmonic.amax();
    let h2 = hodge_decompose_oneform(fs.grid(), &w.alpha2)?.harmonic.amax();
    let codazzi = linearized_codazzi_residual(fs, tf);
    Ok(VMembership { harmonic1: h1, harmonic2: h2, codazzi, member: h1 <= tol && h2 <= tol && codazzi <= tol })
}
