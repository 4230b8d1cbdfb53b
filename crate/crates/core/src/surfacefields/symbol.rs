//! Principal symbol of the linearized W-system at the point `(i, w)`.
//!
//! Unknowns are ordered `(ẋ, ẏ, u̇, v̇)` and the covector `ξ` is given in frame
//! components. Blocks: `Θ` top-left, `Ξ` top-right, `Γ` bottom-left, `Δ`
//! bottom-right.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::Result;
use crate::scalarfuncs::ConformalProfile;

pub fn symbol_matrix(profile: &ConformalProfile, w: Complex64, xi: [f64; 2]) -> Result<Matrix4<f64>> {
    let (f, fp) = profile.f_and_prime(w.norm_sqr() / 2.0)?;
    let (u, v) = (w.re, w.im);
    let (x1, x2) = (xi[0], xi[1]);
    let n2 = x1 * x1 + x2 * x2;
    let m = f - 1.0;
    let s = 1.5 * w.norm_sqr() * fp * n2;
    Ok(Matrix4::new(
        -2.0 * m * x1 * x2,
        m * (x1 * x1 - x2 * x2) + s,
        -fp * u * n2,
        -fp * v * n2,
        m * (x2 * x2 - x1 * x1) - s,
        -2.0 * m * x1 * x2,
        -fp * v * n2,
        fp * u * n2,
        -3.0 * u * x1,
        -3.0 * v * x1,
        -x2,
        x1,
        -3.0 * v * x1,
        3.0 * u * x1,
        -x1,
        -x2,
    ))
}

pub fn symbol_det(profile: &ConformalProfile, w: Complex64, xi: [f64; 2]) -> Result<f64> {
    Ok(symbol_matrix(profile, w, xi)?.determinant())
}

/// `|ξ|² det(Θ − Ξ Δ^{-1} Γ)`; `None` at `ξ = 0` where `Δ` is singular.
pub fn symbol_schur_det(profile: &ConformalProfile, w: Complex64, xi: [f64; 2]) -> Result<Option<f64>> {
    let s = symbol_matrix(profile, w, xi)?;
    let theta: Matrix2<f64> = s.fixed_view::<2, 2>(0, 0).into();
    let big_xi: Matrix2<f64> = s.fixed_view::<2, 2>(0, 2).into();
    let gamma: Matrix2<f64> = s.fixed_view::<2, 2>(2, 0).into();
    let delta: Matrix2<f64> = s.fixed_view::<2, 2>(2, 2).into();
    Ok(delta.try_inverse().map(|di| (xi[0] * xi[0] + xi[1] * xi[1]) * (theta - big_xi * di * gamma).determinant()))
}

/// The closed form `|ξ|⁶ (1 − f + (3/2) f' |w|²)²`.
pub fn symbol_det_closed_form(profile: &ConformalProfile, w: Complex64, xi: [f64; 2]) -> Result<f64> {
    let (f, fp) = profile.f_and_prime(w.norm_sqr() / 2.0)?;
    let n2 = xi[0] * xi[0] + xi[1] * xi[1];
    let b = 1.0 - f + 1.5 * fp * w.norm_sqr();
    Ok(n2 * n2 * n2 * b * b)
}
