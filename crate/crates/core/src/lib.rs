//! Numerical laboratory for hyperbolic affine spheres, holomorphic cubic
//! differentials and the pseudo-Kähler model built on pairs `(J, A)`.
//!
//! Modules:
//! - [`scalarfuncs`]: the conformal profile `F` and the weight function `f`.
//! - [`pointmodel`]: the four-dimensional model with its metric, complex
//!   structure, symplectic form, group actions and moment maps.
//! - [`surfacefields`]: tensor calculus on a flat torus or a planar patch.
//! - [`wangsolver`]: Newton solver for the Wang/Loftin semilinear equation.
//! - [`framesphere`]: frame ODE of a hyperbolic affine sphere.

pub mod error;
pub mod framesphere;
pub mod linalg;
pub mod pointmodel;
pub mod scalarfuncs;
pub mod surfacefields;
pub mod wangsolver;

pub use error::{LabError, Result};
