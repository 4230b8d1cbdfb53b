//! Discretized tensor calculus for fields of pairs `(J, A)` on the flat torus
//! and on planar patches: covariant derivatives, curvature, Lie derivatives,
//! the moment map `μ̃` and its primitive, the W-system, Hodge decomposition
//! and the principal symbol.

pub mod fields;
pub mod grid;
pub mod hodge;
pub mod moment;
pub mod scenarios;
pub mod symbol;

pub use fields::{
    christoffel_from_metric, codazzi_residual, complex_structure_lie_check, cov_endo, cov_pick,
    curvature_variation_check, d_nabla_pick, div_endo, exterior_d, gauss_curvature, gauss_curvature_from_metric,
    gradient, hamiltonian_vector_field, laplacian, lie_derivative, linearized_codazzi, linearized_codazzi_residual,
    pullback_point, symplectic_defect, trace_lie_sides, FieldState, TangentField,
};
pub use grid::{Grid, PatchGrid, TorusGrid};
pub use hodge::{hodge_decompose_oneform, v_membership_test, vector_field_decomposition, HodgeParts};
pub use moment::{
    circle_act_field, dmu_fd_consistency, dmu_primitive, field_hamiltonian, fuchsian_restriction_check,
    integration_by_parts_check, moment_field_mu_tilde, w_system, wang_bridge, wang_bridge_residual, wp_pairings,
};
pub use symbol::{symbol_det, symbol_det_closed_form, symbol_matrix, symbol_schur_det};
