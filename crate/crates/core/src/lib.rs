//! Numerical kernels, boundary data, solution fields and norms for
//! half-space Stokes boundary-value problems.

// `!(x > 0.0)` style comparisons are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_data;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod norms;
pub mod quadrature;
pub mod riesz;
pub mod solution;

pub use boundary_data::{Geometry, SpatialProfile, SpatialRule, TemporalKind, TemporalProfile};
pub use error::{Error, Result};
pub use fit::{linear_fit, log_log_fit, LinearFit};
pub use kernels::{
    heat_kernel, heat_kernel_1d_deriv, newtonian, newtonian_gradient, newtonian_hessian, tensor_b,
    tensor_l, SpaceTimePoint,
};
pub use norms::{
    charsum_divergence_curve, gagliardo_seminorm, lp_norm_region, plancherel_check,
    LatticeResolution, PlancherelGrid, PlancherelReport, RegionSpec, SeminormRequest,
    SpaceTimeField,
};
pub use quadrature::{Estimate, QuadratureSpec};
pub use riesz::{gauss_riesz, profile_psi, RieszSplit};
pub use solution::{
    caloric_layer, dxn_w_b1, harmonic_flow, w_b1, w_l, w_n, BoundaryData, HarmonicFlow,
    SolutionComponentSelector,
};
