//! Affine subproblem engine: dense LU, Lemke pivoting for LCPs, a brute-force
//! enumeration oracle, and the reduction of the box-constrained affine
//! generalized equation `0 ∈ c + Jy + N_B(y)` onto those kernels.

mod affine;
pub mod dense;
pub mod lcp;

use serde::{Deserialize, Serialize};

pub use affine::{affine_residual, default_max_pivots, solve_affine_ge};
pub use dense::{dist_inf, lu_solve, norm_inf, DenseMatrix, LuFactorization};
pub use lcp::{lcp_enumerate, lcp_enumerate_with, lemke, LcpInstance, LCP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AviStatus {
    Solved,
    RayTermination,
    Singular,
    MaxPivots,
}

/// Outcome of one subproblem solve. For a plain LCP `y` is `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AviSolution {
    pub y: Vec<f64>,
    pub status: AviStatus,
    pub pivots: usize,
    /// `max_i |min(z_i, w_i)|` for an LCP; the natural-map residual of the
    /// affine problem for [`solve_affine_ge`].
    pub complementarity_residual: f64,
}
