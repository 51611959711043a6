//! Josephy–Newton iteration for generalized equations `0 ∈ f(x) + N_B(x)`
//! over boxes, with Kantorovich-type majorant certificates.
//!
//! * [`majorant`]: scalar majorant functions, their Newton sequences and
//!   hypothesis checks.
//! * [`geqn`]: problem data, smooth map families, residuals and sampling
//!   verifiers.
//! * [`avi`]: dense linear algebra, Lemke's method and the affine
//!   subproblem solver.
//! * [`driver`]: the outer iteration, certification and order estimates.
//!
//! With the default `parallel` feature, sampling and enumeration sweeps run
//! on rayon. Results do not depend on the [`Execution`] strategy.

// NaN has to fail checks such as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avi;
pub mod driver;
pub mod error;
pub mod exec;
pub mod geqn;
pub mod majorant;

pub use avi::{
    lcp_enumerate, lemke, solve_affine_ge, AviSolution, AviStatus, DenseMatrix, LcpInstance,
};
pub use driver::{
    certify, estimate_order, josephy_newton, Certificate, IterationHistory, Outcome, SolverOptions,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geqn::{Bounds, Problem, SmoothMap};
pub use majorant::{MajorantFunction, MajorantKind};

#[cfg(test)]
mod tests {
    #[test]
    fn smale_limit_constant() {
        let computed = 3.0 - 2.0 * 2f64.sqrt();
        assert!((crate::majorant::SMALE_LIMIT - computed).abs() <= 16.0 * f64::EPSILON * computed);
    }
}
