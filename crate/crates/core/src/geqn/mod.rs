//! Problem model for `0 ∈ f(x) + N_B(x)`: smooth map, box, starting point and
//! regularity modulus, plus residuals and sampling checks of the majorant
//! hypotheses.

mod bounds;
mod map;
mod problem;
mod verify;

pub use bounds::{Bounds, BoundsRepr, ExtReal};
pub use map::{
    jacobian_discrepancy, validate_jacobian, Monomial, NcpPoly, Poly1d, PolySystem, QpKkt,
    SmoothMap,
};
pub use problem::{
    linearization_error, natural_residual, regularity_modulus_smooth, LambdaSource, Problem,
};
pub use verify::{
    verify_linearization_bound, verify_linearization_bound_with, verify_majorant_condition,
    verify_majorant_condition_with, LinearizationCheckReport, MajorantCheckReport, DEFAULT_SAMPLES,
};
