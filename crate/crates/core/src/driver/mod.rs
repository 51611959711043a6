//! Outer Josephy–Newton iteration and its a-posteriori certification against
//! the majorant envelope.

mod certify;
mod newton;
mod order;

pub use certify::{certify, Assumption, Certificate, QuadraticCheck, BOUND_SLACK};
pub use newton::{josephy_newton, IterationHistory, Outcome, SolverOptions, StepStats};
pub use order::{estimate_order, OrderEstimate};
