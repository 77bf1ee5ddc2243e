//! Iterated integrals of the driving signal over coarse steps, their
//! expectations, and step-simplex sums.

mod exact;
mod moments;
mod signature;
mod step;

pub use exact::nested_integral;
pub use moments::{
    closed_form, d_gamma, d_gamma_default, d_gamma_estimate, parity_vanishes, quadrature, MomentEstimate, MomentMethod,
    MomentSpec, MAX_QUADRATURE_LEN,
};
pub use signature::Signature;
pub use step::{
    left_point_integral, nested_integral_check, running_signatures, shuffle_identity_check, simplex_sum,
    step_integral, step_signature, StepGrid, StepIntegralTable, REL_EPS,
};
