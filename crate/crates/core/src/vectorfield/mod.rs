//! Vector fields, their jets, and iterated fields `𝒱_γ I`.

mod expansion;
mod iterated;
mod jet;
mod models;
mod oracle;
mod polynomial;

pub use expansion::{lemma_expansion_check, leibniz_check};
pub use iterated::{h_function, h_function_with, iterated_field, FieldJets, FieldValue, IteratedFields};
pub use jet::{Jet, JetBasis};
pub use models::{
    builtin_model, linear_scalar, sde_2d_quadratic, sin_scalar, sine_field, Model, ModelSpec,
    BUILTIN_MODELS,
};
pub use oracle::{eval_derivative, ClosedFormField, FiniteDifferenceField, JetOracle, SineField};
pub use polynomial::{Polynomial, PolynomialField, PolynomialTerm};
