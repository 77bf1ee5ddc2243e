//! Taylor-type solvers for differential equations driven by fractional
//! Brownian motion with Hurst parameter above one half.

pub mod error;
pub mod integrals;
pub mod multiindex;
pub mod rates;
pub mod schemes;
pub mod signal;
pub mod vectorfield;

pub use error::{Error, Result};
pub use multiindex::{ExponentMode, ExponentVector, IndexSet, MultiIndex, Permutation};
pub use rates::{ExperimentPlan, RateReport};
pub use schemes::{SchemeConfig, SchemeKind, SolveResult};
pub use signal::{DrivingSignal, SignalSpec};
pub use vectorfield::{FieldValue, JetOracle, Model, ModelSpec, Polynomial, PolynomialField};
