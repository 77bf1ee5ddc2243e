//! Complete, incomplete and modified Taylor schemes, and the classical
//! Euler, Milstein and modified Euler schemes as special cases.
//!
//! One step of the incomplete scheme over Γ̃ reads
//! `y_{k+1} = y_k + Σ_{γ∈Γ̃} 𝒱_γ I(y_k) x^γ_{t_k,t_{k+1}}`; the modified
//! scheme adds `Σ_γ 𝒱_γ I(y_k) D_γ(t_{k+1} − t_k)` over a correction set.

mod config;
mod solve;

pub use config::{
    default_delta_reg, diagonal_pairs, milstein_set, RateExpr, ResolvedScheme, SchemeConfig, SchemeKind, SetSpec,
};
pub use solve::{
    reference_solution, reference_solution_with_order, solve, solve_incomplete, solve_model, solve_modified,
    solve_named, Provenance, SolveResult, SolveStatus, Trajectory, REFERENCE_ORDER,
};
