//! Multi-index combinatorics: words, shuffle-type permutation families,
//! hierarchical index sets and the rate exponents attached to them.

mod exponents;
mod perm;
mod rate;
mod set;
mod word;

pub use exponents::{ExponentMode, ExponentVector};
pub use perm::{
    check_duality, check_increasing_to, increasing_sequences, satisfies_rule1, satisfies_rule2,
    satisfies_rule3, satisfies_rules45, shuffles, shuffles_by_len, theta_set,
    theta_with_constraints, xi_set, xi_with_constraints, Permutation,
};
pub use rate::{
    gamma_rho, gamma_theta, next_rate_and_correction_set, next_rate_with_horizon, noise_count,
    rho_of, rho_of_with_witness, rho_value, theta_of, theta_of_with_witness, theta_value,
    vartheta, MAX_SEARCH_LEN, NEXT_RATE_HORIZON, RATE_TOL,
};
pub use set::IndexSet;
pub use word::{contains, enumerate_gamma, enumerate_gamma_with_budget, MultiIndex, ENUMERATION_BUDGET};
