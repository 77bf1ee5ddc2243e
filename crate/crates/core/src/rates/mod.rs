//! Empirical convergence rates: pathwise and L_p errors of the schemes
//! against a self-convergence reference, and the L₂ scaling of step-simplex
//! sums, each fitted on a log–log ladder and compared with the theoretical
//! exponent.

mod experiments;
mod fit;
mod plan;
mod report;

pub use experiments::{
    as_rate_experiment, lp_rate_experiment, nu_scaling_experiment, nu_theory, omega_scaling_experiment,
    omega_theory, run_experiment, run_plan, sigma_exponent,
};
pub use fit::{fit_power_law, mean, mean_and_se, pairwise_sum, quantile, PowerFit, MIN_POINTS};
pub use plan::{builtin_plan, Experiment, ExperimentPlan, RefineRule, BUILTIN_PLANS, MIN_LP_PATHS};
pub use report::{emit_report, write_plotdata, RateReport, RateRow, ReferenceCheck, Verdict};
