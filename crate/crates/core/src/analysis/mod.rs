//! Diagnostics that turn recorded trajectories into verdicts: rate fits,
//! contraction and envelope checks, mixing gaps, entropy residuals and the
//! analytic helper functions of the uniqueness argument.

mod contraction;
mod entropy;
mod functionals;
mod lemmas;
mod series;

use serde::Serialize;

pub use contraction::{
    contraction_check, empirical_coefficient, lemma_coefficient, monotone_check, ode_comparison, theoretical_envelope,
    Verdict, Violation,
};
pub use entropy::{entropy_residual, reversed, EntropyResidual, TestFunction, Trajectory};
pub use functionals::{coming_down_statistic, lipschitz_domination, mixing_gap, Functional};
pub use lemmas::{
    alpha_ceiling, eta_delta, eta_profile, lemma_suite, lower_bound_check, lower_bound_sweep, vanishing_schedule,
    EtaDelta, GAlpha, LemmaSuiteOptions, LowerBound, SweepResult,
};
pub use series::{fit_log_slope, fit_power_exponent, fit_power_exponent_shifted, DecaySeries, RateFit};

/// One named pass/fail entry of a verdict file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, observed: f64, expected: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass, observed, expected, tolerance }
    }
}
