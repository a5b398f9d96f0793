//! Simulation, estimation and extremal-index diagnostics for periodically
//! controlled sequences with imputed missing values.
//!
//! An underlying stationary sequence `X_0, X_1, ...` is observed with
//! certainty at multiples of a period `T`; any other observation is available
//! with probability `p`. A missing value is replaced by the largest available
//! value since the last control index. The crate simulates such sequences,
//! estimates `p`, evaluates the closed-form extremal indices of the classic
//! examples and checks them against Monte Carlo estimates.

pub mod error;
pub mod rng;
pub mod processes;
pub mod imputation;
pub mod stats;
pub mod theory;
pub mod estimation;
pub mod diagnostics;
pub mod montecarlo;
pub mod cli;

mod window;

pub use error::{Error, Result};
pub use estimation::{
    ecdf_from_controls, estimate_p, estimate_p_with, plugin_theta, runs_extremal_index,
    stagnation_frequency, stagnation_frequency_with, Ecdf, PHatResult, StagnationFrequency,
    StagnationRule, ThetaEstimate, ThetaMethod,
};
pub use imputation::{
    generate_mask, impute, stagnation_indicator, ControlMask, ImputedSeries, ModelConfig,
};
pub use processes::{
    generate_armax, generate_iid, generate_moving_maxima, normalized_level, theoretical_theta_x,
    DistributionFamily, DistributionSpec, ProcessConfig, ProcessKind, ProcessPath,
};
pub use stats::SummaryStats;
