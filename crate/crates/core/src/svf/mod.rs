//! State-variable-filter least squares for continuous-time models.

mod estimate;
mod filter;
mod regression;

pub use estimate::{
    identify_svf, identify_svf_with, model_from_theta, solve_ls, svf_regression, theta_from_model,
    Estimate, SvfOptions,
};
pub use filter::{
    build_filter_bank, filter_derivatives, DerivativeMatrix, FilterBank, HoldAlignment, SampledBank,
    SvfFilter,
};
pub use regression::{
    assemble_regression_mimo, assemble_regression_rows, assemble_regression_siso, RegressionData,
    Structure,
};
