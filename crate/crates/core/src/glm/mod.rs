//! Binary logistic regression and the distribution tails its tests need.

pub mod logistic;
pub mod special;

pub use logistic::{
    fit_logistic, log_likelihood, null_log_likelihood, score, DesignMatrix, FitOptions, FitResult,
};
pub use special::{chi_square_sf, ln_gamma, normal_sf, regularized_gamma};
