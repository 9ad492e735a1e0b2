//! Independent oracles and empirical checks on runs and lemma constants.

mod lemma;
mod metrics;
mod optimum;
mod variance;

pub use lemma::{check_lemma1, sigma2_squared, LemmaOneReport};
pub use metrics::{convergence_metrics, fit_decay_rate, ConvergenceSummary, Optimum};
pub use optimum::{quadratic_fixed_point, quadratic_gradient, solve_quadratic_models, solve_quadratic_optimum};
pub use variance::estimate_variance;
