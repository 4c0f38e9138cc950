//! Dense numerical engines used by the filters and experiments.

mod logistic;
mod lstsq;

pub use logistic::{
    accuracy, fit_logistic, softmax_objective, LogisticConfig, LogisticModel, Regularization,
};
pub use lstsq::{least_squares, LeastSquaresSolution, DEFAULT_RANK_TOL};
