//! Fisher information, Hellinger-distance curvature, Bayesian sensitivity and squeezing.

mod bayes;
mod bias;
mod fisher;
mod fit;
mod hellinger;
mod jackknife;
mod moments;
mod squeezing;

pub use bayes::{bayesian_estimate, BayesResult};
pub use bias::{bias_terms, c2_from_family, hellinger_variance_prediction};
pub use fisher::{
    cramer_rao_bound, fisher_direct, fisher_from_derivative, fisher_from_grid, FnFamily, RotatedFamily, ThetaFamily,
};
pub use fit::{
    fit_fisher, hellinger_fisher, FisherEstimate, FitMethod, FitOptions, FitPoint, FitSummary, HellingerAnalysis,
};
pub use hellinger::{bhattacharyya, hellinger_squared, hellinger_squared_values};
pub use jackknife::{block_jackknife, jackknife_hellinger, JackknifeConfig, JackknifeResult};
pub use moments::{moment_sensitivity, moment_sensitivity_of_family, MomentSensitivity};
pub use squeezing::{spin_squeezing, squeezing_from_moments, visibility_from_distribution, SqueezingResult};
