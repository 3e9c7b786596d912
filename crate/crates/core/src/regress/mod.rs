//! Linear models over the article features: design matrices with pairwise
//! interactions, pivoted-QR least squares, AIC and stepwise selection.

mod curve;
mod design;
mod model;
mod qr;
mod stepwise;

pub use curve::{examples_at, fit_examples, r_squared_curve, CurveOptions, ModelSpec, Selection, TrainingExample};
pub use design::{build_design_matrix, full_terms, terms_for, DesignMatrix, Term};
pub use model::{aic, aic_value, fit_ols, fit_ols_subset, r_squared, LinearModel, TargetKind, MODEL_FORMAT_VERSION};
pub use qr::{solve_least_squares, Compressed, Solution, RANK_TOLERANCE};
pub use stepwise::stepwise_select;

pub use crate::features::{transform_features, FeatureVector};
