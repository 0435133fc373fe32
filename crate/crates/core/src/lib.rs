//! Eliciting a hidden binary-classification metric from pairwise
//! classifier comparisons.
//!
//! The feasible confusion points `(TP, TN)` of threshold classifiers form a
//! strictly convex set. Linear metrics are recovered by binary search over
//! the angle of the supporting line; linear-fractional metrics by searching
//! for both the maximizer and the minimizer and solving for coefficients
//! that explain both.

pub mod elicit;
pub mod empirical;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod session;

pub use error::{Error, Result};
pub use geometry::{ConfusionPoint, Orientation, Slope, ThresholdClassifier};
pub use metrics::{LinearFractionalMetric, LinearMetric, Metric};
pub use model::{PopulationModel, QuadratureModel, SyntheticLogistic};
