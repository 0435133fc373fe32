//! Population models: sources of Bayes confusion points.
//!
//! A model knows its base rate and can evaluate the population confusion
//! point of any threshold classifier. The closed-form synthetic model and the
//! quadrature model describe the same kind of law two different ways; the
//! empirical model (see [`crate::empirical`]) estimates it from samples.

mod logistic;
mod quadrature;

use std::fmt::Debug;

pub use logistic::SyntheticLogistic;
pub use quadrature::QuadratureModel;

use crate::error::Result;
use crate::geometry::{ConfusionPoint, ThresholdClassifier};

pub trait PopulationModel: Debug + Send + Sync {
    /// Base rate `ζ = P(Y = 1)`.
    fn zeta(&self) -> f64;

    /// Confusion point `(TP, TN)` of a threshold classifier.
    fn confusion(&self, clf: &ThresholdClassifier) -> Result<ConfusionPoint>;
}
