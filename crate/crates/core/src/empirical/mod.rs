//! Finite-sample elicitation: data ingestion, a score model, and confusion
//! points estimated from held-out samples.

mod dataset;
mod logistic;
mod samples;

pub use dataset::{generate_synthetic, load_csv, read_csv, write_csv, Dataset};
pub use logistic::{train_logistic, LogisticModel, TrainConfig};
pub use samples::{estimate_confusion, sample_synthetic, write_scores, EmpiricalModel, SampleSet};
