use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{ConfusionPoint, Orientation, ThresholdClassifier};
use crate::model::{PopulationModel, SyntheticLogistic};
use crate::rng::seeded_rng;

/// Scores `η̂(x_i)` with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl SampleSet {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.is_empty() {
            return Err(Error::InvalidParameter("sample set is empty".into()));
        }
        if let Some(&y) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidParameter(format!("label {y} is not binary")));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter(format!("score {s} is not finite")));
        }
        Ok(Self { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn zeta_hat(&self) -> f64 {
        self.labels.iter().map(|&y| f64::from(y)).sum::<f64>() / self.len() as f64
    }
}

/// Sample confusion point of a thresholded score classifier.
pub fn estimate_confusion(samples: &SampleSet, clf: &ThresholdClassifier) -> ConfusionPoint {
    let mut tp = 0usize;
    let mut tn = 0usize;
    for (&s, &y) in samples.scores.iter().zip(&samples.labels) {
        match (clf.predicts_positive(s), y) {
            (true, 1) => tp += 1,
            (false, 0) => tn += 1,
            _ => {}
        }
    }
    let n = samples.len() as f64;
    ConfusionPoint::new(tp as f64 / n, tn as f64 / n)
}

/// `n` draws from the synthetic model scored with the exact `η`.
pub fn sample_synthetic(model: &SyntheticLogistic, n: usize, seed: u64) -> Result<SampleSet> {
    let mut rng = seeded_rng(seed);
    let mut scores = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random_range(-1.0..=1.0);
        let eta = model.eta(x);
        scores.push(eta);
        labels.push(u8::from(rng.random_bool(eta)));
    }
    SampleSet::new(scores, labels)
}

/// Population model whose confusion points are sample estimates.
///
/// Scores are kept sorted with prefix counts of positives, so each
/// confusion point costs one binary search.
#[derive(Debug, Clone)]
pub struct EmpiricalModel {
    sorted: Vec<f64>,
    /// `positives_before[i]` = positive labels among the `i` lowest scores.
    positives_before: Vec<usize>,
    zeta: f64,
}

impl EmpiricalModel {
    pub fn new(samples: &SampleSet) -> Self {
        let mut pairs: Vec<(f64, u8)> = samples
            .scores
            .iter()
            .copied()
            .zip(samples.labels.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut positives_before = Vec::with_capacity(pairs.len() + 1);
        positives_before.push(0);
        let mut count = 0;
        for &(_, y) in &pairs {
            count += usize::from(y);
            positives_before.push(count);
        }
        Self {
            sorted: pairs.into_iter().map(|(s, _)| s).collect(),
            positives_before,
            zeta: samples.zeta_hat(),
        }
    }
}

impl PopulationModel for EmpiricalModel {
    fn zeta(&self) -> f64 {
        self.zeta
    }

    fn confusion(&self, clf: &ThresholdClassifier) -> Result<ConfusionPoint> {
        let n = self.sorted.len();
        let split = self.sorted.partition_point(|&s| s < clf.delta);
        let total_pos = self.positives_before[n];
        let pos_below = self.positives_before[split];
        let neg_below = split - pos_below;
        let neg_total = n - total_pos;
        // Below the split scores are < δ.
        let (tp, tn) = match clf.orientation {
            Orientation::Upper => (total_pos - pos_below, neg_below),
            Orientation::Lower => (pos_below, neg_total - neg_below),
        };
        let n = n as f64;
        Ok(ConfusionPoint::new(tp as f64 / n, tn as f64 / n))
    }
}

/// Writes `index,score,label` rows.
pub fn write_scores<W: Write>(samples: &SampleSet, mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,score,label")?;
    for (i, (s, y)) in samples.scores.iter().zip(&samples.labels).enumerate() {
        writeln!(out, "{i},{s},{y}")?;
    }
    Ok(())
}
