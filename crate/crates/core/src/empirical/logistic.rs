//! L2-regularized logistic regression fitted by damped Newton (IRLS) steps.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use super::dataset::Dataset;
use super::samples::SampleSet;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl TrainConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            max_iterations: 100,
            gradient_tolerance: 1e-8,
        }
    }
}

/// A fitted model on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Objective value before the first step and after each step.
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    /// Fits on `rows` directly. Features are standardized with the rows' own
    /// mean and standard deviation; the intercept is not penalized.
    pub fn fit(rows: &[Vec<f64>], labels: &[u8], config: TrainConfig) -> Result<Self> {
        if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {}",
                config.lambda
            )));
        }
        if rows.is_empty() || rows.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = rows[0].len();
        let n = rows.len();
        let (means, scales) = standardization(rows, d);

        // Design matrix with a leading intercept column.
        let x = DMatrix::from_fn(n, d + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                (rows[i][j - 1] - means[j - 1]) / scales[j - 1]
            }
        });
        let y = DVector::from_iterator(n, labels.iter().map(|&v| f64::from(v)));
        let mut penalty = DVector::from_element(d + 1, config.lambda);
        penalty[0] = 0.0;

        let mut w = DVector::zeros(d + 1);
        let mut loss = objective(&x, &y, &w, &penalty);
        let mut loss_history = vec![loss];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < config.max_iterations {
            let z = &x * &w;
            let p = z.map(sigmoid);
            let grad = x.transpose() * (&p - &y) + penalty.component_mul(&w);
            if grad.norm() <= config.gradient_tolerance {
                converged = true;
                break;
            }
            let s = p.map(|v| v * (1.0 - v));
            let mut weighted = x.clone();
            for (mut row, w) in weighted.row_iter_mut().zip(s.iter()) {
                row *= *w;
            }
            let mut hessian = x.transpose() * weighted;
            for j in 0..=d {
                hessian[(j, j)] += penalty[j];
            }
            let Some(step) = hessian.cholesky().map(|c| c.solve(&grad)) else {
                break;
            };
            // Backtrack until the objective does not increase.
            let mut t = 1.0;
            let mut next = &w - &step * t;
            let mut next_loss = objective(&x, &y, &next, &penalty);
            while next_loss > loss && t > 1e-10 {
                t *= 0.5;
                next = &w - &step * t;
                next_loss = objective(&x, &y, &next, &penalty);
            }
            iterations += 1;
            if next_loss > loss {
                break;
            }
            w = next;
            loss = next_loss;
            loss_history.push(loss);
        }
        if !converged {
            let p = (&x * &w).map(sigmoid);
            let grad = x.transpose() * (&p - &y) + penalty.component_mul(&w);
            converged = grad.norm() <= config.gradient_tolerance;
        }
        Ok(Self {
            weights: w.iter().skip(1).copied().collect(),
            intercept: w[0],
            lambda: config.lambda,
            means,
            scales,
            converged,
            iterations,
            loss_history,
        })
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let z = self.intercept
            + row
                .iter()
                .zip(&self.weights)
                .zip(self.means.iter().zip(&self.scales))
                .map(|((x, w), (m, s))| w * (x - m) / s)
                .sum::<f64>();
        sigmoid(z)
    }
}

fn standardization(rows: &[Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    for row in rows {
        for (m, x) in means.iter_mut().zip(row) {
            *m += x / n;
        }
    }
    let mut scales = vec![0.0; d];
    for row in rows {
        for ((s, x), m) in scales.iter_mut().zip(row).zip(&means) {
            *s += (x - m).powi(2) / n;
        }
    }
    for s in &mut scales {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    (means, scales)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Summed log loss plus `½ Σ penalty_j w_j²`.
fn objective(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, penalty: &DVector<f64>) -> f64 {
    let z = x * w;
    let data: f64 = z.iter().zip(y.iter()).map(|(&z, &y)| softplus(z) - y * z).sum();
    data + 0.5 * penalty.iter().zip(w.iter()).map(|(l, w)| l * w * w).sum::<f64>()
}

/// Shuffles with `seed`, fits on the first `split_fraction` of rows and
/// scores the rest.
pub fn train_logistic(
    data: &Dataset,
    lambda: f64,
    split_fraction: f64,
    seed: u64,
) -> Result<(LogisticModel, SampleSet)> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::DegenerateSplit(format!(
            "split fraction must lie in (0, 1), got {split_fraction}"
        )));
    }
    let n = data.len();
    let n_train = (split_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::DegenerateSplit(format!(
            "{n} rows split at {split_fraction} leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let (train, held_out) = order.split_at(n_train);

    let rows: Vec<Vec<f64>> = train.iter().map(|&i| data.features[i].clone()).collect();
    let labels: Vec<u8> = train.iter().map(|&i| data.labels[i]).collect();
    let model = LogisticModel::fit(&rows, &labels, TrainConfig::new(lambda))?;

    let scores = held_out
        .iter()
        .map(|&i| model.predict_proba(&data.features[i]))
        .collect();
    let labels = held_out.iter().map(|&i| data.labels[i]).collect();
    Ok((model, SampleSet::new(scores, labels)?))
}
