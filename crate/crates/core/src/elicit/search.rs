//! Resumable four-query bisection over one boundary arc.
//!
//! Each iteration probes five equally spaced angles `a < c < d < e < b`,
//! asks about the four neighbouring pairs, and keeps the half of the interval
//! that must contain the optimum. The interval halves on every iteration no
//! matter what the answers are, so the query count depends only on `epsilon`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_probe, supporting_hyperplane, Boundary, ConfusionPoint, Hyperplane, Slope,
    ThresholdClassifier,
};
use crate::model::PopulationModel;
use crate::oracle::{Probe, Query, QueryRecord, Response};

/// Iteration guard; the interval halves each time so this is never reached
/// for any sensible tolerance.
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    /// Seek the oracle-preferred point (quasiconcave metric).
    Maximize,
    /// Seek the least preferred point (quasiconvex metric).
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub goal: Goal,
    pub boundary: Boundary,
    pub theta_hat: f64,
    pub slope: Slope,
    pub optimizer: ConfusionPoint,
    pub hyperplane: Hyperplane,
    pub query_count: usize,
    pub iterations: usize,
    pub transcript: Vec<QueryRecord>,
}

/// Number of iterations needed to shrink an interval of width `width` to `epsilon`.
pub fn iterations_for(width: f64, epsilon: f64) -> usize {
    let mut w = width;
    let mut n = 0;
    while w > epsilon && n < MAX_ITERATIONS {
        w *= 0.5;
        n += 1;
    }
    n
}

/// Rewrites every "worse then better" pair of consecutive responses to
/// "better, better", repeating until none is left.
///
/// `r[i]` is true when probe `i + 1` beats probe `i`. A pattern
/// `r[i] = false, r[i+1] = true` claims a dip in the middle of a unimodal
/// sequence, which can only come from noise; the dip is assumed to be in the
/// default (ascending) order instead.
pub fn apply_default_order(mut r: [bool; 4]) -> [bool; 4] {
    loop {
        let mut changed = false;
        for i in 0..3 {
            if !r[i] && r[i + 1] {
                r[i] = true;
                changed = true;
            }
        }
        if !changed {
            return r;
        }
    }
}

/// The new `(θa, θb)` for probes `[a, c, d, e, b]` and normalized responses.
pub fn shrink(angles: [f64; 5], r: [bool; 4]) -> (f64, f64) {
    let [a, c, d, e, b] = angles;
    if !r[0] || !r[1] {
        (a, d)
    } else if !r[2] {
        (c, e)
    } else {
        (d, b)
    }
}

#[derive(Debug, Clone, Copy)]
struct ProbePoint {
    theta: f64,
    classifier: ThresholdClassifier,
    point: ConfusionPoint,
}

impl ProbePoint {
    fn probe(&self) -> Probe {
        Probe {
            point: self.point,
            theta: Some(self.theta),
            classifier: Some(self.classifier),
        }
    }
}

/// Step-driven search: call [`SearchMachine::pending`] for the next query and
/// [`SearchMachine::respond`] with its answer until [`SearchMachine::finished`].
#[derive(Debug, Clone)]
pub struct SearchMachine {
    model: Arc<dyn PopulationModel>,
    goal: Goal,
    boundary: Boundary,
    epsilon: f64,
    theta_a: f64,
    theta_b: f64,
    iterations: usize,
    probes: Option<[ProbePoint; 5]>,
    answers: Vec<bool>,
    next_index: usize,
    transcript: Vec<QueryRecord>,
    result: Option<SearchResult>,
}

impl SearchMachine {
    /// Starts a search whose first query gets ordinal `first_index`.
    pub fn new(
        model: Arc<dyn PopulationModel>,
        goal: Goal,
        boundary: Boundary,
        epsilon: f64,
        first_index: usize,
    ) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let (theta_a, theta_b) = boundary.interval();
        let mut machine = Self {
            model,
            goal,
            boundary,
            epsilon,
            theta_a,
            theta_b,
            iterations: 0,
            probes: None,
            answers: Vec::with_capacity(4),
            next_index: first_index,
            transcript: Vec::new(),
            result: None,
        };
        machine.advance()?;
        Ok(machine)
    }

    pub fn finished(&self) -> bool {
        self.result.is_some()
    }

    pub fn result(&self) -> Option<&SearchResult> {
        self.result.as_ref()
    }

    pub fn into_result(self) -> Option<SearchResult> {
        self.result
    }

    /// Ordinal the next query will carry.
    pub fn next_index(&self) -> usize {
        self.next_index
    }

    pub fn pending(&self) -> Option<Query> {
        let probes = self.probes.as_ref()?;
        let i = self.answers.len();
        let (prev, next) = (&probes[i], &probes[i + 1]);
        // Maximizing asks "is next better than prev", minimizing asks
        // "is prev better than next"; either way the answer is `r[i]`.
        let (first, second) = match self.goal {
            Goal::Maximize => (next, prev),
            Goal::Minimize => (prev, next),
        };
        Some(Query {
            index: self.next_index,
            first: first.probe(),
            second: second.probe(),
        })
    }

    pub fn respond(&mut self, response: Response) -> Result<()> {
        let query = self.pending().ok_or(Error::NoPendingQuery)?;
        self.transcript.push(QueryRecord::new(&query, response));
        self.answers.push(response.prefer_first);
        self.next_index += 1;
        if self.answers.len() == 4 {
            let r = apply_default_order([
                self.answers[0],
                self.answers[1],
                self.answers[2],
                self.answers[3],
            ]);
            let probes = self.probes.take().expect("probes exist while answering");
            let angles = probes.map(|p| p.theta);
            (self.theta_a, self.theta_b) = shrink(angles, r);
            self.answers.clear();
            self.iterations += 1;
            self.advance()?;
        }
        Ok(())
    }

    /// Sets up the next iteration, or the result once the interval is narrow enough.
    fn advance(&mut self) -> Result<()> {
        let (a, b) = (self.theta_a, self.theta_b);
        if (b - a).abs() > self.epsilon {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::IterationOverflow {
                    limit: MAX_ITERATIONS,
                });
            }
            let angles = [a, (3.0 * a + b) / 4.0, (a + b) / 2.0, (a + 3.0 * b) / 4.0, b];
            let mut probes = Vec::with_capacity(5);
            for theta in angles {
                let (classifier, point) = boundary_probe(self.model.as_ref(), theta)?;
                probes.push(ProbePoint {
                    theta,
                    classifier,
                    point,
                });
            }
            self.probes = Some(probes.try_into().expect("five probes"));
            return Ok(());
        }
        let theta_hat = 0.5 * (a + b);
        let (_, optimizer) = boundary_probe(self.model.as_ref(), theta_hat)?;
        let slope = Slope::from_angle(theta_hat);
        self.result = Some(SearchResult {
            goal: self.goal,
            boundary: self.boundary,
            theta_hat,
            slope,
            optimizer,
            hyperplane: supporting_hyperplane(&slope, &optimizer),
            query_count: self.transcript.len(),
            iterations: self.iterations,
            transcript: std::mem::take(&mut self.transcript),
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    fn all_vectors() -> impl Iterator<Item = [bool; 4]> {
        (0..16u8).map(|bits| [0, 1, 2, 3].map(|i| bits & (1 << i) != 0))
    }

    #[test]
    fn default_order_leaves_unimodal_vectors_alone() {
        for r in all_vectors() {
            let fixed = apply_default_order(r);
            // Output is some trues followed by falses.
            let first_false = fixed.iter().position(|x| !x).unwrap_or(4);
            assert!(fixed[first_false..].iter().all(|x| !x), "{r:?} -> {fixed:?}");
            let unimodal = r.windows(2).all(|w| w[0] || !w[1]);
            if unimodal {
                assert_eq!(fixed, r);
            }
        }
    }

    #[test]
    fn dip_takes_ascending_branch() {
        let angles = [0.0, 1.0, 2.0, 3.0, 4.0];
        // ≻ then ≺ at positions 2, 3 behaves like the corrected vector.
        let noisy = [true, true, false, true];
        let corrected = [true, true, true, true];
        assert_eq!(
            shrink(angles, apply_default_order(noisy)),
            shrink(angles, corrected)
        );
        // A dip further left must propagate: [F, F, T, F] -> [T, T, T, F].
        assert_eq!(apply_default_order([false, false, true, false]), [true, true, true, false]);
    }

    #[test]
    fn every_branch_halves_the_interval() {
        let angles = [0.0, 0.25, 0.5, 0.75, 1.0];
        for r in all_vectors() {
            let (a, b) = shrink(angles, apply_default_order(r));
            assert!((b - a - 0.5).abs() < 1e-15, "{r:?}");
        }
    }

    #[test]
    fn branch_table() {
        let angles = [0.0, 0.25, 0.5, 0.75, 1.0];
        assert_eq!(shrink(angles, [false, false, false, false]), (0.0, 0.5));
        assert_eq!(shrink(angles, [true, false, false, false]), (0.0, 0.5));
        assert_eq!(shrink(angles, [true, true, false, false]), (0.25, 0.75));
        assert_eq!(shrink(angles, [true, true, true, false]), (0.5, 1.0));
        assert_eq!(shrink(angles, [true, true, true, true]), (0.5, 1.0));
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(iterations_for(FRAC_PI_2, 0.02), 7);
        assert_eq!(iterations_for(FRAC_PI_2, 0.4), 2);
        assert_eq!(iterations_for(FRAC_PI_2, 0.1), 4);
        assert_eq!(iterations_for(FRAC_PI_2, 2.0), 0);
    }
}
