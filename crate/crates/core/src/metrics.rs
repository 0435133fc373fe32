//! Linear and linear-fractional performance metrics of `(TP, TN)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConfusionPoint;

/// Denominators below this magnitude are treated as zero.
const ZERO_DENOMINATOR: f64 = 1e-12;

/// Grid resolution and slack for the numerical monotonicity check.
const VALIDATION_GRID: usize = 50;
const MONOTONE_TOL: f64 = 1e-10;

/// `m11·TP + m00·TN + m0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMetric {
    pub m11: f64,
    pub m00: f64,
    pub m0: f64,
}

impl LinearMetric {
    pub const fn new(m11: f64, m00: f64, m0: f64) -> Self {
        Self { m11, m00, m0 }
    }
}

/// `(p11·TP + p00·TN + p0) / (q11·TP + q00·TN + q0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFractionalMetric {
    pub p11: f64,
    pub p00: f64,
    pub p0: f64,
    pub q11: f64,
    pub q00: f64,
    pub q0: f64,
}

impl LinearFractionalMetric {
    pub const fn new(p11: f64, p00: f64, p0: f64, q11: f64, q00: f64, q0: f64) -> Self {
        Self {
            p11,
            p00,
            p0,
            q11,
            q00,
            q0,
        }
    }

    pub fn numerator(&self, c: &ConfusionPoint) -> f64 {
        self.p11 * c.tp + self.p00 * c.tn + self.p0
    }

    pub fn denominator(&self, c: &ConfusionPoint) -> f64 {
        self.q11 * c.tp + self.q00 * c.tn + self.q0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Metric {
    Lpm(LinearMetric),
    Lfpm(LinearFractionalMetric),
}

impl Metric {
    pub fn eval(&self, c: &ConfusionPoint) -> Result<f64> {
        match self {
            Metric::Lpm(m) => Ok(lpm_eval(m, c)),
            Metric::Lfpm(m) => lfpm_eval(m, c),
        }
    }
}

impl From<LinearMetric> for Metric {
    fn from(m: LinearMetric) -> Self {
        Metric::Lpm(m)
    }
}

impl From<LinearFractionalMetric> for Metric {
    fn from(m: LinearFractionalMetric) -> Self {
        Metric::Lfpm(m)
    }
}

pub fn lpm_eval(metric: &LinearMetric, c: &ConfusionPoint) -> f64 {
    metric.m11 * c.tp + metric.m00 * c.tn + metric.m0
}

pub fn lfpm_eval(metric: &LinearFractionalMetric, c: &ConfusionPoint) -> Result<f64> {
    let den = metric.denominator(c);
    if den.abs() < ZERO_DENOMINATOR {
        return Err(Error::ZeroDenominator {
            value: den,
            tp: c.tp,
            tn: c.tn,
        });
    }
    Ok(metric.numerator(c) / den)
}

/// One sufficient condition for a bounded, monotone LFPM that a metric fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    NegativeP11,
    NegativeP00,
    /// `p11 < q11`.
    P11BelowQ11,
    /// `p00 < q00`.
    P00BelowQ00,
    NonzeroP0,
    /// `q0 ≠ (p11 − q11)ζ + (p00 − q00)(1 − ζ)`; carries the expected value.
    Q0Mismatch { expected: f64 },
    /// `p11 + p00 ≠ 1`.
    NotCanonical { sum: f64 },
    /// The grid check found a decrease along a coordinate.
    NotMonotone { tp: f64, tn: f64 },
    /// The grid check found a value outside `[0, 1]` (or a zero denominator).
    Unbounded { tp: f64, tn: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub zeta: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the sufficient conditions for `metric` at base rate `zeta`.
///
/// Failing a condition is reported, not rejected: a metric can be monotone
/// without satisfying all of them.
pub fn lfpm_validate(metric: &LinearFractionalMetric, zeta: f64) -> ValidationReport {
    let tol = 1e-9;
    let m = metric;
    let mut violations = Vec::new();
    if m.p11 < -tol {
        violations.push(Violation::NegativeP11);
    }
    if m.p00 < -tol {
        violations.push(Violation::NegativeP00);
    }
    if m.p11 < m.q11 - tol {
        violations.push(Violation::P11BelowQ11);
    }
    if m.p00 < m.q00 - tol {
        violations.push(Violation::P00BelowQ00);
    }
    if m.p0.abs() > tol {
        violations.push(Violation::NonzeroP0);
    }
    let expected = (m.p11 - m.q11) * zeta + (m.p00 - m.q00) * (1.0 - zeta);
    if (m.q0 - expected).abs() > tol {
        violations.push(Violation::Q0Mismatch { expected });
    }
    let sum = m.p11 + m.p00;
    if (sum - 1.0).abs() > tol {
        violations.push(Violation::NotCanonical { sum });
    }
    violations.extend(grid_check(m, zeta));
    ValidationReport { zeta, violations }
}

/// First monotonicity and boundedness failures on the `[0,ζ]×[0,1−ζ]` grid.
fn grid_check(metric: &LinearFractionalMetric, zeta: f64) -> Vec<Violation> {
    let n = VALIDATION_GRID;
    let at = |i: usize, j: usize| {
        ConfusionPoint::new(
            zeta * i as f64 / (n - 1) as f64,
            (1.0 - zeta) * j as f64 / (n - 1) as f64,
        )
    };
    let mut values = vec![vec![f64::NAN; n]; n];
    let mut unbounded = None;
    for (i, row) in values.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let c = at(i, j);
            match lfpm_eval(metric, &c) {
                Ok(x) => {
                    *v = x;
                    if unbounded.is_none() && !(-MONOTONE_TOL..=1.0 + MONOTONE_TOL).contains(&x) {
                        unbounded = Some(c);
                    }
                }
                Err(_) => {
                    // The origin is 0/0 for metrics like F1; skip it rather
                    // than flag every such metric.
                    if (i, j) != (0, 0) && unbounded.is_none() {
                        unbounded = Some(c);
                    }
                }
            }
        }
    }
    let mut not_monotone = None;
    'scan: for i in 0..n {
        for j in 0..n {
            let v = values[i][j];
            if v.is_nan() {
                continue;
            }
            let up_tp = (i + 1 < n).then(|| values[i + 1][j]);
            let up_tn = (j + 1 < n).then(|| values[i][j + 1]);
            for next in [up_tp, up_tn].into_iter().flatten() {
                if !next.is_nan() && next < v - MONOTONE_TOL {
                    not_monotone = Some(at(i, j));
                    break 'scan;
                }
            }
        }
    }
    let mut out = Vec::new();
    if let Some(c) = not_monotone {
        out.push(Violation::NotMonotone { tp: c.tp, tn: c.tn });
    }
    if let Some(c) = unbounded {
        out.push(Violation::Unbounded { tp: c.tp, tn: c.tn });
    }
    out
}

/// Named metrics expressible in the two families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NamedMetric {
    WeightedAccuracy { w1: f64, w2: f64 },
    FBeta { beta: f64 },
    Jaccard,
}

pub fn make_named(family: NamedMetric, zeta: f64) -> Result<Metric> {
    match family {
        NamedMetric::WeightedAccuracy { w1, w2 } => {
            if !(0.0..=1.0).contains(&w1) || !(0.0..=1.0).contains(&w2) {
                return Err(Error::InvalidParameter(format!(
                    "weights must lie in [0, 1], got ({w1}, {w2})"
                )));
            }
            normalize_lpm(&LinearMetric::new(w1, w2, 0.0)).map(Metric::Lpm)
        }
        NamedMetric::FBeta { beta } => {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "beta must be positive, got {beta}"
                )));
            }
            let b2 = beta * beta;
            let s = 1.0 / (1.0 + b2);
            Ok(Metric::Lfpm(LinearFractionalMetric::new(
                1.0,
                0.0,
                0.0,
                s,
                -s,
                (b2 * zeta + 1.0 - zeta) * s,
            )))
        }
        NamedMetric::Jaccard => Ok(Metric::Lfpm(LinearFractionalMetric::new(
            1.0, 0.0, 0.0, 0.0, -1.0, 1.0,
        ))),
    }
}

/// Rescales to a unit-norm slope and drops the bias.
pub fn normalize_lpm(metric: &LinearMetric) -> Result<LinearMetric> {
    let norm = metric.m11.hypot(metric.m00);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroSlope);
    }
    Ok(LinearMetric::new(metric.m11 / norm, metric.m00 / norm, 0.0))
}
