//! Pairwise comparison oracles.
//!
//! An oracle answers "is the first classifier preferred to the second?".
//! The simulated oracle evaluates a hidden metric and, when the two values
//! are within `epsilon_omega` of each other, may answer wrong according to a
//! band policy.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConfusionPoint, ThresholdClassifier};
use crate::metrics::Metric;
use crate::rng::seeded_rng;

/// What happens to answers inside the noise band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "p")]
pub enum BandPolicy {
    Correct,
    FlipProb(f64),
    AlwaysFlip,
}

impl Default for BandPolicy {
    fn default() -> Self {
        BandPolicy::FlipProb(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub metric: Metric,
    pub epsilon_omega: f64,
    pub band_policy: BandPolicy,
    pub seed: u64,
}

impl OracleConfig {
    /// A noiseless oracle for `metric`.
    pub fn exact(metric: impl Into<Metric>) -> Self {
        Self {
            metric: metric.into(),
            epsilon_omega: 0.0,
            band_policy: BandPolicy::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_omega >= 0.0 && self.epsilon_omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon_omega must be non-negative, got {}",
                self.epsilon_omega
            )));
        }
        if let BandPolicy::FlipProb(p) = self.band_policy {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "flip probability must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// One side of a comparison: a boundary classifier and its confusion point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub point: ConfusionPoint,
    pub theta: Option<f64>,
    pub classifier: Option<ThresholdClassifier>,
}

impl Probe {
    pub fn bare(point: ConfusionPoint) -> Self {
        Self {
            point,
            theta: None,
            classifier: None,
        }
    }
}

/// The question "is `first` preferred to `second`?".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub index: usize,
    pub first: Probe,
    pub second: Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub prefer_first: bool,
    pub in_band: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub index: usize,
    pub c_a: ConfusionPoint,
    pub c_b: ConfusionPoint,
    pub theta_a: Option<f64>,
    pub theta_b: Option<f64>,
    /// `true` when the first point was preferred.
    pub answer: bool,
    pub in_band: bool,
}

impl QueryRecord {
    pub fn new(query: &Query, response: Response) -> Self {
        Self {
            index: query.index,
            c_a: query.first.point,
            c_b: query.second.point,
            theta_a: query.first.theta,
            theta_b: query.second.theta,
            answer: response.prefer_first,
            in_band: response.in_band,
        }
    }
}

pub trait Oracle {
    fn respond(&mut self, query: &Query) -> Result<Response>;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn respond(&mut self, query: &Query) -> Result<Response> {
        (**self).respond(query)
    }
}

/// Oracle backed by a hidden metric, with seeded in-band noise.
#[derive(Debug, Clone)]
pub struct SimulatedOracle {
    config: OracleConfig,
    rng: ChaCha8Rng,
    transcript: Vec<QueryRecord>,
}

impl SimulatedOracle {
    pub fn new(config: OracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            rng: seeded_rng(config.seed),
            config,
            transcript: Vec::new(),
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn transcript(&self) -> &[QueryRecord] {
        &self.transcript
    }

    pub fn query_count(&self) -> usize {
        self.transcript.len()
    }

    /// Answers 1[φ(c) > φ(c′)], possibly flipped inside the band.
    pub fn compare(&mut self, c: &ConfusionPoint, c_prime: &ConfusionPoint) -> Result<QueryRecord> {
        let query = Query {
            index: self.transcript.len(),
            first: Probe::bare(*c),
            second: Probe::bare(*c_prime),
        };
        let response = self.judge(&query.first.point, &query.second.point)?;
        let record = QueryRecord::new(&query, response);
        self.transcript.push(record);
        Ok(record)
    }

    fn judge(&mut self, c: &ConfusionPoint, c_prime: &ConfusionPoint) -> Result<Response> {
        let a = self.config.metric.eval(c)?;
        let b = self.config.metric.eval(c_prime)?;
        let truth = a > b;
        let in_band = (a - b).abs() < self.config.epsilon_omega;
        let flip = in_band
            && match self.config.band_policy {
                BandPolicy::Correct => false,
                BandPolicy::AlwaysFlip => true,
                BandPolicy::FlipProb(p) => self.rng.random_bool(p),
            };
        Ok(Response {
            prefer_first: truth != flip,
            in_band,
        })
    }
}

impl Oracle for SimulatedOracle {
    fn respond(&mut self, query: &Query) -> Result<Response> {
        let response = self.judge(&query.first.point, &query.second.point)?;
        let mut record = QueryRecord::new(query, response);
        record.index = self.transcript.len();
        self.transcript.push(record);
        Ok(response)
    }
}

/// Writes `index,tp_a,tn_a,tp_b,tn_b,answer,in_band`, booleans as `1`/`0`.
pub fn write_transcript<W: Write>(records: &[QueryRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,tp_a,tn_a,tp_b,tn_b,answer,in_band")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.index,
            r.c_a.tp,
            r.c_a.tn,
            r.c_b.tp,
            r.c_b.tn,
            u8::from(r.answer),
            u8::from(r.in_band)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use rand::Rng;

    use super::*;
    use crate::metrics::{lpm_eval, LinearMetric};

    fn diagonal() -> LinearMetric {
        LinearMetric::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)
    }

    #[test]
    fn dominating_point_is_preferred() {
        let mut oracle = SimulatedOracle::new(OracleConfig::exact(diagonal())).unwrap();
        let r = oracle
            .compare(&ConfusionPoint::new(0.4, 0.4), &ConfusionPoint::new(0.3, 0.3))
            .unwrap();
        assert!(r.answer);
        assert!(!r.in_band);
    }

    #[test]
    fn ties_are_not_preferred() {
        let mut oracle = SimulatedOracle::new(OracleConfig::exact(diagonal())).unwrap();
        let c = ConfusionPoint::new(0.2, 0.3);
        assert!(!oracle.compare(&c, &c).unwrap().answer);
    }

    #[test]
    fn always_flip_inverts_inside_band() {
        let config = OracleConfig {
            metric: LinearMetric::new(1.0, 0.0, 0.0).into(),
            epsilon_omega: 0.1,
            band_policy: BandPolicy::AlwaysFlip,
            seed: 3,
        };
        let mut oracle = SimulatedOracle::new(config).unwrap();
        let r = oracle
            .compare(&ConfusionPoint::new(0.40, 0.0), &ConfusionPoint::new(0.39, 0.0))
            .unwrap();
        assert!(!r.answer);
        assert!(r.in_band);
        let r = oracle
            .compare(&ConfusionPoint::new(0.40, 0.0), &ConfusionPoint::new(0.20, 0.0))
            .unwrap();
        assert!(r.answer);
        assert!(!r.in_band);
    }

    #[test]
    fn zero_band_matches_indicator() {
        let metric = LinearMetric::new(0.3, -0.8, 0.1);
        let config = OracleConfig {
            metric: metric.into(),
            epsilon_omega: 0.0,
            band_policy: BandPolicy::AlwaysFlip,
            seed: 1,
        };
        let mut oracle = SimulatedOracle::new(config).unwrap();
        let mut rng = seeded_rng(9);
        for _ in 0..100 {
            let c = ConfusionPoint::new(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
            let d = ConfusionPoint::new(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
            let expected = lpm_eval(&metric, &c) > lpm_eval(&metric, &d);
            assert_eq!(oracle.compare(&c, &d).unwrap().answer, expected);
        }
        assert_eq!(oracle.query_count(), 100);
    }

    #[test]
    fn same_seed_same_transcript() {
        let config = OracleConfig {
            metric: diagonal().into(),
            epsilon_omega: 0.5,
            band_policy: BandPolicy::FlipProb(0.5),
            seed: 77,
        };
        let run = || {
            let mut oracle = SimulatedOracle::new(config).unwrap();
            let mut rng = seeded_rng(5);
            for _ in 0..50 {
                let c = ConfusionPoint::new(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
                let d = ConfusionPoint::new(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
                oracle.compare(&c, &d).unwrap();
            }
            oracle.transcript().to_vec()
        };
        let first = run();
        assert_eq!(first, run());
        assert!(first.windows(2).all(|w| w[0].index < w[1].index));
    }

    #[test]
    fn rejects_bad_config() {
        let mut config = OracleConfig::exact(diagonal());
        config.band_policy = BandPolicy::FlipProb(1.5);
        assert!(SimulatedOracle::new(config).is_err());
        config.band_policy = BandPolicy::Correct;
        config.epsilon_omega = -1.0;
        assert!(SimulatedOracle::new(config).is_err());
    }

    #[test]
    fn transcript_table_uses_binary_flags() {
        let mut oracle = SimulatedOracle::new(OracleConfig::exact(diagonal())).unwrap();
        oracle
            .compare(&ConfusionPoint::new(0.4, 0.4), &ConfusionPoint::new(0.3, 0.3))
            .unwrap();
        let mut buf = Vec::new();
        write_transcript(oracle.transcript(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "index,tp_a,tn_a,tp_b,tn_b,answer,in_band\n0,0.4,0.4,0.3,0.3,1,0\n"
        );
    }
}
