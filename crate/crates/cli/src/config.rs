//! Command-line configuration.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use metric_elicit_core::metrics::{make_named, LinearFractionalMetric, LinearMetric, Metric, NamedMetric};
use metric_elicit_core::oracle::BandPolicy;

pub const SEED_ENV: &str = "METRIC_ELICIT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    ElicitLpm,
    ElicitLfpm,
    Table1,
    Table2,
    SpaceExport,
    EmpiricalRun,
    GenerateCsv,
    Serve,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "metric-elicit", version, about = "Elicit classification metrics from pairwise comparisons")]
pub struct Config {
    #[arg(long, value_enum)]
    pub task: Task,

    /// Noise parameter of the synthetic logistic model.
    #[arg(long, default_value_t = 5.0)]
    pub a: f64,

    /// Search tolerance in radians (task default when omitted).
    #[arg(long)]
    pub epsilon: Option<f64>,

    #[arg(long, default_value_t = 0.0)]
    pub epsilon_omega: f64,

    /// `correct`, `always_flip`, `flip_prob` or `flip_prob:<p>`.
    #[arg(long, default_value = "flip_prob", value_parser = parse_policy)]
    pub policy: BandPolicy,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Boundary points used by the ratio grid search.
    #[arg(long, default_value_t = 2000)]
    pub k: usize,

    /// Step of the p11 grid.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,

    #[arg(long)]
    pub csv: Option<PathBuf>,

    #[arg(long, default_value = "label")]
    pub label_col: String,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    /// Training fraction of the train/evaluation split.
    #[arg(long, default_value_t = 0.5)]
    pub split: f64,

    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 8080)]
    pub port: u16,

    /// Hidden metric: `m11,m00[,m0]`, `p11,p00,p0,q11,q00,q0`, `f1`,
    /// `fbeta:<beta>`, `jaccard` or `wa:<w1>,<w2>`.
    #[arg(long)]
    pub metric: Option<String>,

    /// Angles sampled by space-export.
    #[arg(long, default_value_t = 1000)]
    pub num_angles: usize,

    /// Rows written by generate-csv.
    #[arg(long, default_value_t = 19020)]
    pub rows: usize,
}

impl Config {
    /// Parses `args` and applies the seed override from the environment.
    pub fn from_args<I, T>(args: I) -> anyhow::Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let mut config = Config::try_parse_from(args)?;
        if let Ok(raw) = std::env::var(SEED_ENV) {
            config.seed = raw
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={raw:?} is not an unsigned integer"))?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            bail!("--a must be positive, got {}", self.a);
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                bail!("--epsilon must be positive, got {eps}");
            }
        }
        if !(self.epsilon_omega.is_finite() && self.epsilon_omega >= 0.0) {
            bail!("--epsilon-omega must be non-negative, got {}", self.epsilon_omega);
        }
        if self.k < 2 || !self.k.is_multiple_of(2) {
            bail!("--k must be even and at least 2, got {}", self.k);
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            bail!("--delta must lie in (0, 1], got {}", self.delta);
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            bail!("--split must lie in (0, 1), got {}", self.split);
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            bail!("--lambda must be non-negative, got {}", self.lambda);
        }
        if let Some(path) = &self.csv {
            if !path.is_file() {
                bail!("--csv {} does not exist", path.display());
            }
        }
        match self.task {
            Task::ElicitLpm | Task::ElicitLfpm if self.metric.is_none() => {
                bail!("--metric is required for this task")
            }
            Task::EmpiricalRun if self.csv.is_none() => bail!("--csv is required for empirical-run"),
            _ => Ok(()),
        }
    }

    pub fn epsilon_or(&self, default: f64) -> f64 {
        self.epsilon.unwrap_or(default)
    }
}

pub fn parse_policy(raw: &str) -> Result<BandPolicy, String> {
    match raw {
        "correct" => Ok(BandPolicy::Correct),
        "always_flip" => Ok(BandPolicy::AlwaysFlip),
        "flip_prob" => Ok(BandPolicy::FlipProb(0.5)),
        _ => {
            let p = raw
                .strip_prefix("flip_prob:")
                .and_then(|p| p.parse::<f64>().ok())
                .ok_or_else(|| format!("unknown band policy {raw:?}"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("flip probability {p} is outside [0, 1]"));
            }
            Ok(BandPolicy::FlipProb(p))
        }
    }
}

pub fn parse_metric(raw: &str, zeta: f64) -> anyhow::Result<Metric> {
    let named = match raw {
        "f1" => Some(NamedMetric::FBeta { beta: 1.0 }),
        "jaccard" => Some(NamedMetric::Jaccard),
        _ => None,
    };
    if let Some(named) = named {
        return Ok(make_named(named, zeta)?);
    }
    if let Some(beta) = raw.strip_prefix("fbeta:") {
        let beta = beta.parse().with_context(|| format!("bad beta in {raw:?}"))?;
        return Ok(make_named(NamedMetric::FBeta { beta }, zeta)?);
    }
    if let Some(w) = raw.strip_prefix("wa:") {
        let w = numbers(w)?;
        let [w1, w2] = w[..] else {
            bail!("wa takes two weights, got {raw:?}");
        };
        return Ok(make_named(NamedMetric::WeightedAccuracy { w1, w2 }, zeta)?);
    }
    let v = numbers(raw)?;
    Ok(match v[..] {
        [m11, m00] => Metric::Lpm(LinearMetric::new(m11, m00, 0.0)),
        [m11, m00, m0] => Metric::Lpm(LinearMetric::new(m11, m00, m0)),
        [p11, p00, p0, q11, q00, q0] => {
            Metric::Lfpm(LinearFractionalMetric::new(p11, p00, p0, q11, q00, q0))
        }
        _ => bail!("metric {raw:?} needs 2, 3 or 6 coefficients"),
    })
}

fn numbers(raw: &str) -> anyhow::Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("{s:?} is not a number"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies() {
        assert_eq!(parse_policy("correct"), Ok(BandPolicy::Correct));
        assert_eq!(parse_policy("flip_prob"), Ok(BandPolicy::FlipProb(0.5)));
        assert_eq!(parse_policy("flip_prob:0.25"), Ok(BandPolicy::FlipProb(0.25)));
        assert!(parse_policy("flip_prob:2").is_err());
        assert!(parse_policy("sometimes").is_err());
    }

    #[test]
    fn metrics() {
        assert_eq!(
            parse_metric("0.6, 0.8", 0.5).unwrap(),
            Metric::Lpm(LinearMetric::new(0.6, 0.8, 0.0))
        );
        let Metric::Lfpm(f1) = parse_metric("f1", 0.5).unwrap() else { panic!() };
        assert_eq!((f1.q11, f1.q00, f1.q0), (0.5, -0.5, 0.5));
        assert!(parse_metric("1,2,3,4", 0.5).is_err());
        assert!(parse_metric("x,y", 0.5).is_err());
    }

    #[test]
    fn required_flags() {
        assert!(Config::from_args(["metric-elicit", "--task", "elicit-lpm"]).is_err());
        assert!(Config::from_args(["metric-elicit", "--task", "table1", "--k", "3"]).is_err());
        let c = Config::from_args(["metric-elicit", "--task", "table1"]).unwrap();
        assert_eq!(c.epsilon_or(0.02), 0.02);
    }
}
