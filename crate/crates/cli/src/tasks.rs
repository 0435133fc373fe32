//! Experiment runners behind the CLI tasks.

use std::f64::consts::PI;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use metric_elicit_core::elicit::{
    boundary_argmax, elicit_lfpm, elicit_lpm, ratio_stats, ElicitationOutcome,
};
use metric_elicit_core::empirical::{
    generate_synthetic, load_csv, train_logistic, write_csv, write_scores, EmpiricalModel,
};
use metric_elicit_core::geometry::{boundary_grid, export_space, write_space_table, Boundary};
use metric_elicit_core::metrics::{LinearFractionalMetric, LinearMetric, Metric};
use metric_elicit_core::model::PopulationModel;
use metric_elicit_core::oracle::{write_transcript, BandPolicy, OracleConfig, SimulatedOracle};
use metric_elicit_core::{ConfusionPoint, SyntheticLogistic};
use serde::Serialize;

use crate::config::{parse_metric, Config, Task};

/// Linear metrics of the reference slope table: four increasing, four decreasing.
pub const TABLE1_SLOPES: [[f64; 2]; 8] = [
    [0.98, 0.17],
    [0.87, 0.50],
    [0.64, 0.77],
    [0.34, 0.94],
    [-0.94, -0.34],
    [-0.77, -0.64],
    [-0.50, -0.87],
    [-0.17, -0.98],
];

/// Linear-fractional metrics of the reference ratio table, valid at ζ = 1/2.
pub const TABLE2_METRICS: [LinearFractionalMetric; 6] = [
    LinearFractionalMetric::new(1.0, 0.0, 0.0, 0.5, -0.5, 0.5),
    LinearFractionalMetric::new(1.0, 0.0, 0.0, 0.8, -0.8, 0.5),
    LinearFractionalMetric::new(0.8, 0.2, 0.0, 0.3, 0.1, 0.3),
    LinearFractionalMetric::new(0.6, 0.4, 0.0, 0.4, 0.2, 0.2),
    LinearFractionalMetric::new(0.4, 0.6, 0.0, -0.1, -0.2, 0.65),
    LinearFractionalMetric::new(0.2, 0.8, 0.0, -0.4, -0.2, 0.8),
];

/// Upper-boundary points used to report α and σ.
pub const RATIO_POINTS: usize = 1000;

/// Noise settings shared by every oracle a task creates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub epsilon_omega: f64,
    pub policy: BandPolicy,
    pub seed: u64,
}

impl OracleSettings {
    pub fn exact() -> Self {
        Self {
            epsilon_omega: 0.0,
            policy: BandPolicy::Correct,
            seed: 0,
        }
    }

    /// Oracle for run number `run` of a task; each run gets its own stream.
    pub fn oracle(&self, metric: impl Into<Metric>, run: u64) -> anyhow::Result<SimulatedOracle> {
        Ok(SimulatedOracle::new(OracleConfig {
            metric: metric.into(),
            epsilon_omega: self.epsilon_omega,
            band_policy: self.policy,
            seed: self.seed.wrapping_add(run),
        })?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub truth: [f64; 2],
    pub elicited: [f64; 2],
    pub theta_true: f64,
    pub theta_hat: f64,
    pub queries: usize,
}

pub fn run_table1(
    model: Arc<dyn PopulationModel>,
    oracle: OracleSettings,
    epsilon: f64,
) -> anyhow::Result<Vec<Table1Row>> {
    TABLE1_SLOPES
        .iter()
        .enumerate()
        .map(|(i, &[m11, m00])| {
            let metric = LinearMetric::new(m11, m00, 0.0);
            let mut o = oracle.oracle(metric, i as u64)?;
            let out = elicit_lpm(Arc::clone(&model), &mut o, epsilon)?;
            Ok(Table1Row {
                truth: [m11, m00],
                elicited: out.upper.slope.components(),
                theta_true: m00.atan2(m11).rem_euclid(2.0 * PI),
                theta_hat: out.upper.theta_hat,
                queries: out.total_queries,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub truth: LinearFractionalMetric,
    pub elicited: LinearFractionalMetric,
    pub p11_opt: f64,
    pub sigma_opt: f64,
    /// Mean of elicited / true over the upper-boundary grid.
    pub alpha: f64,
    /// Population standard deviation of the same ratios.
    pub sigma: f64,
    pub argmax_true: f64,
    pub argmax_elicited: f64,
    pub queries: usize,
}

pub fn upper_points(model: &dyn PopulationModel, n: usize) -> anyhow::Result<Vec<ConfusionPoint>> {
    Ok(boundary_grid(model, Boundary::Upper, n)?
        .into_iter()
        .map(|(_, c)| c)
        .collect())
}

/// Compares an elicited LFPM with the truth on the upper boundary.
pub fn lfpm_row(
    model: &dyn PopulationModel,
    truth: &LinearFractionalMetric,
    out: &ElicitationOutcome,
) -> anyhow::Result<Table2Row> {
    let Metric::Lfpm(elicited) = out.metric else {
        anyhow::bail!("expected a fractional metric, got {:?}", out.metric);
    };
    let points = upper_points(model, RATIO_POINTS)?;
    let (alpha, sigma) = ratio_stats(&elicited, truth, &points)
        .context("no boundary point has a nonzero true metric")?;
    Ok(Table2Row {
        truth: *truth,
        elicited,
        p11_opt: out.p11_opt.unwrap_or(f64::NAN),
        sigma_opt: out.sigma_opt.unwrap_or(f64::NAN),
        alpha,
        sigma,
        argmax_true: boundary_argmax(model, &Metric::Lfpm(*truth), Boundary::Upper, RATIO_POINTS)?,
        argmax_elicited: boundary_argmax(model, &out.metric, Boundary::Upper, RATIO_POINTS)?,
        queries: out.total_queries,
    })
}

pub fn run_table2(
    model: Arc<dyn PopulationModel>,
    oracle: OracleSettings,
    epsilon: f64,
    k: usize,
    delta: f64,
) -> anyhow::Result<Vec<Table2Row>> {
    TABLE2_METRICS
        .iter()
        .enumerate()
        .map(|(i, truth)| {
            let mut o = oracle.oracle(*truth, i as u64)?;
            let out = elicit_lfpm(Arc::clone(&model), &mut o, epsilon, k, delta)?;
            lfpm_row(model.as_ref(), truth, &out)
        })
        .collect()
}

/// True angles of the empirical sweep: 10°–75° on the upper arc and
/// 190°–255° on the lower, in 5° steps.
pub fn sweep_angles() -> Vec<f64> {
    let step = PI / 36.0;
    let upper = (0..14).map(|i| PI / 18.0 + i as f64 * step);
    let lower = (0..14).map(|i| 19.0 * PI / 18.0 + i as f64 * step);
    upper.chain(lower).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta_true: f64,
    pub theta_hat: f64,
    pub error: f64,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalReport {
    pub rows_total: usize,
    pub rows_evaluated: usize,
    pub zeta_hat: f64,
    pub lambda: f64,
    pub converged: bool,
    pub epsilon: f64,
    pub sweep: Vec<SweepRow>,
    pub failure_proportion: f64,
}

/// Fits the score model, then elicits every sweep slope on the held-out
/// sample. A run fails when the elicited angle is more than `epsilon` away.
pub fn run_empirical(
    csv: &Path,
    label_col: &str,
    lambda: f64,
    split: f64,
    seed: u64,
    epsilon: f64,
    oracle: OracleSettings,
) -> anyhow::Result<(EmpiricalReport, metric_elicit_core::empirical::SampleSet)> {
    let data = load_csv(csv, label_col)?;
    let (fit, held) = train_logistic(&data, lambda, split, seed)?;
    let model: Arc<dyn PopulationModel> = Arc::new(EmpiricalModel::new(&held));
    let mut sweep = Vec::new();
    for (i, theta) in sweep_angles().into_iter().enumerate() {
        let metric = LinearMetric::new(theta.cos(), theta.sin(), 0.0);
        let mut o = oracle.oracle(metric, i as u64)?;
        let out = elicit_lpm(Arc::clone(&model), &mut o, epsilon)?;
        let error = (out.upper.theta_hat - theta).abs();
        sweep.push(SweepRow {
            theta_true: theta,
            theta_hat: out.upper.theta_hat,
            error,
            failed: error > epsilon,
        });
    }
    let failures = sweep.iter().filter(|r| r.failed).count();
    let report = EmpiricalReport {
        rows_total: data.len(),
        rows_evaluated: held.len(),
        zeta_hat: held.zeta_hat(),
        lambda,
        converged: fit.converged,
        epsilon,
        failure_proportion: failures as f64 / sweep.len() as f64,
        sweep,
    };
    Ok((report, held))
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn oracle_settings(config: &Config) -> OracleSettings {
    OracleSettings {
        epsilon_omega: config.epsilon_omega,
        policy: config.policy,
        seed: config.seed,
    }
}

/// Runs a non-serving task; returns the files written.
pub fn run_task(config: &Config) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(&config.out)
        .with_context(|| format!("creating {}", config.out.display()))?;
    let out = |name: &str| config.out.join(name);
    let logistic = || -> anyhow::Result<Arc<dyn PopulationModel>> {
        Ok(Arc::new(SyntheticLogistic::new(config.a)?))
    };
    let oracle = oracle_settings(config);
    let mut written = Vec::new();
    match config.task {
        Task::ElicitLpm | Task::ElicitLfpm => {
            let model = logistic()?;
            let raw = config.metric.as_deref().context("--metric is required")?;
            let metric = parse_metric(raw, model.zeta())?;
            let mut o = oracle.oracle(metric, 0)?;
            let eps = config.epsilon_or(if config.task == Task::ElicitLpm { 0.02 } else { 0.05 });
            let outcome = if config.task == Task::ElicitLpm {
                elicit_lpm(model, &mut o, eps)?
            } else {
                elicit_lfpm(model, &mut o, eps, config.k, config.delta)?
            };
            let stem = if config.task == Task::ElicitLpm { "elicit_lpm" } else { "elicit_lfpm" };
            let path = out(&format!("{stem}.json"));
            write_json(&path, &serde_json::json!({ "truth": metric, "outcome": outcome }))?;
            written.push(path);
            let path = out(&format!("{stem}_transcript.csv"));
            write_transcript(&outcome.transcript(), create(&path)?)?;
            written.push(path);
        }
        Task::Table1 => {
            let rows = run_table1(logistic()?, oracle, config.epsilon_or(0.02))?;
            let path = out("table1.json");
            write_json(&path, &rows)?;
            written.push(path);
        }
        Task::Table2 => {
            let rows = run_table2(logistic()?, oracle, config.epsilon_or(0.05), config.k, config.delta)?;
            let path = out("table2.json");
            write_json(&path, &rows)?;
            written.push(path);
        }
        Task::SpaceExport => {
            let model = logistic()?;
            let planes = export_space(model.as_ref(), config.num_angles)?;
            let path = out("space.csv");
            write_space_table(&planes, create(&path)?)?;
            written.push(path);
        }
        Task::EmpiricalRun => {
            let csv = config.csv.as_deref().context("--csv is required")?;
            let (report, held) = run_empirical(
                csv,
                &config.label_col,
                config.lambda,
                config.split,
                config.seed,
                config.epsilon_or(0.11),
                oracle,
            )?;
            let path = out("empirical.json");
            write_json(&path, &report)?;
            written.push(path);
            let path = out("scores.csv");
            write_scores(&held, create(&path)?)?;
            written.push(path);
        }
        Task::GenerateCsv => {
            let model = SyntheticLogistic::new(config.a)?;
            let data = generate_synthetic(&model, config.rows, config.seed);
            let path = out(&format!("synthetic_{}.csv", config.rows));
            write_csv(&data, &config.label_col, create(&path)?)?;
            written.push(path);
        }
        Task::Serve => anyhow::bail!("serve is not a batch task"),
    }
    Ok(written)
}

