//! End-to-end elicitation as a single resumable state machine.
//!
//! LPM: one orientation query, then a maximizing search on the boundary arc
//! it selects. LFPM: a maximizing search on the upper arc, a minimizing
//! search on the lower arc, then the query-free grid search.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{grid_search_ratio, GridResult};
use super::search::{Goal, SearchMachine, SearchResult};
use super::system::{solve_upper_system, SolvedSystem};
use crate::error::{Error, Result};
use crate::geometry::{boundary_probe, Boundary};
use crate::metrics::{LinearMetric, Metric};
use crate::model::PopulationModel;
use crate::oracle::{Oracle, Probe, Query, QueryRecord, Response};

pub const DEFAULT_K: usize = 2000;
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lpm,
    Lfpm,
}

/// Whether the hidden metric increases or decreases in `(TP, TN)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElicitationConfig {
    pub family: Family,
    pub epsilon: f64,
    pub k: usize,
    pub delta: f64,
}

impl ElicitationConfig {
    pub fn lpm(epsilon: f64) -> Self {
        Self {
            family: Family::Lpm,
            epsilon,
            k: DEFAULT_K,
            delta: DEFAULT_DELTA,
        }
    }

    pub fn lfpm(epsilon: f64, k: usize, delta: f64) -> Self {
        Self {
            family: Family::Lfpm,
            epsilon,
            k,
            delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationOutcome {
    pub family: Family,
    pub metric: Metric,
    /// Set for LPM runs only.
    pub direction: Option<Direction>,
    pub orient_query: Option<QueryRecord>,
    /// The maximizing search (on the lower arc for a decreasing LPM).
    pub upper: SearchResult,
    /// The minimizing search; LFPM only.
    pub lower: Option<SearchResult>,
    pub p11_opt: Option<f64>,
    pub sigma_opt: Option<f64>,
    pub system: Option<SolvedSystem>,
    pub total_queries: usize,
}

impl ElicitationOutcome {
    /// Every query of the run in order.
    pub fn transcript(&self) -> Vec<QueryRecord> {
        let mut all: Vec<QueryRecord> = self.orient_query.into_iter().collect();
        all.extend(self.upper.transcript.iter().copied());
        if let Some(lower) = &self.lower {
            all.extend(lower.transcript.iter().copied());
        }
        all
    }
}

#[derive(Debug, Clone)]
enum Stage {
    Orient { query: Query },
    LpmSearch {
        orient: QueryRecord,
        direction: Direction,
        search: SearchMachine,
    },
    LfpmUpper { search: SearchMachine },
    LfpmLower {
        upper: SearchResult,
        search: SearchMachine,
    },
    Done(Box<ElicitationOutcome>),
    /// Held only while a transition is being computed.
    Advancing,
}

#[derive(Debug, Clone)]
pub struct ElicitationMachine {
    model: Arc<dyn PopulationModel>,
    config: ElicitationConfig,
    stage: Stage,
}

impl ElicitationMachine {
    pub fn new(model: Arc<dyn PopulationModel>, config: ElicitationConfig) -> Result<Self> {
        if !(config.epsilon.is_finite() && config.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                config.epsilon
            )));
        }
        let stage = match config.family {
            Family::Lpm => Stage::Orient {
                query: orient_query(model.as_ref(), 0)?,
            },
            Family::Lfpm => {
                if config.k < 2 || !config.k.is_multiple_of(2) {
                    return Err(Error::InvalidParameter(format!(
                        "k must be even and at least 2, got {}",
                        config.k
                    )));
                }
                if !(config.delta > 0.0 && config.delta <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "grid step must lie in (0, 1], got {}",
                        config.delta
                    )));
                }
                let search = SearchMachine::new(
                    Arc::clone(&model),
                    Goal::Maximize,
                    Boundary::Upper,
                    config.epsilon,
                    0,
                )?;
                Stage::LfpmUpper { search }
            }
        };
        let mut machine = Self {
            model,
            config,
            stage,
        };
        machine.settle()?;
        Ok(machine)
    }

    pub fn config(&self) -> &ElicitationConfig {
        &self.config
    }

    pub fn pending(&self) -> Option<Query> {
        match &self.stage {
            Stage::Orient { query } => Some(*query),
            Stage::LpmSearch { search, .. }
            | Stage::LfpmUpper { search }
            | Stage::LfpmLower { search, .. } => search.pending(),
            Stage::Done(_) | Stage::Advancing => None,
        }
    }

    pub fn outcome(&self) -> Option<&ElicitationOutcome> {
        match &self.stage {
            Stage::Done(outcome) => Some(outcome),
            _ => None,
        }
    }

    pub fn into_outcome(self) -> Option<ElicitationOutcome> {
        match self.stage {
            Stage::Done(outcome) => Some(*outcome),
            _ => None,
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self.stage, Stage::Done(_))
    }

    pub fn respond(&mut self, response: Response) -> Result<()> {
        match &mut self.stage {
            Stage::Orient { query } => {
                let record = QueryRecord::new(query, response);
                let (direction, boundary) = if response.prefer_first {
                    (Direction::Increasing, Boundary::Upper)
                } else {
                    (Direction::Decreasing, Boundary::Lower)
                };
                let search = SearchMachine::new(
                    Arc::clone(&self.model),
                    Goal::Maximize,
                    boundary,
                    self.config.epsilon,
                    record.index + 1,
                )?;
                self.stage = Stage::LpmSearch {
                    orient: record,
                    direction,
                    search,
                };
            }
            Stage::LpmSearch { search, .. }
            | Stage::LfpmUpper { search }
            | Stage::LfpmLower { search, .. } => search.respond(response)?,
            Stage::Done(_) | Stage::Advancing => return Err(Error::NoPendingQuery),
        }
        self.settle()
    }

    /// Moves past finished searches.
    fn settle(&mut self) -> Result<()> {
        loop {
            let stage = std::mem::replace(&mut self.stage, Stage::Advancing);
            let (next, progressed) = self.step(stage)?;
            self.stage = next;
            if !progressed {
                return Ok(());
            }
        }
    }

    fn step(&self, stage: Stage) -> Result<(Stage, bool)> {
        Ok(match stage {
            Stage::LpmSearch {
                orient,
                direction,
                search,
            } if search.finished() => {
                let upper = search.into_result().expect("finished search has a result");
                let [m11, m00] = upper.slope.components();
                let outcome = ElicitationOutcome {
                    family: Family::Lpm,
                    metric: Metric::Lpm(LinearMetric::new(m11, m00, 0.0)),
                    direction: Some(direction),
                    orient_query: Some(orient),
                    total_queries: 1 + upper.query_count,
                    upper,
                    lower: None,
                    p11_opt: None,
                    sigma_opt: None,
                    system: None,
                };
                (Stage::Done(Box::new(outcome)), false)
            }
            Stage::LfpmUpper { search } if search.finished() => {
                let next_index = search.next_index();
                let upper = search.into_result().expect("finished search has a result");
                let search = SearchMachine::new(
                    Arc::clone(&self.model),
                    Goal::Minimize,
                    Boundary::Lower,
                    self.config.epsilon,
                    next_index,
                )?;
                (Stage::LfpmLower { upper, search }, true)
            }
            Stage::LfpmLower { upper, search } if search.finished() => {
                let lower = search.into_result().expect("finished search has a result");
                let grid = grid_search_ratio(
                    self.model.as_ref(),
                    &upper,
                    &lower,
                    self.config.k,
                    self.config.delta,
                )?;
                let outcome = lfpm_outcome(self.model.zeta(), upper, lower, grid)?;
                (Stage::Done(Box::new(outcome)), false)
            }
            other => (other, false),
        })
    }
}

fn lfpm_outcome(
    zeta: f64,
    upper: SearchResult,
    lower: SearchResult,
    grid: GridResult,
) -> Result<ElicitationOutcome> {
    let plane = upper.hyperplane;
    let system = solve_upper_system(grid.p11_opt, plane.slope.components(), plane.offset, zeta)?;
    Ok(ElicitationOutcome {
        family: Family::Lfpm,
        metric: Metric::Lfpm(system.metric()),
        direction: None,
        orient_query: None,
        total_queries: upper.query_count + lower.query_count,
        upper,
        lower: Some(lower),
        p11_opt: Some(grid.p11_opt),
        sigma_opt: Some(grid.sigma_opt),
        system: Some(system),
    })
}

/// The orientation question: is the upper point at `π/4` preferred to its
/// lower counterpart at `5π/4`?
pub fn orient_query(model: &dyn PopulationModel, index: usize) -> Result<Query> {
    let probe = |theta: f64| -> Result<Probe> {
        let (clf, point) = boundary_probe(model, theta)?;
        Ok(Probe {
            point,
            theta: Some(theta),
            classifier: Some(clf),
        })
    };
    Ok(Query {
        index,
        first: probe(FRAC_PI_4)?,
        second: probe(PI + FRAC_PI_4)?,
    })
}

/// Runs one orientation query against `oracle`.
pub fn orient<O: Oracle + ?Sized>(
    model: &dyn PopulationModel,
    oracle: &mut O,
) -> Result<(Direction, QueryRecord)> {
    let query = orient_query(model, 0)?;
    let response = oracle.respond(&query)?;
    let direction = if response.prefer_first {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    Ok((direction, QueryRecord::new(&query, response)))
}

fn drive_search<O: Oracle + ?Sized>(mut search: SearchMachine, oracle: &mut O) -> Result<SearchResult> {
    while let Some(query) = search.pending() {
        let response = oracle.respond(&query)?;
        search.respond(response)?;
    }
    Ok(search.into_result().expect("search without pending query is finished"))
}

/// Quasiconcave maximization over the upper boundary.
pub fn maximize_quasiconcave<O: Oracle + ?Sized>(
    model: Arc<dyn PopulationModel>,
    oracle: &mut O,
    epsilon: f64,
) -> Result<SearchResult> {
    let search = SearchMachine::new(model, Goal::Maximize, Boundary::Upper, epsilon, 0)?;
    drive_search(search, oracle)
}

/// Quasiconvex minimization over the lower boundary.
pub fn minimize_quasiconvex<O: Oracle + ?Sized>(
    model: Arc<dyn PopulationModel>,
    oracle: &mut O,
    epsilon: f64,
) -> Result<SearchResult> {
    let search = SearchMachine::new(model, Goal::Minimize, Boundary::Lower, epsilon, 0)?;
    drive_search(search, oracle)
}

/// Drives `machine` to completion with `oracle`.
pub fn run_machine<O: Oracle + ?Sized>(
    mut machine: ElicitationMachine,
    oracle: &mut O,
) -> Result<ElicitationOutcome> {
    while let Some(query) = machine.pending() {
        let response = oracle.respond(&query)?;
        machine.respond(response)?;
    }
    Ok(machine
        .into_outcome()
        .expect("machine without pending query is done"))
}

pub fn elicit_lpm<O: Oracle + ?Sized>(
    model: Arc<dyn PopulationModel>,
    oracle: &mut O,
    epsilon: f64,
) -> Result<ElicitationOutcome> {
    run_machine(ElicitationMachine::new(model, ElicitationConfig::lpm(epsilon))?, oracle)
}

pub fn elicit_lfpm<O: Oracle + ?Sized>(
    model: Arc<dyn PopulationModel>,
    oracle: &mut O,
    epsilon: f64,
    k: usize,
    delta: f64,
) -> Result<ElicitationOutcome> {
    run_machine(
        ElicitationMachine::new(model, ElicitationConfig::lfpm(epsilon, k, delta))?,
        oracle,
    )
}
