//! Metric elicitation from pairwise preferences.

mod grid;
mod machine;
mod search;
mod system;

pub use grid::{candidate_sigma, grid_search_planes, grid_search_ratio, p11_candidates, ratio_points, GridResult};
pub use machine::{
    elicit_lfpm, elicit_lpm, maximize_quasiconcave, minimize_quasiconvex, orient, orient_query,
    run_machine, Direction, ElicitationConfig, ElicitationMachine, ElicitationOutcome, Family,
    DEFAULT_DELTA, DEFAULT_K,
};
pub use search::{apply_default_order, iterations_for, shrink, Goal, SearchMachine, SearchResult, MAX_ITERATIONS};
pub use system::{mean_std, ratio_stats, solve_upper_system, SolvedSystem};

use crate::geometry::{boundary_grid, Boundary};
use crate::metrics::Metric;
use crate::model::PopulationModel;
use crate::error::Result;

/// Angle in `boundary`'s interval where `metric` peaks on a `count`-point grid.
pub fn boundary_argmax(
    model: &dyn PopulationModel,
    metric: &Metric,
    boundary: Boundary,
    count: usize,
) -> Result<f64> {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (theta, c) in boundary_grid(model, boundary, count)? {
        if let Ok(v) = metric.eval(&c) {
            if v > best.1 {
                best = (theta, v);
            }
        }
    }
    Ok(best.0)
}
