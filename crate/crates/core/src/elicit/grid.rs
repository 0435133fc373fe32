//! Picking `p11` by matching the fractional metrics implied by the two searches.

use serde::{Deserialize, Serialize};

use super::search::SearchResult;
use super::system::{mean_std, solve_upper_system};
use crate::error::{Error, Result};
use crate::geometry::{boundary_grid, Boundary, ConfusionPoint};
use crate::metrics::lfpm_eval;
use crate::model::PopulationModel;

const TINY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub p11_opt: f64,
    pub sigma_opt: f64,
}

/// Candidate values `0, Δ, 2Δ, …` up to and including 1 when Δ divides it.
pub fn p11_candidates(delta: f64) -> Vec<f64> {
    let steps = (1.0 / delta + 1e-9).floor() as usize;
    (0..=steps).map(|i| (i as f64 * delta).min(1.0)).collect()
}

/// Grid points used by the ratio search: `k/2` per boundary, endpoints included.
pub fn ratio_points(model: &dyn PopulationModel, k: usize) -> Result<Vec<ConfusionPoint>> {
    let half = k / 2;
    let mut points = Vec::with_capacity(k);
    for boundary in [Boundary::Upper, Boundary::Lower] {
        points.extend(boundary_grid(model, boundary, half)?.into_iter().map(|(_, c)| c));
    }
    Ok(points)
}

/// Spread of `φ′/φ″` for one candidate; `+∞` when no point yields a ratio.
///
/// `φ′` solves the system at the maximizer hyperplane. `φ″` solves it at the
/// minimizer hyperplane with normal and offset negated: the minimizer's
/// normal points away from the feasible set, and flipping it turns the
/// minimizer system into the same first-quadrant form as the maximizer one.
///
/// Planes are `(normal, offset)` pairs as produced by the searches.
pub fn candidate_sigma(
    p11: f64,
    upper: ([f64; 2], f64),
    lower: ([f64; 2], f64),
    zeta: f64,
    points: &[ConfusionPoint],
) -> f64 {
    let ([l11, l00], l0) = lower;
    let (Ok(phi1), Ok(phi2)) = (
        solve_upper_system(p11, upper.0, upper.1, zeta),
        solve_upper_system(p11, [-l11, -l00], -l0, zeta),
    ) else {
        return f64::INFINITY;
    };
    let (phi1, phi2) = (phi1.metric(), phi2.metric());
    let ratios: Vec<f64> = points
        .iter()
        .filter_map(|c| {
            let b = lfpm_eval(&phi2, c).ok()?;
            if b.abs() < TINY {
                return None;
            }
            Some(lfpm_eval(&phi1, c).ok()? / b)
        })
        .filter(|r| r.is_finite())
        .collect();
    mean_std(&ratios).map_or(f64::INFINITY, |(_, s)| s)
}

/// Returns the `p11` whose upper and lower solutions are closest to constant multiples.
///
/// Ties keep the smaller `p11`.
pub fn grid_search_ratio(
    model: &dyn PopulationModel,
    upper: &SearchResult,
    lower: &SearchResult,
    k: usize,
    delta: f64,
) -> Result<GridResult> {
    let plane = |r: &SearchResult| (r.hyperplane.slope.components(), r.hyperplane.offset);
    grid_search_planes(model, plane(upper), plane(lower), k, delta)
}

/// [`grid_search_ratio`] on raw `(normal, offset)` planes.
pub fn grid_search_planes(
    model: &dyn PopulationModel,
    upper: ([f64; 2], f64),
    lower: ([f64; 2], f64),
    k: usize,
    delta: f64,
) -> Result<GridResult> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "k must be even and at least 2, got {k}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step must lie in (0, 1], got {delta}"
        )));
    }
    let points = ratio_points(model, k)?;
    let zeta = model.zeta();
    let mut best: Option<GridResult> = None;
    for p11 in p11_candidates(delta) {
        let sigma = candidate_sigma(p11, upper, lower, zeta, &points);
        if !sigma.is_finite() {
            continue;
        }
        if best.is_none_or(|b| sigma < b.sigma_opt) {
            best = Some(GridResult {
                p11_opt: p11,
                sigma_opt: sigma,
            });
        }
    }
    best.ok_or(Error::NoValidPoints)
}
