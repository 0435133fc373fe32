//! Recovering LFPM coefficients from a supporting hyperplane.
//!
//! At the maximizer of an LFPM `φ = (p·C)/(q·C + q0)` with value `τ`, the
//! supporting line has normal `p − τq` and offset `τ q0`. Fixing `p11` (and
//! `p00 = 1 − p11`) together with the assumed relation between `q0` and the
//! coefficients leaves a linear system with a closed-form solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{lfpm_eval, LinearFractionalMetric};

const SINGULAR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedSystem {
    pub p11: f64,
    pub p00: f64,
    pub q11: f64,
    pub q00: f64,
    pub q0: f64,
    /// Metric value at the tangent point implied by the solution.
    pub tau: f64,
}

impl SolvedSystem {
    pub fn metric(&self) -> LinearFractionalMetric {
        LinearFractionalMetric::new(self.p11, self.p00, 0.0, self.q11, self.q00, self.q0)
    }
}

/// Solves for `(q11, q00, q0)` given `p11`, a hyperplane normal and offset.
///
/// The normal is used as given, without normalization: the solution is exact
/// when `normal = p − τq` and `offset = τ q0` for the canonical metric.
pub fn solve_upper_system(p11: f64, normal: [f64; 2], offset: f64, zeta: f64) -> Result<SolvedSystem> {
    let [m11, m00] = normal;
    let p00 = 1.0 - p11;
    let p_mass = p11 * zeta + p00 * (1.0 - zeta);
    let q_mass = p_mass + offset - m11 * zeta - m00 * (1.0 - zeta);
    if q_mass.abs() < SINGULAR {
        return Err(Error::SingularSystem { q: q_mass });
    }
    let scale = p_mass / q_mass;
    let q0 = offset * scale;
    if q0.abs() < SINGULAR && offset.abs() >= SINGULAR {
        return Err(Error::ZeroQ0 { offset });
    }
    Ok(SolvedSystem {
        p11,
        p00,
        q11: (p11 - m11) * scale,
        q00: (p00 - m00) * scale,
        q0,
        tau: q_mass / p_mass,
    })
}

/// Mean and population standard deviation of `a(C) / b(C)` over `points`,
/// skipping points where `|b| < 1e-12` or either metric is undefined.
pub fn ratio_stats(
    a: &LinearFractionalMetric,
    b: &LinearFractionalMetric,
    points: &[crate::geometry::ConfusionPoint],
) -> Option<(f64, f64)> {
    let ratios: Vec<f64> = points
        .iter()
        .filter_map(|c| {
            let den = lfpm_eval(b, c).ok()?;
            if den.abs() < SINGULAR {
                return None;
            }
            Some(lfpm_eval(a, c).ok()? / den)
        })
        .collect();
    mean_std(&ratios)
}

/// Mean and population standard deviation; `None` for an empty slice.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}
