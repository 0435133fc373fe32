use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{ConfusionPoint, ThresholdClassifier};
use crate::model::PopulationModel;
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH, DEFAULT_TOLERANCE};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Subintervals scanned for sign changes of `η − δ`.
const CROSSING_SCAN: usize = 512;

/// A scalar feature on `[lo, hi]` with density `f_X` and continuous `η`.
///
/// Confusion points are integrated numerically. The set where the classifier
/// predicts positive is split at the crossings of `η = δ`, so every
/// integration piece is smooth. Crossings are located by scanning a uniform
/// grid, so `η − δ` must not change sign twice within one scan cell.
#[derive(Clone)]
pub struct QuadratureModel {
    eta: ScalarFn,
    density: ScalarFn,
    lo: f64,
    hi: f64,
    zeta: f64,
    tolerance: f64,
    max_depth: usize,
}

impl fmt::Debug for QuadratureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadratureModel")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("zeta", &self.zeta)
            .field("tolerance", &self.tolerance)
            .finish_non_exhaustive()
    }
}

impl QuadratureModel {
    pub fn new<E, D>(eta: E, density: D, lo: f64, hi: f64) -> Result<Self>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "empty support [{lo}, {hi}]"
            )));
        }
        let mut model = Self {
            eta: Arc::new(eta),
            density: Arc::new(density),
            lo,
            hi,
            zeta: f64::NAN,
            tolerance: DEFAULT_TOLERANCE,
            max_depth: DEFAULT_MAX_DEPTH,
        };
        let eta = Arc::clone(&model.eta);
        let density = Arc::clone(&model.density);
        let zeta = model.integrate(&move |x| eta(x) * density(x), lo, hi)?;
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "base rate must lie in (0, 1), got {zeta}"
            )));
        }
        model.zeta = zeta;
        Ok(model)
    }

    /// The synthetic logistic law, integrated numerically instead of in closed form.
    pub fn logistic(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "logistic noise parameter must be positive, got {a}"
            )));
        }
        Self::new(move |x| 1.0 / (1.0 + (a * x).exp()), |_| 0.5, -1.0, 1.0)
    }

    pub fn with_tolerance(mut self, tolerance: f64, max_depth: usize) -> Self {
        self.tolerance = tolerance;
        self.max_depth = max_depth;
        self
    }

    fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        adaptive_simpson(f, a, b, self.tolerance, self.max_depth)
    }

    /// Sorted split points `lo = x₀ < … < x_k = hi` at the crossings of `η = δ`.
    fn pieces(&self, delta: f64) -> Vec<f64> {
        let gap = |x: f64| (self.eta)(x) - delta;
        let step = (self.hi - self.lo) / CROSSING_SCAN as f64;
        let mut cuts = vec![self.lo];
        let mut left = self.lo;
        let mut g_left = gap(left);
        for i in 1..=CROSSING_SCAN {
            let right = if i == CROSSING_SCAN {
                self.hi
            } else {
                self.lo + i as f64 * step
            };
            let g_right = gap(right);
            if (g_left < 0.0) != (g_right < 0.0) {
                cuts.push(bisect(&gap, left, right, g_left));
            }
            left = right;
            g_left = g_right;
        }
        cuts.push(self.hi);
        cuts.dedup();
        cuts
    }
}

fn bisect(gap: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, g_a: f64) -> f64 {
    let negative_at_a = g_a < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (gap(m) < 0.0) == negative_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

impl PopulationModel for QuadratureModel {
    fn zeta(&self) -> f64 {
        self.zeta
    }

    fn confusion(&self, clf: &ThresholdClassifier) -> Result<ConfusionPoint> {
        let cuts = self.pieces(clf.delta);
        let eta = &self.eta;
        let density = &self.density;
        let mut tp = 0.0;
        let mut tn = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            if clf.predicts_positive(eta(0.5 * (a + b))) {
                tp += self.integrate(&|x| eta(x) * density(x), a, b)?;
            } else {
                tn += self.integrate(&|x| (1.0 - eta(x)) * density(x), a, b)?;
            }
        }
        Ok(ConfusionPoint::new(tp, tn))
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::geometry::Orientation;

    #[test]
    fn logistic_base_rate_is_half() {
        for a in [0.5, 5.0, 50.0] {
            let model = QuadratureModel::logistic(a).unwrap();
            assert_abs_diff_eq!(model.zeta(), 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn non_monotone_eta_splits_into_pieces() {
        // η(x) = x² on [−1, 1], uniform density: ζ = 1/3.
        let model = QuadratureModel::new(|x| x * x, |_| 0.5, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(model.zeta(), 1.0 / 3.0, epsilon = 1e-9);
        // Predict 1 iff x² ≥ 1/4, i.e. |x| ≥ 1/2.
        let c = model
            .confusion(&ThresholdClassifier::new(0.25, Orientation::Upper))
            .unwrap();
        // TP = 2 · ½∫_{1/2}^{1} x² dx = 7/24; TN = 2 · ½∫_0^{1/2} (1 − x²) dx = 11/24.
        assert_abs_diff_eq!(c.tp, 7.0 / 24.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.tn, 11.0 / 24.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_degenerate_laws() {
        assert!(QuadratureModel::new(|_| 0.0, |_| 0.5, -1.0, 1.0).is_err());
        assert!(QuadratureModel::new(|_| 0.5, |_| 0.5, 1.0, 1.0).is_err());
    }
}
