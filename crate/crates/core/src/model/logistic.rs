use crate::error::{Error, Result};
use crate::geometry::{ConfusionPoint, Orientation, ThresholdClassifier};
use crate::model::PopulationModel;

/// `X ~ U[−1, 1]` with `η(x) = 1 / (1 + e^{a x})`.
///
/// The base rate is exactly 1/2 for every `a`. Confusion points are computed
/// from the antiderivatives of `η` and `1 − η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticLogistic {
    a: f64,
}

impl SyntheticLogistic {
    pub const ZETA: f64 = 0.5;

    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "logistic noise parameter must be positive, got {a}"
            )));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eta(&self, x: f64) -> f64 {
        1.0 / (1.0 + (self.a * x).exp())
    }

    /// `∫ η` : `x − ln(1 + e^{ax}) / a`.
    fn eta_antiderivative(&self, x: f64) -> f64 {
        x - softplus(self.a * x) / self.a
    }

    /// `∫ (1 − η)` : `ln(1 + e^{ax}) / a`.
    fn complement_antiderivative(&self, x: f64) -> f64 {
        softplus(self.a * x) / self.a
    }

    /// Crossover `x'` with `η(x') = δ`, projected onto `[−1, 1]`.
    fn crossover(&self, delta: f64) -> f64 {
        ((1.0 - delta).ln() - delta.ln()) / self.a
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl PopulationModel for SyntheticLogistic {
    fn zeta(&self) -> f64 {
        Self::ZETA
    }

    fn confusion(&self, clf: &ThresholdClassifier) -> Result<ConfusionPoint> {
        let zeta = Self::ZETA;
        let everything = ConfusionPoint::new(zeta, 0.0);
        let nothing = ConfusionPoint::new(0.0, 1.0 - zeta);
        // 0 < η < 1 on the whole support, so δ at or past the ends gives a
        // trivial classifier.
        match clf.orientation {
            Orientation::Upper if clf.delta <= 0.0 => return Ok(everything),
            Orientation::Upper if clf.delta >= 1.0 => return Ok(nothing),
            Orientation::Lower if clf.delta <= 0.0 => return Ok(nothing),
            Orientation::Lower if clf.delta >= 1.0 => return Ok(everything),
            _ => {}
        }
        let x = self.crossover(clf.delta).clamp(-1.0, 1.0);
        let density = 0.5;
        let (tp, tn) = match clf.orientation {
            // η decreasing: η ≥ δ on [−1, x'].
            Orientation::Upper => (
                self.eta_antiderivative(x) - self.eta_antiderivative(-1.0),
                self.complement_antiderivative(1.0) - self.complement_antiderivative(x),
            ),
            Orientation::Lower => (
                self.eta_antiderivative(1.0) - self.eta_antiderivative(x),
                self.complement_antiderivative(x) - self.complement_antiderivative(-1.0),
            ),
        };
        Ok(ConfusionPoint::new(density * tp, density * tn))
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn half_threshold_point() {
        // x' = 0: TP = (1 − ln 2 / 5 + ln(1 + e^{−5}) / 5) / 2.
        let model = SyntheticLogistic::new(5.0).unwrap();
        let expected = 0.5 * (1.0 - 2f64.ln() / 5.0 + (-5f64).exp().ln_1p() / 5.0);
        let c = model
            .confusion(&ThresholdClassifier::new(0.5, Orientation::Upper))
            .unwrap();
        assert_abs_diff_eq!(c.tp, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(c.tp, 0.431357, epsilon = 1e-6);
        assert_abs_diff_eq!(c.tn, 0.431357, epsilon = 1e-6);
    }

    #[test]
    fn trivial_thresholds_hit_vertices() {
        let model = SyntheticLogistic::new(5.0).unwrap();
        let all = model
            .confusion(&ThresholdClassifier::new(0.0, Orientation::Upper))
            .unwrap();
        assert_eq!(all, ConfusionPoint::new(0.5, 0.0));
        let none = model
            .confusion(&ThresholdClassifier::new(1.0, Orientation::Upper))
            .unwrap();
        assert_eq!(none, ConfusionPoint::new(0.0, 0.5));
    }

    #[test]
    fn orientations_are_complements() {
        let model = SyntheticLogistic::new(2.0).unwrap();
        for delta in [0.05, 0.3, 0.5, 0.77, 0.99] {
            let up = model
                .confusion(&ThresholdClassifier::new(delta, Orientation::Upper))
                .unwrap();
            let low = model
                .confusion(&ThresholdClassifier::new(delta, Orientation::Lower))
                .unwrap();
            assert_abs_diff_eq!(up.tp + low.tp, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(up.tn + low.tn, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn steep_model_is_stable() {
        let model = SyntheticLogistic::new(500.0).unwrap();
        let c = model
            .confusion(&ThresholdClassifier::new(0.5, Orientation::Upper))
            .unwrap();
        assert!(c.tp.is_finite() && c.tn.is_finite());
        assert_abs_diff_eq!(c.tp, 0.5, epsilon = 1e-2);
    }

    #[test]
    fn rejects_nonpositive_a() {
        assert!(SyntheticLogistic::new(0.0).is_err());
        assert!(SyntheticLogistic::new(-1.0).is_err());
        assert!(SyntheticLogistic::new(f64::NAN).is_err());
    }
}
