//! Geometry of the feasible confusion set.
//!
//! A binary confusion matrix is reduced to the pair `(tp, tn)`; the false
//! cells follow from the base rate `zeta`. Every linear trade-off
//! `(cos θ, sin θ)` has a unique Bayes-optimal threshold classifier whose
//! confusion point is where the supporting line with that normal touches
//! the (strictly convex) feasible set.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PopulationModel;

/// Slack allowed when checking that an angle sits inside a boundary interval.
const ANGLE_SLACK: f64 = 1e-12;

/// Sums of trade-off weights below this are treated as degenerate.
const DEGENERATE_SUM: f64 = 1e-12;

/// A point `(TP, TN)` of the reduced confusion space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionPoint {
    pub tp: f64,
    pub tn: f64,
}

impl ConfusionPoint {
    pub const fn new(tp: f64, tn: f64) -> Self {
        Self { tp, tn }
    }

    /// False-positive mass `1 − ζ − TN`.
    pub fn fp(&self, zeta: f64) -> f64 {
        1.0 - zeta - self.tn
    }

    /// False-negative mass `ζ − TP`.
    pub fn fn_mass(&self, zeta: f64) -> f64 {
        zeta - self.tp
    }

    /// Whether the point lies in the rectangle `[0, ζ] × [0, 1 − ζ]`.
    pub fn is_within(&self, zeta: f64, tol: f64) -> bool {
        self.tp >= -tol && self.tp <= zeta + tol && self.tn >= -tol && self.tn <= 1.0 - zeta + tol
    }

    pub fn dot(&self, m11: f64, m00: f64) -> f64 {
        m11 * self.tp + m00 * self.tn
    }

    pub fn max_abs_diff(&self, other: &ConfusionPoint) -> f64 {
        (self.tp - other.tp).abs().max((self.tn - other.tn).abs())
    }
}

/// Which side of the conditional probability a threshold classifier predicts positive on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Predict 1 iff `η ≥ δ`; sweeps the upper boundary.
    Upper,
    /// Predict 1 iff `η < δ`; sweeps the lower boundary.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClassifier {
    pub delta: f64,
    pub orientation: Orientation,
}

impl ThresholdClassifier {
    pub const fn new(delta: f64, orientation: Orientation) -> Self {
        Self { delta, orientation }
    }

    /// Positive prediction for a conditional probability (or score) `eta`.
    ///
    /// Ties at the threshold go positive for [`Orientation::Upper`] and
    /// negative for [`Orientation::Lower`], so the two orientations at the
    /// same threshold are exact complements.
    pub fn predicts_positive(&self, eta: f64) -> bool {
        match self.orientation {
            Orientation::Upper => eta >= self.delta,
            Orientation::Lower => eta < self.delta,
        }
    }

    /// The complementary classifier `1 − h`.
    pub fn complement(&self) -> Self {
        let orientation = match self.orientation {
            Orientation::Upper => Orientation::Lower,
            Orientation::Lower => Orientation::Upper,
        };
        Self::new(self.delta, orientation)
    }
}

/// A unit trade-off vector `(m11, m00) = (cos θ, sin θ)`.
///
/// The angle is authoritative; the components are always re-derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    theta: f64,
    m11: f64,
    m00: f64,
}

impl Slope {
    pub fn from_angle(theta: f64) -> Self {
        // θ and θ + π must give bitwise opposite components, otherwise the
        // lower arc is not the exact reflection of the upper one. Near the
        // vertices the Bayes cut is sensitive to the last ulp of the ratio.
        let (m00, m11) = if (PI..2.0 * PI).contains(&theta) {
            let (s, c) = (theta - PI).sin_cos();
            (-s, -c)
        } else {
            theta.sin_cos()
        };
        Self { theta, m11, m00 }
    }

    /// Normalizes `(m11, m00)` and maps its direction to `θ ∈ [0, 2π)`.
    pub fn from_components(m11: f64, m00: f64) -> Result<Self> {
        if m11.hypot(m00) == 0.0 || !m11.is_finite() || !m00.is_finite() {
            return Err(Error::ZeroSlope);
        }
        let mut theta = m00.atan2(m11);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        Ok(Self::from_angle(theta))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn m11(&self) -> f64 {
        self.m11
    }

    pub fn m00(&self) -> f64 {
        self.m00
    }

    pub fn components(&self) -> [f64; 2] {
        [self.m11, self.m00]
    }

    pub fn negated(&self) -> Self {
        let theta = (self.theta + PI).rem_euclid(2.0 * PI);
        Self::from_angle(theta)
    }
}

/// The line `m11·tp + m00·tn = offset` touching the feasible set at `tangent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub slope: Slope,
    pub offset: f64,
    pub tangent: ConfusionPoint,
}

/// The two halves of the feasible-set boundary and their angle intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Upper,
    Lower,
}

impl Boundary {
    /// Closed angle interval parametrizing this boundary.
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Boundary::Upper => (0.0, FRAC_PI_2),
            Boundary::Lower => (PI, PI + FRAC_PI_2),
        }
    }

    pub fn of_angle(theta: f64) -> Option<Self> {
        [Boundary::Upper, Boundary::Lower].into_iter().find(|b| {
            let (lo, hi) = b.interval();
            theta >= lo - ANGLE_SLACK && theta <= hi + ANGLE_SLACK
        })
    }
}

/// Bayes-optimal threshold classifier for the linear trade-off `slope`.
///
/// Opposite-sign weights push the raw ratio `m00 / (m11 + m00)` outside
/// `[0, 1]`; it is clamped, which yields the trivial classifiers touching the
/// vertices `(ζ, 0)` or `(0, 1 − ζ)`.
pub fn bayes_threshold(slope: &Slope) -> Result<ThresholdClassifier> {
    let sum = slope.m11() + slope.m00();
    if sum.abs() < DEGENERATE_SUM {
        return Err(Error::DegenerateSlope { sum });
    }
    let delta = (slope.m00() / sum).clamp(0.0, 1.0);
    let orientation = if sum >= 0.0 {
        Orientation::Upper
    } else {
        Orientation::Lower
    };
    Ok(ThresholdClassifier::new(delta, orientation))
}

pub fn confusion_of_classifier(
    model: &dyn PopulationModel,
    clf: &ThresholdClassifier,
) -> Result<ConfusionPoint> {
    model.confusion(clf)
}

/// Bayes confusion point for a boundary angle.
///
/// `theta` must lie in `[0, π/2]` (upper boundary) or `[π, 3π/2]` (lower).
pub fn boundary_point(model: &dyn PopulationModel, theta: f64) -> Result<ConfusionPoint> {
    boundary_probe(model, theta).map(|(_, point)| point)
}

/// Like [`boundary_point`], also returning the generating classifier.
pub fn boundary_probe(
    model: &dyn PopulationModel,
    theta: f64,
) -> Result<(ThresholdClassifier, ConfusionPoint)> {
    if Boundary::of_angle(theta).is_none() {
        return Err(Error::OutOfRange { theta });
    }
    let clf = bayes_threshold(&Slope::from_angle(theta))?;
    let point = model.confusion(&clf)?;
    Ok((clf, point))
}

/// Point of the feasible set maximizing `⟨slope, C⟩`, for any direction.
///
/// Mixed-sign directions are supported at a vertex; same-sign directions go
/// through the Bayes classifier.
pub fn supporting_point(model: &dyn PopulationModel, slope: &Slope) -> Result<ConfusionPoint> {
    let (m11, m00) = (slope.m11(), slope.m00());
    if m11 * m00 < 0.0 {
        let zeta = model.zeta();
        let positive_vertex = ConfusionPoint::new(zeta, 0.0);
        let negative_vertex = ConfusionPoint::new(0.0, 1.0 - zeta);
        return Ok(
            if positive_vertex.dot(m11, m00) >= negative_vertex.dot(m11, m00) {
                positive_vertex
            } else {
                negative_vertex
            },
        );
    }
    model.confusion(&bayes_threshold(slope)?)
}

/// Confusion point of the complementary classifier `1 − h`.
pub fn complement_confusion(c: &ConfusionPoint, zeta: f64) -> ConfusionPoint {
    ConfusionPoint::new(zeta - c.tp, 1.0 - zeta - c.tn)
}

pub fn supporting_hyperplane(slope: &Slope, tangent: &ConfusionPoint) -> Hyperplane {
    Hyperplane {
        slope: *slope,
        offset: tangent.dot(slope.m11(), slope.m00()),
        tangent: *tangent,
    }
}

/// Supporting hyperplanes at `num_angles` angles spaced uniformly over `[0, 2π)`.
pub fn export_space(model: &dyn PopulationModel, num_angles: usize) -> Result<Vec<Hyperplane>> {
    if num_angles < 4 {
        return Err(Error::InvalidParameter(format!(
            "num_angles must be at least 4, got {num_angles}"
        )));
    }
    let step = 2.0 * PI / num_angles as f64;
    (0..num_angles)
        .map(|i| {
            let slope = Slope::from_angle(i as f64 * step);
            let tangent = supporting_point(model, &slope)?;
            Ok(supporting_hyperplane(&slope, &tangent))
        })
        .collect()
}

/// Writes `theta,m11,m00,offset,tp,tn` rows with six decimals.
pub fn write_space_table<W: Write>(planes: &[Hyperplane], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,m11,m00,offset,tp,tn")?;
    for plane in planes {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            plane.slope.theta(),
            plane.slope.m11(),
            plane.slope.m00(),
            plane.offset,
            plane.tangent.tp,
            plane.tangent.tn
        )?;
    }
    Ok(())
}

/// `count` boundary points at angles spaced uniformly over the boundary's
/// closed interval, endpoints included.
pub fn boundary_grid(
    model: &dyn PopulationModel,
    boundary: Boundary,
    count: usize,
) -> Result<Vec<(f64, ConfusionPoint)>> {
    let (lo, hi) = boundary.interval();
    if count < 2 {
        return Err(Error::InvalidParameter(format!(
            "boundary grid needs at least 2 points, got {count}"
        )));
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            let theta = if i + 1 == count { hi } else { lo + i as f64 * step };
            boundary_point(model, theta).map(|c| (theta, c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::model::SyntheticLogistic;

    #[test]
    fn symmetric_slope_thresholds_at_half() {
        let clf = bayes_threshold(&Slope::from_angle(FRAC_PI_4)).unwrap();
        assert_abs_diff_eq!(clf.delta, 0.5, epsilon = 1e-15);
        assert_eq!(clf.orientation, Orientation::Upper);
    }

    #[test]
    fn threshold_from_raw_components() {
        // Raw components, not re-normalized: δ = m00 / (m11 + m00).
        let clf = bayes_threshold(&Slope::from_components(0.98, 0.17).unwrap()).unwrap();
        assert_abs_diff_eq!(clf.delta, 0.17 / 1.15, epsilon = 1e-12);
        assert_abs_diff_eq!(clf.delta, 0.147826, epsilon = 1e-6);
        assert_eq!(clf.orientation, Orientation::Upper);

        let clf = bayes_threshold(&Slope::from_components(-0.94, -0.34).unwrap()).unwrap();
        assert_abs_diff_eq!(clf.delta, 0.265625, epsilon = 1e-12);
        assert_eq!(clf.orientation, Orientation::Lower);
    }

    #[test]
    fn degenerate_sum_is_rejected() {
        let err = bayes_threshold(&Slope::from_angle(3.0 * FRAC_PI_4)).unwrap_err();
        assert!(matches!(err, Error::DegenerateSlope { .. }));
    }

    #[test]
    fn opposite_signs_clamp_to_trivial_classifiers() {
        // m11 < 0 < m00 with positive sum: δ > 1 clamps to 1 (predict nothing).
        let clf = bayes_threshold(&Slope::from_components(-0.2, 0.9).unwrap()).unwrap();
        assert_eq!(clf.delta, 1.0);
        let model = SyntheticLogistic::new(5.0).unwrap();
        let c = model.confusion(&clf).unwrap();
        assert_eq!(c, ConfusionPoint::new(0.0, 0.5));
    }

    #[test]
    fn slope_angle_round_trip() {
        let s = Slope::from_components(-0.5, -0.87).unwrap();
        assert!(s.theta() > PI && s.theta() < 1.5 * PI);
        assert_abs_diff_eq!(s.m11().hypot(s.m00()), 1.0, epsilon = 1e-15);
        let back = Slope::from_angle(s.theta());
        assert_abs_diff_eq!(back.m11(), s.m11(), epsilon = 1e-12);
        assert!(matches!(Slope::from_components(0.0, 0.0), Err(Error::ZeroSlope)));
    }

    #[test]
    fn boundary_point_rejects_off_quadrant_angles() {
        let model = SyntheticLogistic::new(5.0).unwrap();
        for theta in [2.0, 5.0, -0.1, 4.8] {
            assert!(matches!(
                boundary_point(&model, theta),
                Err(Error::OutOfRange { .. })
            ));
        }
    }

    #[test]
    fn complement_examples() {
        let c = complement_confusion(&ConfusionPoint::new(0.431357, 0.431357), 0.5);
        assert_abs_diff_eq!(c.tp, 0.068643, epsilon = 1e-12);
        assert_abs_diff_eq!(c.tn, 0.068643, epsilon = 1e-12);
        assert_eq!(
            complement_confusion(&ConfusionPoint::new(0.5, 0.0), 0.5),
            ConfusionPoint::new(0.0, 0.5)
        );
        assert_eq!(
            complement_confusion(&ConfusionPoint::new(0.25, 0.25), 0.5),
            ConfusionPoint::new(0.25, 0.25)
        );
    }

    #[test]
    fn hyperplane_offsets() {
        let diag = supporting_hyperplane(
            &Slope::from_angle(FRAC_PI_4),
            &ConfusionPoint::new(0.431357, 0.431357),
        );
        assert_abs_diff_eq!(diag.offset, 0.610030, epsilon = 1e-6);
        let tp_only = supporting_hyperplane(&Slope::from_angle(0.0), &ConfusionPoint::new(0.5, 0.0));
        assert_abs_diff_eq!(tp_only.offset, 0.5, epsilon = 1e-15);
        let tn_only =
            supporting_hyperplane(&Slope::from_angle(FRAC_PI_2), &ConfusionPoint::new(0.0, 0.5));
        assert_abs_diff_eq!(tn_only.offset, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn export_space_four_angles() {
        let model = SyntheticLogistic::new(5.0).unwrap();
        let planes = export_space(&model, 4).unwrap();
        assert_eq!(planes.len(), 4);
        assert_abs_diff_eq!(planes[1].slope.theta(), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(planes[1].offset, 0.5, epsilon = 1e-12);
        assert!(export_space(&model, 3).is_err());
    }

    #[test]
    fn export_space_handles_degenerate_angles() {
        // 1000 angles land on 3π/4 and 7π/4 where m11 + m00 = 0.
        let model = SyntheticLogistic::new(50.0).unwrap();
        let planes = export_space(&model, 1000).unwrap();
        assert_eq!(planes.len(), 1000);
        assert!(planes.iter().all(|p| p.tangent.tp <= 0.5 + 1e-12 && p.tangent.tn <= 0.5 + 1e-12));
    }

    #[test]
    fn inseparable_model_hugs_anti_diagonal() {
        let model = SyntheticLogistic::new(0.5).unwrap();
        for plane in export_space(&model, 1000).unwrap() {
            // Euclidean distance to the line tp + tn = 1/2.
            let gap = (plane.tangent.tp + plane.tangent.tn - 0.5).abs() / 2f64.sqrt();
            assert!(gap <= 0.05, "gap {gap} at theta {}", plane.slope.theta());
        }
    }

    #[test]
    fn space_table_format() {
        let model = SyntheticLogistic::new(5.0).unwrap();
        let planes = export_space(&model, 4).unwrap();
        let mut buf = Vec::new();
        write_space_table(&planes, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta,m11,m00,offset,tp,tn"));
        assert_eq!(lines.next(), Some("0.000000,1.000000,0.000000,0.500000,0.500000,0.000000"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn boundary_grid_includes_endpoints() {
        let model = SyntheticLogistic::new(5.0).unwrap();
        let grid = boundary_grid(&model, Boundary::Lower, 5).unwrap();
        assert_eq!(grid.first().unwrap().0, PI);
        assert_eq!(grid.last().unwrap().0, PI + FRAC_PI_2);
        assert_eq!(grid[0].1, ConfusionPoint::new(0.0, 0.5));
        assert_eq!(grid[4].1, ConfusionPoint::new(0.5, 0.0));
    }
}
