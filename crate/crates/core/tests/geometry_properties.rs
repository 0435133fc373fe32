use std::f64::consts::{FRAC_PI_2, PI};

use metric_elicit_core::geometry::{
    boundary_grid, boundary_point, complement_confusion, Boundary, ConfusionPoint,
};
use metric_elicit_core::metrics::{lfpm_validate, LinearFractionalMetric, Metric};
use metric_elicit_core::model::{PopulationModel, QuadratureModel, SyntheticLogistic};
use proptest::prelude::*;

const NOISE: [f64; 3] = [0.5, 5.0, 50.0];

fn logistic(a: f64) -> SyntheticLogistic {
    SyntheticLogistic::new(a).unwrap()
}

fn theta_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

#[test]
fn boundary_points_stay_in_the_rectangle() {
    for a in NOISE {
        let model = logistic(a);
        for boundary in [Boundary::Upper, Boundary::Lower] {
            for (theta, c) in boundary_grid(&model, boundary, 1000).unwrap() {
                assert!(c.is_within(model.zeta(), 0.0), "a={a} θ={theta}: {c:?}");
            }
        }
    }
}

#[test]
fn boundary_is_monotone_in_angle() {
    for a in NOISE {
        let model = logistic(a);
        let pts = boundary_grid(&model, Boundary::Upper, 1000).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].1.tp <= w[0].1.tp, "a={a}: tp rises at θ={}", w[1].0);
            assert!(w[1].1.tn >= w[0].1.tn, "a={a}: tn falls at θ={}", w[1].0);
        }
    }
}

#[test]
fn supporting_point_is_optimal_against_the_grid() {
    for a in NOISE {
        let model = logistic(a);
        let grid = boundary_grid(&model, Boundary::Upper, 1000).unwrap();
        for theta in theta_grid(0.0, FRAC_PI_2, 37) {
            let (m11, m00) = (theta.cos(), theta.sin());
            let best = boundary_point(&model, theta).unwrap().dot(m11, m00);
            for (_, c) in &grid {
                assert!(best >= c.dot(m11, m00) - 1e-6, "a={a} θ={theta}");
            }
        }
    }
}

/// Positions of strict local maxima after collapsing equal neighbours,
/// with the length of each maximal run.
fn local_maxima(values: &[f64]) -> Vec<(usize, usize)> {
    let mut runs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some((last, _, len)) if *last == v => *len += 1,
            _ => runs.push((v, i, 1)),
        }
    }
    (0..runs.len())
        .filter(|&r| {
            let v = runs[r].0;
            let left = r == 0 || runs[r - 1].0 < v;
            let right = r + 1 == runs.len() || runs[r + 1].0 < v;
            left && right
        })
        .map(|r| (runs[r].1, runs[r].2))
        .collect()
}

fn validated_metrics() -> Vec<LinearFractionalMetric> {
    let all = [
        LinearFractionalMetric::new(1.0, 0.0, 0.0, 0.5, -0.5, 0.5),
        LinearFractionalMetric::new(1.0, 0.0, 0.0, 0.8, -0.8, 0.5),
        LinearFractionalMetric::new(1.0, 0.0, 0.0, 0.0, -1.0, 1.0),
        LinearFractionalMetric::new(0.8, 0.2, 0.0, 0.3, 0.1, 0.3),
        LinearFractionalMetric::new(0.6, 0.4, 0.0, 0.4, 0.2, 0.2),
        LinearFractionalMetric::new(0.4, 0.6, 0.0, -0.1, -0.2, 0.65),
        LinearFractionalMetric::new(0.2, 0.8, 0.0, -0.4, -0.2, 0.8),
    ];
    for m in &all {
        assert!(lfpm_validate(m, 0.5).is_valid(), "{m:?}");
    }
    all.to_vec()
}

fn boundary_values(model: &dyn PopulationModel, metric: &Metric, n: usize) -> Vec<f64> {
    boundary_grid(model, Boundary::Upper, n)
        .unwrap()
        .into_iter()
        .map(|(_, c)| metric.eval(&c).unwrap_or(0.0))
        .collect()
}

#[test]
fn validated_lfpms_are_unimodal_on_the_upper_boundary() {
    let model = logistic(5.0);
    for m in validated_metrics() {
        let values = boundary_values(&model, &Metric::Lfpm(m), 500);
        let maxima = local_maxima(&values);
        assert_eq!(maxima.len(), 1, "{m:?}: maxima {maxima:?}");
        assert!(maxima[0].1 <= 3, "{m:?}: plateau {maxima:?}");
    }
}

#[test]
fn validated_lfpms_have_one_local_maximum_for_every_noise_level() {
    // At a = 0.5 a wide band of angles clamps to a vertex, so the maximum
    // may be a long plateau; it must still be the only one.
    for a in NOISE {
        let model = logistic(a);
        for m in validated_metrics() {
            let values = boundary_values(&model, &Metric::Lfpm(m), 500);
            assert_eq!(local_maxima(&values).len(), 1, "a={a} {m:?}");
        }
    }
}

#[test]
fn validated_lfpms_are_bounded_on_the_boundary() {
    for a in NOISE {
        let model = logistic(a);
        for m in validated_metrics() {
            for v in boundary_values(&model, &Metric::Lfpm(m), 500) {
                assert!((-1e-12..=1.0 + 1e-12).contains(&v), "a={a} {m:?}: {v}");
            }
        }
    }
}

#[test]
fn local_maxima_collapse_plateaus() {
    assert_eq!(local_maxima(&[0.0, 1.0, 1.0, 0.5]), vec![(1, 2)]);
    assert_eq!(local_maxima(&[0.0, 1.0, 0.0, 1.0]).len(), 2);
    assert_eq!(local_maxima(&[2.0, 2.0, 1.0]), vec![(0, 2)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lower_boundary_is_the_complement(a_idx in 0usize..3, theta in 0.0..=FRAC_PI_2) {
        let model = logistic(NOISE[a_idx]);
        let up = boundary_point(&model, theta).unwrap();
        let lo = boundary_point(&model, theta + PI).unwrap();
        let flipped = complement_confusion(&up, model.zeta());
        prop_assert!(lo.max_abs_diff(&flipped) <= 1e-6, "{:?} vs {:?}", lo, flipped);
    }

    #[test]
    fn random_slopes_are_supported(a_idx in 0usize..3, theta in 0.0..=FRAC_PI_2, other in 0.0..=FRAC_PI_2) {
        let model = logistic(NOISE[a_idx]);
        let (m11, m00) = (theta.cos(), theta.sin());
        let best = boundary_point(&model, theta).unwrap().dot(m11, m00);
        let c = boundary_point(&model, other).unwrap();
        prop_assert!(best >= c.dot(m11, m00) - 1e-6);
    }

    #[test]
    fn angles_outside_both_arcs_are_rejected(theta in (FRAC_PI_2 + 1e-6)..(PI - 1e-6)) {
        let model = logistic(5.0);
        prop_assert!(boundary_point(&model, theta).is_err());
    }

    #[test]
    fn confusion_masses_are_consistent(a_idx in 0usize..3, theta in 0.0..=FRAC_PI_2) {
        let model = logistic(NOISE[a_idx]);
        for t in [theta, theta + PI] {
            let c: ConfusionPoint = boundary_point(&model, t).unwrap();
            let z = model.zeta();
            for cell in [c.tp, c.tn, c.fp(z), c.fn_mass(z)] {
                prop_assert!((-1e-15..=1.0).contains(&cell));
            }
        }
    }
}

#[test]
fn closed_form_matches_quadrature() {
    use rand::Rng;
    let mut rng = metric_elicit_core::rng::seeded_rng(2024);
    for a in NOISE {
        let closed = logistic(a);
        let quad = QuadratureModel::logistic(a).unwrap();
        for _ in 0..100 {
            let upper: bool = rng.random_bool(0.5);
            let base = if upper { 0.0 } else { PI };
            let theta = base + rng.random_range(0.0..=FRAC_PI_2);
            let c = boundary_point(&closed, theta).unwrap();
            let q = boundary_point(&quad, theta).unwrap();
            assert!(c.max_abs_diff(&q) <= 1e-7, "a={a} θ={theta}: {c:?} vs {q:?}");
        }
    }
}

