//! The eight evaluation indices and the scalar credibility score.
//!
//! Each index is a closed-form function of the internal features, clamped to
//! [0, 1]. Degenerate denominators follow the limiting behaviour of each
//! formula (see the individual helpers). The credibility value is the
//! weighted sum of the indices scaled to [0, 100].

use crate::ahp::WeightVector;
use crate::features::FeatureVector;
use serde::{Deserialize, Serialize};

/// Number of evaluation indices.
pub const INDEX_COUNT: usize = 8;

/// Display names of the indices, in order.
pub const INDEX_NAMES: [&str; INDEX_COUNT] = [
    "completeness",
    "accuracy",
    "independence",
    "uncertainty",
    "robustness",
    "historical_use",
    "reliability",
    "reproducibility",
];

/// The eight evaluation indices, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexVector {
    pub completeness: f64,
    pub accuracy: f64,
    pub independence: f64,
    pub uncertainty: f64,
    pub robustness: f64,
    pub historical_use: f64,
    pub reliability: f64,
    pub reproducibility: f64,
}

impl IndexVector {
    pub fn to_array(&self) -> [f64; INDEX_COUNT] {
        [
            self.completeness,
            self.accuracy,
            self.independence,
            self.uncertainty,
            self.robustness,
            self.historical_use,
            self.reliability,
            self.reproducibility,
        ]
    }

    pub fn from_array(a: [f64; INDEX_COUNT]) -> Self {
        IndexVector {
            completeness: a[0],
            accuracy: a[1],
            independence: a[2],
            uncertainty: a[3],
            robustness: a[4],
            historical_use: a[5],
            reliability: a[6],
            reproducibility: a[7],
        }
    }

    /// The 0-100 presentation scale, rounded to integers.
    pub fn on_hundred_scale(&self) -> [i64; INDEX_COUNT] {
        self.to_array().map(|x| (x * 100.0).round() as i64)
    }
}

/// Credibility score on [0, 100].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Credibility(pub f64);

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Ratio with the convention 0/0 = 0 (numerator zero dominates) and
/// x/0 = +inf handled by the caller's exponential limit.
fn ratio_or_zero(numerator: f64, denominator: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else if denominator == 0.0 {
        f64::INFINITY
    } else {
        numerator / denominator
    }
}

/// `exp(-numerator/denominator)` with the limiting conventions: 1 when the
/// numerator is 0 (regardless of denominator), 0 when the denominator is 0
/// with a positive numerator.
fn exp_neg_ratio(numerator: f64, denominator: f64) -> f64 {
    let r = ratio_or_zero(numerator, denominator);
    if r.is_infinite() {
        0.0
    } else {
        (-r).exp()
    }
}

/// Evaluates the eight index equations on a feature vector.
///
/// The equations are evaluated as defined on whatever values the
/// feature vector carries; callers that want range enforcement clamp the
/// features first (the extractor already does).
pub fn compute_indices(f: &FeatureVector) -> IndexVector {
    // Completeness: integrity of configuration times interface matching.
    let completeness = f.p_integrity * f.p_match;

    // Accuracy: interface matching discounted by relative time deviation
    // scaled by the run-time variance. The inner term can leave [0, 1];
    // the final clamp handles it.
    let time_dev = if f.t_hat == 0.0 {
        0.0
    } else {
        (f.t_bar - f.t_hat).abs() / f.t_hat
    };
    let accuracy = f.p_match * (1.0 - time_dev * f.v_t);

    // Independence: share of coordination nodes times the share of
    // externally driven incentive parameters.
    let coordination = {
        let num = f.n_logic + f.n_stimulate;
        let den = f.n_logic + f.n_active + f.n_stimulate;
        let r = ratio_or_zero(num, den);
        if r.is_infinite() {
            0.0
        } else {
            r
        }
    };
    let external_share = {
        let r = ratio_or_zero(f.n_ex_para, f.n_para);
        if r.is_infinite() {
            0.0
        } else {
            r
        }
    };
    let independence = 1.0 - coordination * external_share;

    // Uncertainty: configured, successful workflows with few external
    // drivers relative to their overall size.
    let uncertainty = f.p_integrity
        * f.p_s
        * exp_neg_ratio(f.n_stimulate + f.n_ex_para, f.n_active + f.n_logic + f.n_para);

    // Robustness: fewer linked models per active node is more robust.
    let robustness = exp_neg_ratio(f.n_model, f.n_active);

    // Historical use: consistent, successful history; approaches its cap as
    // the run count grows, 0 with no history at all.
    let historical_use = if f.n_history <= 0.0 {
        0.0
    } else {
        f.p_hist_cons * f.p_s * (-1.0 / f.n_history).exp()
    };

    // Reliability: node failure rate and overtime pressure.
    let reliability =
        (1.0 - f.p_f) * exp_neg_ratio(f.n_model * f.n_o, f.n_active * f.n_active);

    // Reproducibility: product of the stability fractions.
    let reproducibility = f.p_hist_cons * f.p_integrity * f.p_s * (1.0 - f.p_f);

    IndexVector {
        completeness: clamp01(completeness),
        accuracy: clamp01(accuracy),
        independence: clamp01(independence),
        uncertainty: clamp01(uncertainty),
        robustness: clamp01(robustness),
        historical_use: clamp01(historical_use),
        reliability: clamp01(reliability),
        reproducibility: clamp01(reproducibility),
    }
}

/// Credibility score: `100 * sum(w_i * x_i)`.
///
/// With weights summing to 1 and indices in [0, 1] the result lies in
/// [0, 100] with no further clamping.
pub fn credibility(indices: &IndexVector, weights: &WeightVector) -> Credibility {
    debug_assert_eq!(weights.len(), INDEX_COUNT);
    let x = indices.to_array();
    let score: f64 = weights
        .weights
        .iter()
        .zip(x.iter())
        .map(|(w, xi)| w * xi)
        .sum();
    Credibility(100.0 * score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn reference_sample_reproduces_the_matching_scores() {
        let f = fixtures::reference_feature_sample();
        let x = compute_indices(&f);
        let expected = fixtures::REFERENCE_INDEX_SCORES;
        // Five of the eight reference scores follow from the equations.
        assert!((x.completeness - expected[0]).abs() < 5e-4);
        assert!((x.independence - expected[2]).abs() < 5e-4);
        assert!((x.robustness - expected[4]).abs() < 5e-4);
        assert!((x.historical_use - expected[5]).abs() < 5e-4);
        assert!((x.reliability - expected[6]).abs() < 5e-4);
    }

    #[test]
    fn reference_sample_documented_divergences() {
        // The closed forms do not reproduce the reference accuracy,
        // uncertainty and reproducibility scores; the divergent values are
        // locked in here so drift is caught either way.
        let f = fixtures::reference_feature_sample();
        let x = compute_indices(&f);
        assert!((x.accuracy - 0.9788).abs() < 5e-4, "accuracy {}", x.accuracy);
        assert!((x.uncertainty - 0.7237).abs() < 5e-4);
        assert!((x.reproducibility - 0.8365).abs() < 5e-4);
        // ... and they are far from the recorded reference scores.
        assert!((x.accuracy - 0.8847).abs() > 0.05);
        assert!((x.uncertainty - 0.8007).abs() > 0.05);
        assert!((x.reproducibility - 0.9254).abs() > 0.05);
    }

    #[test]
    fn perfect_features_give_unit_indices() {
        let f = FeatureVector {
            p_match: 1.0,
            p_integrity: 1.0,
            t_hat: 100.0,
            t_bar: 100.0,
            v_t: 0.0,
            n_o: 0.0,
            n_active: 20.0,
            n_logic: 4.0,
            n_history: 200.0,
            p_hist_cons: 1.0,
            n_stimulate: 0.0,
            n_para: 10.0,
            n_ex_para: 0.0,
            p_f: 0.0,
            p_s: 1.0,
            n_model: 0.0,
        };
        let x = compute_indices(&f);
        assert_eq!(x.completeness, 1.0);
        assert_eq!(x.accuracy, 1.0);
        assert_eq!(x.independence, 1.0);
        assert_eq!(x.uncertainty, 1.0);
        assert_eq!(x.robustness, 1.0);
        assert_eq!(x.reliability, 1.0);
        assert_eq!(x.reproducibility, 1.0);
        // Historical use approaches 1 but never reaches it for finite runs.
        assert!(x.historical_use < 1.0 && x.historical_use > 0.99);
    }

    #[test]
    fn degenerate_denominators_follow_limits() {
        let mut f = fixtures::reference_feature_sample();
        f.n_para = 0.0;
        f.n_ex_para = 0.0;
        let x = compute_indices(&f);
        assert!(x.independence == 1.0, "zero incentive params: external share 0");

        let empty = FeatureVector {
            p_match: 1.0,
            p_integrity: 1.0,
            t_hat: 30.0,
            t_bar: 30.0,
            v_t: 0.0,
            n_o: 0.0,
            n_active: 0.0,
            n_logic: 0.0,
            n_history: 0.0,
            p_hist_cons: 0.0,
            n_stimulate: 0.0,
            n_para: 0.0,
            n_ex_para: 0.0,
            p_f: 0.0,
            p_s: 0.0,
            n_model: 0.0,
        };
        let x = compute_indices(&empty);
        assert_eq!(x.completeness, 1.0);
        assert_eq!(x.accuracy, 1.0);
        assert_eq!(x.independence, 1.0);
        assert_eq!(x.uncertainty, 0.0); // p_s = 0
        assert_eq!(x.robustness, 1.0); // no models at all
        assert_eq!(x.historical_use, 0.0); // no history
        assert_eq!(x.reliability, 1.0); // no failures, no overtime
        assert_eq!(x.reproducibility, 0.0);

        // Models but no active nodes: the exponential limit collapses to 0.
        let mut degenerate = empty;
        degenerate.n_model = 3.0;
        let x = compute_indices(&degenerate);
        assert_eq!(x.robustness, 0.0);
    }

    #[test]
    fn accuracy_clamps_to_zero_when_inner_term_is_negative() {
        let mut f = fixtures::reference_feature_sample();
        // Large deviation times large variance drives the inner term negative.
        f.t_hat = 30.0;
        f.t_bar = 150.0;
        f.v_t = 3.0;
        let x = compute_indices(&f);
        assert_eq!(x.accuracy, 0.0);
    }

    #[test]
    fn credibility_of_reference_scores_matches_recorded_value() {
        let x = IndexVector::from_array(fixtures::REFERENCE_INDEX_SCORES);
        let w = fixtures::reference_weights();
        let e = credibility(&x, &w);
        assert!((e.0 - 90.25).abs() < 0.05, "E = {}", e.0);
    }

    #[test]
    fn credibility_extremes() {
        let w = fixtures::reference_weights();
        let ones = IndexVector::from_array([1.0; 8]);
        let zeros = IndexVector::from_array([0.0; 8]);
        assert!((credibility(&ones, &w).0 - 100.0).abs() < 1e-9);
        assert_eq!(credibility(&zeros, &w).0, 0.0);
    }

    #[test]
    fn credibility_is_linear_in_each_index() {
        let w = fixtures::reference_weights();
        let base = IndexVector::from_array([0.5; 8]);
        let e0 = credibility(&base, &w).0;
        for i in 0..INDEX_COUNT {
            let mut bumped = base.to_array();
            bumped[i] += 0.25;
            let e1 = credibility(&IndexVector::from_array(bumped), &w).0;
            assert!(
                (e1 - e0 - 100.0 * w.weights[i] * 0.25).abs() < 1e-9,
                "index {i}"
            );
        }
    }

    #[test]
    fn raising_integrity_never_decreases_the_score() {
        // Monotonicity spot-check by random perturbation pairs.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let w = fixtures::reference_weights();
        for _ in 0..200 {
            let mut f = fixtures::reference_feature_sample();
            f.p_integrity = rng.random_range(0.0..1.0);
            f.p_s = rng.random_range(0.0..1.0);
            f.p_hist_cons = rng.random_range(0.0..1.0);
            f.p_f = rng.random_range(0.0..1.0);
            let lower = f;
            let mut higher = f;
            higher.p_integrity = rng.random_range(lower.p_integrity..=1.0);
            let e_lower = credibility(&compute_indices(&lower), &w).0;
            let e_higher = credibility(&compute_indices(&higher), &w).0;
            assert!(e_higher >= e_lower - 1e-12);
        }
    }
}
