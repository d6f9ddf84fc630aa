//! Evolving neo-fuzzy neuron: an additive model with one fuzzy partition
//! per input whose membership-function set grows and shrinks online.
//!
//! Each input starts with two complementary membership functions spanning
//! its observed range. Consequent weights adapt by normalized gradient
//! steps. A per-MF error trace compared against smoothed global error
//! statistics triggers insertion of new membership functions where the
//! model is locally biased; membership functions that stay out of the
//! most-active role for too long are removed. Triangular partitions keep
//! the two active degrees summing to exactly 1; the Gaussian variant
//! renormalizes all activations to sum 1.

use super::{normalize_input, Checkpoint, FitReport, LearnError, Regressor, Sample};
use crate::features::FEATURE_COUNT;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MfShape {
    Triangular,
    Gaussian,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnfnConfig {
    pub shape: MfShape,
    /// Exponential smoothing rate of the error statistics.
    pub smoothing: f64,
    /// Granularity bound: no new MF is inserted closer than range/granularity.
    pub granularity: f64,
    /// Steps a membership function may stay out of the most-active role
    /// before removal.
    pub max_age: u64,
    /// Lower bound of the per-MF adaptive learning rate.
    pub rate_floor: f64,
}

impl Default for EnfnConfig {
    fn default() -> Self {
        EnfnConfig {
            shape: MfShape::Triangular,
            smoothing: 0.1,
            granularity: 10.0,
            max_age: 150,
            rate_floor: 0.01,
        }
    }
}

/// The fuzzy partition of one input dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputPartition {
    /// Modal points, strictly increasing, always at least two.
    modal_points: Vec<f64>,
    /// Consequent weight anchored at each modal point.
    weights: Vec<f64>,
    /// Accumulated squared activation per MF (adaptive step denominator).
    activation_acc: Vec<f64>,
    /// Steps since each MF was last the most active one.
    ages: Vec<u64>,
    /// Smoothed absolute error observed while each MF was most active.
    local_error: Vec<f64>,
    x_min: f64,
    x_max: f64,
}

impl InputPartition {
    fn new(lo: f64, hi: f64) -> Self {
        InputPartition {
            modal_points: vec![lo, hi],
            weights: vec![0.0, 0.0],
            activation_acc: vec![1.0, 1.0],
            ages: vec![0, 0],
            local_error: vec![0.0, 0.0],
            x_min: lo,
            x_max: hi,
        }
    }

    pub fn mf_count(&self) -> usize {
        self.modal_points.len()
    }

    pub fn modal_points(&self) -> &[f64] {
        &self.modal_points
    }

    /// Active membership degrees as (index, degree) pairs. Triangular
    /// partitions activate at most two complementary MFs; Gaussian
    /// partitions activate all of them with degrees renormalized to sum 1.
    fn memberships(&self, x: f64, shape: MfShape) -> Vec<(usize, f64)> {
        let b = &self.modal_points;
        let m = b.len();
        match shape {
            MfShape::Triangular => {
                if x <= b[0] {
                    return vec![(0, 1.0)];
                }
                if x >= b[m - 1] {
                    return vec![(m - 1, 1.0)];
                }
                let mut k = 0;
                while k + 1 < m && !(b[k] <= x && x <= b[k + 1]) {
                    k += 1;
                }
                let width = b[k + 1] - b[k];
                if width <= 0.0 {
                    return vec![(k, 1.0)];
                }
                let mu = (b[k + 1] - x) / width;
                vec![(k, mu), (k + 1, 1.0 - mu)]
            }
            MfShape::Gaussian => {
                let spread = |j: usize| -> f64 {
                    let left = if j > 0 { b[j] - b[j - 1] } else { f64::INFINITY };
                    let right = if j + 1 < m { b[j + 1] - b[j] } else { f64::INFINITY };
                    (0.5 * left.min(right)).max(1e-12)
                };
                let raw: Vec<f64> = (0..m)
                    .map(|j| {
                        let s = spread(j);
                        (-(x - b[j]).powi(2) / (2.0 * s * s)).exp()
                    })
                    .collect();
                let total: f64 = raw.iter().sum();
                if total <= 0.0 {
                    // All activations underflowed: fall back to the nearest MF.
                    let nearest = (0..m)
                        .min_by(|&a, &c| {
                            (x - b[a]).abs().partial_cmp(&(x - b[c]).abs()).unwrap()
                        })
                        .unwrap();
                    return vec![(nearest, 1.0)];
                }
                raw.iter().enumerate().map(|(j, r)| (j, r / total)).collect()
            }
        }
    }

    fn sub_output(&self, x: f64, shape: MfShape) -> f64 {
        self.memberships(x, shape)
            .into_iter()
            .map(|(j, mu)| mu * self.weights[j])
            .sum()
    }

    fn insert(&mut self, position: usize, modal: f64, weight: f64, neutral_error: f64) {
        self.modal_points.insert(position, modal);
        self.weights.insert(position, weight);
        self.activation_acc.insert(position, 1.0);
        self.ages.insert(position, 0);
        self.local_error.insert(position, neutral_error);
    }

    fn remove(&mut self, position: usize) {
        self.modal_points.remove(position);
        self.weights.remove(position);
        self.activation_acc.remove(position);
        self.ages.remove(position);
        self.local_error.remove(position);
    }
}

/// Dimension-generic evolving neo-fuzzy system. [`EnfnModel`] wraps it for
/// the 16-feature credibility pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnfnCore {
    config: EnfnConfig,
    inputs: Vec<InputPartition>,
    global_error_mean: f64,
    global_error_var: f64,
    steps: u64,
}

impl EnfnCore {
    /// `bounds` gives the initial (min, max) span of each input.
    pub fn new(config: EnfnConfig, bounds: &[(f64, f64)]) -> Self {
        assert!(!bounds.is_empty());
        EnfnCore {
            config,
            inputs: bounds
                .iter()
                .map(|&(lo, hi)| InputPartition::new(lo, hi))
                .collect(),
            global_error_mean: 0.0,
            global_error_var: 0.0,
            steps: 0,
        }
    }

    pub fn input(&self, i: usize) -> &InputPartition {
        &self.inputs[i]
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    /// Active membership degrees of input `i` at `x`.
    pub fn memberships(&self, i: usize, x: f64) -> Vec<(usize, f64)> {
        self.inputs[i].memberships(x, self.config.shape)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.inputs
            .iter()
            .zip(x.iter())
            .map(|(partition, &xi)| partition.sub_output(xi, self.config.shape))
            .sum()
    }

    /// One online step: predict, adapt consequents, update error statistics,
    /// grow/shrink the partitions. Returns the prediction made before any
    /// update.
    pub fn learn(&mut self, x: &[f64], target: f64) -> f64 {
        assert_eq!(x.len(), self.inputs.len());
        let beta = self.config.smoothing;
        let shape = self.config.shape;
        let n_inputs = self.inputs.len() as f64;

        // Range expansion moves the boundary modal points outward.
        for (partition, &xi) in self.inputs.iter_mut().zip(x.iter()) {
            if xi < partition.x_min {
                partition.x_min = xi;
                partition.modal_points[0] = xi;
            }
            if xi > partition.x_max {
                partition.x_max = xi;
                let last = partition.modal_points.len() - 1;
                partition.modal_points[last] = xi;
            }
        }

        let prediction = self.predict(x);
        let error = prediction - target;
        let abs_error = error.abs();

        self.global_error_mean -= beta * (self.global_error_mean - abs_error);
        self.global_error_var = (1.0 - beta) * self.global_error_var
            + beta * (self.global_error_mean - abs_error).powi(2);
        let insertion_threshold = self.global_error_mean + self.global_error_var;

        for (partition, &xi) in self.inputs.iter_mut().zip(x.iter()) {
            let activations = partition.memberships(xi, shape);

            for &(j, mu) in &activations {
                partition.activation_acc[j] += mu * mu;
                let rate = (1.0 / partition.activation_acc[j]).max(self.config.rate_floor)
                    / n_inputs;
                partition.weights[j] -= rate * error * mu;
            }

            let most_active = activations
                .iter()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .map(|&(j, _)| j)
                .expect("at least one active MF");
            for age in partition.ages.iter_mut() {
                *age += 1;
            }
            partition.ages[most_active] = 0;
            partition.local_error[most_active] -=
                beta * (partition.local_error[most_active] - abs_error);

            let range = partition.x_max - partition.x_min;
            let tau = range / self.config.granularity;
            let m = partition.mf_count();
            let b = &partition.modal_points;

            if partition.local_error[most_active] > insertion_threshold {
                if most_active > 0 && most_active < m - 1 {
                    // Split the interior MF into two at the thirds of its
                    // neighbourhood.
                    let dist = (b[most_active + 1] - b[most_active - 1]) / 3.0;
                    if dist > tau {
                        let n1 = b[most_active - 1] + dist;
                        let n2 = b[most_active - 1] + 2.0 * dist;
                        let w1 = partition.sub_output(n1, shape);
                        let w2 = partition.sub_output(n2, shape);
                        partition.remove(most_active);
                        partition.insert(most_active, n1, w1, self.global_error_mean);
                        partition.insert(most_active + 1, n2, w2, self.global_error_mean);
                        continue;
                    }
                } else if most_active == 0 {
                    let dist = (b[1] - b[0]) / 2.0;
                    if dist > tau {
                        let modal = b[0] + dist;
                        let w = partition.sub_output(modal, shape);
                        partition.insert(1, modal, w, self.global_error_mean);
                        continue;
                    }
                } else {
                    let dist = (b[m - 1] - b[m - 2]) / 2.0;
                    if dist > tau {
                        let modal = b[m - 1] - dist;
                        let w = partition.sub_output(modal, shape);
                        partition.insert(m - 1, modal, w, self.global_error_mean);
                        continue;
                    }
                }
            }

            if partition.mf_count() > 2 {
                let oldest = (0..partition.mf_count())
                    .max_by_key(|&j| partition.ages[j])
                    .unwrap();
                if partition.ages[oldest] > self.config.max_age {
                    partition.remove(oldest);
                }
            }
        }

        self.steps += 1;
        prediction
    }
}

/// The feature-to-credibility regressor: an [`EnfnCore`] over the 16
/// normalized features with targets scaled to [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnfnModel {
    core: EnfnCore,
    trained_count: usize,
}

impl EnfnModel {
    pub fn new(config: EnfnConfig) -> Self {
        EnfnModel {
            core: EnfnCore::new(config, &[(0.0, 1.0); FEATURE_COUNT]),
            trained_count: 0,
        }
    }

    pub fn core(&self) -> &EnfnCore {
        &self.core
    }
}

impl Regressor for EnfnModel {
    fn name(&self) -> &'static str {
        match self.core.config.shape {
            MfShape::Triangular => "enfn-tri",
            MfShape::Gaussian => "enfn-gauss",
        }
    }

    fn supports_incremental(&self) -> bool {
        true
    }

    fn trained_count(&self) -> usize {
        self.trained_count
    }

    fn fit(&mut self, data: &[Sample]) -> Result<FitReport, LearnError> {
        if data.is_empty() {
            return Err(LearnError::EmptyBatch);
        }
        let mut sum_sq = 0.0;
        for sample in data {
            let pred = self.learn_one(sample)?;
            let err = (pred - sample.credibility) / 100.0;
            sum_sq += err * err;
        }
        Ok(FitReport {
            final_mse: sum_sq / data.len() as f64,
            epochs_run: 1,
            converged: true,
            warnings: Vec::new(),
        })
    }

    fn learn_one(&mut self, sample: &Sample) -> Result<f64, LearnError> {
        let x = sample.normalized_input();
        let pred = self.core.learn(&x, sample.normalized_target());
        self.trained_count += 1;
        Ok(pred * 100.0)
    }

    fn predict(&self, features: &[f64; FEATURE_COUNT]) -> Result<f64, LearnError> {
        Ok(self.core.predict(&normalize_input(features)) * 100.0)
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::Enfn(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangular_active_degrees_sum_to_one_everywhere() {
        let mut core = EnfnCore::new(EnfnConfig::default(), &[(0.0, 1.0)]);
        // Grow some structure first so the partition is non-trivial.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let x = rng.random_range(0.0..1.0);
            core.learn(&[x], (8.0 * x).sin() * 0.5 + 0.5);
        }
        for _ in 0..10_000 {
            let x = rng.random_range(-0.2..1.2);
            let acts = core.input(0).memberships(x, MfShape::Triangular);
            let total: f64 = acts.iter().map(|(_, mu)| mu).sum();
            assert!((total - 1.0).abs() <= 1e-9, "sum {total} at x={x}");
            assert!(acts.len() <= 2);
        }
    }

    #[test]
    fn gaussian_degrees_renormalize_to_one() {
        let mut core = EnfnCore::new(
            EnfnConfig {
                shape: MfShape::Gaussian,
                ..EnfnConfig::default()
            },
            &[(0.0, 1.0)],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let x = rng.random_range(0.0..1.0);
            core.learn(&[x], x * x);
        }
        for _ in 0..1000 {
            let x = rng.random_range(0.0..1.0);
            let acts = core.input(0).memberships(x, MfShape::Gaussian);
            let total: f64 = acts.iter().map(|(_, mu)| mu).sum();
            assert!((total - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn constant_stream_converges_without_structural_growth() {
        let mut core = EnfnCore::new(EnfnConfig::default(), &[(0.0, 1.0), (0.0, 1.0)]);
        let x = [0.3, 0.7];
        let target = 0.62;
        for _ in 0..400 {
            core.learn(&x, target);
        }
        let counts_after_warmup: Vec<usize> =
            (0..2).map(|i| core.input(i).mf_count()).collect();
        for _ in 0..400 {
            core.learn(&x, target);
        }
        assert!((core.predict(&x) - target).abs() < 1e-3);
        for (i, count) in counts_after_warmup.iter().enumerate() {
            assert_eq!(core.input(i).mf_count(), *count);
        }
    }

    #[test]
    fn kink_in_the_target_grows_the_partition_near_it() {
        // Piecewise-linear target with a kink at 0.5: the additive model
        // starts with a single linear segment and must refine around the
        // kink. Oracle: the local bias there is structural, so MF count
        // rises above the initial two and a modal point lands near 0.5.
        let mut core = EnfnCore::new(EnfnConfig::default(), &[(0.0, 1.0)]);
        let target = |x: f64| if x < 0.5 { x } else { 0.5 - 0.6 * (x - 0.5) };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1500 {
            let x = rng.random_range(0.0..1.0);
            core.learn(&[x], target(x));
        }
        let partition = core.input(0);
        assert!(
            partition.mf_count() > 2,
            "no structural growth: {} MFs",
            partition.mf_count()
        );
        let nearest = partition
            .modal_points()
            .iter()
            .map(|b| (b - 0.5).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 0.15, "closest modal point {nearest} from the kink");
    }

    #[test]
    fn modal_points_stay_sorted_and_count_never_drops_below_two() {
        let mut core = EnfnCore::new(
            EnfnConfig {
                max_age: 40,
                ..EnfnConfig::default()
            },
            &[(0.0, 1.0); 3],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for step in 0..3000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            // Shifting target keeps insertion pressure on.
            let t = (x[0] * 6.0 + step as f64 / 500.0).sin() * 0.4 + 0.5;
            core.learn(&x, t);
            for i in 0..3 {
                let partition = core.input(i);
                assert!(partition.mf_count() >= 2);
                let b = partition.modal_points();
                assert!(
                    b.windows(2).all(|w| w[0] < w[1]),
                    "unsorted partition {b:?}"
                );
            }
        }
    }

    #[test]
    fn range_expansion_moves_boundary_modal_points() {
        let mut core = EnfnCore::new(EnfnConfig::default(), &[(0.0, 1.0)]);
        core.learn(&[-0.5], 0.2);
        core.learn(&[1.7], 0.8);
        let b = core.input(0).modal_points();
        assert_eq!(b[0], -0.5);
        assert_eq!(*b.last().unwrap(), 1.7);
    }

    #[test]
    fn prediction_before_update_is_returned() {
        let mut model = EnfnModel::new(EnfnConfig::default());
        let sample = Sample {
            features: [0.5; FEATURE_COUNT],
            credibility: 80.0,
        };
        // Fresh model predicts 0, so the returned prequential prediction
        // must be 0 regardless of the sample's label.
        let first = model.learn_one(&sample).unwrap();
        assert_eq!(first, 0.0);
        let second = model.learn_one(&sample).unwrap();
        assert!(second > 0.0, "weights moved toward the target");
    }
}
