//! Incremental Gaussian mixture regression over the joint (input, target)
//! space.
//!
//! Components are full-covariance Gaussians maintained through their
//! *precision* matrices: the squared Mahalanobis distance is a direct
//! quadratic form, and the mean/covariance updates become two rank-one
//! precision corrections (Sherman-Morrison) plus matching log-determinant
//! corrections (matrix determinant lemma), so no matrix is ever inverted.
//! A sample that no component accepts under the chi-square novelty test
//! spawns a new component; stale components that never accumulated
//! activation are pruned. Prediction is the posterior-weighted Gaussian
//! conditional mean of the target dimension given the input block.

#![allow(clippy::needless_range_loop)] // flat row-major matrix kernels read clearest indexed

use super::numeric::chi_square_quantile;
use super::{normalize_input, Checkpoint, FitReport, LearnError, Regressor, Sample};
use crate::features::FEATURE_COUNT;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FigmnConfig {
    /// Scaling factor: initial per-dimension standard deviation is
    /// `delta * input_range`.
    pub delta: f64,
    /// Novelty meta-parameter: acceptance threshold is the chi-square
    /// quantile at probability `1 - beta`.
    pub beta: f64,
    /// Minimum age before a component may be pruned.
    pub v_min: u64,
    /// Activation mass below which an old component is pruned.
    pub sp_min: f64,
    /// Per-dimension data range (1.0 for the normalized pipeline).
    pub input_range: f64,
}

impl Default for FigmnConfig {
    fn default() -> Self {
        FigmnConfig {
            delta: 0.01,
            beta: 0.1,
            v_min: 5,
            sp_min: 3.0,
            input_range: 1.0,
        }
    }
}

/// One mixture component, tracked by precision matrix and log-determinant
/// of the covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    /// Accumulated posterior activation.
    pub sp: f64,
    /// Samples seen since this component was created.
    pub age: u64,
    /// Row-major precision matrix (inverse covariance).
    precision: Vec<f64>,
    /// ln |C| of the tracked covariance.
    pub log_det_cov: f64,
}

impl MixtureComponent {
    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    fn mahalanobis_sq(&self, x: &[f64], dim: usize) -> f64 {
        let mut total = 0.0;
        for i in 0..dim {
            let di = x[i] - self.mean[i];
            let mut row = 0.0;
            for j in 0..dim {
                row += self.precision[i * dim + j] * (x[j] - self.mean[j]);
            }
            total += di * row;
        }
        total
    }
}

/// Dimension-generic incremental Gaussian mixture over a joint space whose
/// last dimension is the regression target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianMixture {
    dim: usize,
    sigma_ini_sq: f64,
    chi_sq_threshold: f64,
    v_min: u64,
    sp_min: f64,
    components: Vec<MixtureComponent>,
    /// Count of covariance resets taken when an update would have left the
    /// positive-definite cone.
    pub resets: u64,
}

const PD_EPSILON: f64 = 1e-12;

impl GaussianMixture {
    pub fn new(dim: usize, config: &FigmnConfig) -> Self {
        let sigma_ini = config.delta * config.input_range;
        assert!(sigma_ini > 0.0, "delta and input_range must be positive");
        let chi_sq_threshold = chi_square_quantile(dim, 1.0 - config.beta)
            .expect("valid dof and probability");
        GaussianMixture {
            dim,
            sigma_ini_sq: sigma_ini * sigma_ini,
            chi_sq_threshold,
            v_min: config.v_min,
            sp_min: config.sp_min,
            components: Vec::new(),
            resets: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn chi_sq_threshold(&self) -> f64 {
        self.chi_sq_threshold
    }

    /// Normalized priors `p(j) = sp_j / sum sp`.
    pub fn priors(&self) -> Vec<f64> {
        let total: f64 = self.components.iter().map(|c| c.sp).sum();
        self.components.iter().map(|c| c.sp / total).collect()
    }

    fn spawn(&mut self, x: &[f64]) {
        let dim = self.dim;
        let mut precision = vec![0.0; dim * dim];
        for i in 0..dim {
            precision[i * dim + i] = 1.0 / self.sigma_ini_sq;
        }
        self.components.push(MixtureComponent {
            mean: x.to_vec(),
            sp: 1.0,
            age: 1,
            precision,
            log_det_cov: dim as f64 * self.sigma_ini_sq.ln(),
        });
    }

    /// Presents one joint sample to the mixture.
    pub fn learn(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim);
        let dim = self.dim;

        let distances: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.mahalanobis_sq(x, dim))
            .collect();
        for c in self.components.iter_mut() {
            c.age += 1;
        }
        let accepted = distances.iter().any(|&d| d < self.chi_sq_threshold);

        if !accepted {
            self.spawn(x);
        } else {
            // Posterior responsibilities in log space; the (2*pi)^(d/2) and
            // total-sp factors cancel in the normalization.
            let log_weights: Vec<f64> = self
                .components
                .iter()
                .zip(distances.iter())
                .map(|(c, &d)| -0.5 * d - 0.5 * c.log_det_cov + c.sp.ln())
                .collect();
            let max_log = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let unnormalized: Vec<f64> = log_weights.iter().map(|l| (l - max_log).exp()).collect();
            let total: f64 = unnormalized.iter().sum();
            let posteriors: Vec<f64> = unnormalized.iter().map(|u| u / total).collect();

            for (component, &posterior) in self.components.iter_mut().zip(posteriors.iter()) {
                if posterior <= 0.0 {
                    continue;
                }
                update_component(component, x, posterior, dim, self.sigma_ini_sq, &mut self.resets);
            }
        }

        // Prune spurious components: old enough, never activated.
        if self.components.len() > 1 {
            let v_min = self.v_min;
            let sp_min = self.sp_min;
            let keep: Vec<bool> = self
                .components
                .iter()
                .map(|c| !(c.age > v_min && c.sp < sp_min))
                .collect();
            if keep.iter().any(|&k| k) {
                let mut it = keep.iter();
                self.components.retain(|_| *it.next().unwrap());
            }
        }
    }

    /// Posterior-weighted conditional mean of the last dimension given the
    /// first `dim - 1`. `None` until a component exists.
    pub fn predict_conditional(&self, x_in: &[f64]) -> Option<f64> {
        let din = self.dim - 1;
        assert_eq!(x_in.len(), din);
        if self.components.is_empty() {
            return None;
        }
        let mut log_weights = Vec::with_capacity(self.components.len());
        let mut conditional_means = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let p_oo = c.precision[din * self.dim + din];
            let dev: Vec<f64> = (0..din).map(|i| x_in[i] - c.mean[i]).collect();
            // Quadratic form over the input block and the input-output strip.
            let mut quad = 0.0;
            let mut strip = 0.0;
            for i in 0..din {
                let mut row = 0.0;
                for j in 0..din {
                    row += c.precision[i * self.dim + j] * dev[j];
                }
                quad += dev[i] * row;
                strip += c.precision[i * self.dim + din] * dev[i];
            }
            // Input-marginal Mahalanobis via the Schur complement of the
            // output entry; the marginal determinant is |C| * p_oo.
            let d2_in = (quad - strip * strip / p_oo).max(0.0);
            let log_det_in = c.log_det_cov + p_oo.ln();
            log_weights.push(-0.5 * d2_in - 0.5 * log_det_in + c.sp.ln());
            conditional_means.push(c.mean[din] - strip / p_oo);
        }
        let max_log = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut acc = 0.0;
        for (lw, m) in log_weights.iter().zip(conditional_means.iter()) {
            let w = (lw - max_log).exp();
            total += w;
            acc += w * m;
        }
        Some(acc / total)
    }
}

/// Applies the activation-weighted mean/covariance update to one component,
/// keeping precision and log-determinant in step via two rank-one
/// corrections. The tracked covariance recurrence is
/// `C <- (1-w) C + w e* e*^T - dmu dmu^T` with `w = posterior/sp`,
/// `e* = x - mean_new`, `dmu = w (x - mean_old)`.
fn update_component(
    component: &mut MixtureComponent,
    x: &[f64],
    posterior: f64,
    dim: usize,
    sigma_ini_sq: f64,
    resets: &mut u64,
) {
    component.sp += posterior;
    let omega = posterior / component.sp;

    let error: Vec<f64> = (0..dim).map(|i| x[i] - component.mean[i]).collect();
    let delta_mean: Vec<f64> = error.iter().map(|e| omega * e).collect();
    for i in 0..dim {
        component.mean[i] += delta_mean[i];
    }
    let error_new: Vec<f64> = (0..dim).map(|i| x[i] - component.mean[i]).collect();

    let one_minus = 1.0 - omega;
    let p = &mut component.precision;

    // Step A: C1 = (1-w) C + w e* e*^T.
    // Sherman-Morrison on A = (1-w) C with u = w e*, v = e*.
    let q: Vec<f64> = (0..dim)
        .map(|i| (0..dim).map(|j| p[i * dim + j] * error_new[j]).sum())
        .collect();
    let es_q: f64 = error_new.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    let denom_a = 1.0 + omega / one_minus * es_q;
    let coeff_a = omega / (one_minus * one_minus) / denom_a;
    for i in 0..dim {
        for j in 0..dim {
            p[i * dim + j] = p[i * dim + j] / one_minus - coeff_a * q[i] * q[j];
        }
    }
    let log_det_1 = dim as f64 * one_minus.ln() + component.log_det_cov + denom_a.ln();

    // Step B: C_new = C1 - dmu dmu^T (downdate).
    let r: Vec<f64> = (0..dim)
        .map(|i| (0..dim).map(|j| p[i * dim + j] * delta_mean[j]).sum())
        .collect();
    let dmu_r: f64 = delta_mean.iter().zip(r.iter()).map(|(a, b)| a * b).sum();
    let denom_b = 1.0 - dmu_r;
    if denom_b <= PD_EPSILON {
        // The downdate would leave the positive-definite cone; restart the
        // component's shape at the initial isotropic covariance.
        for i in 0..dim {
            for j in 0..dim {
                p[i * dim + j] = if i == j { 1.0 / sigma_ini_sq } else { 0.0 };
            }
        }
        component.log_det_cov = dim as f64 * sigma_ini_sq.ln();
        *resets += 1;
        return;
    }
    let coeff_b = 1.0 / denom_b;
    for i in 0..dim {
        for j in 0..dim {
            p[i * dim + j] += coeff_b * r[i] * r[j];
        }
    }
    component.log_det_cov = log_det_1 + denom_b.ln();

    // Kill the tiny asymmetry drift of repeated rank-one arithmetic.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let s = 0.5 * (p[i * dim + j] + p[j * dim + i]);
            p[i * dim + j] = s;
            p[j * dim + i] = s;
        }
    }
}

const JOINT_DIM: usize = FEATURE_COUNT + 1;

/// The feature-to-credibility regressor: a [`GaussianMixture`] over the 17
/// joint dimensions (16 normalized features plus the normalized score).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FigmnModel {
    config: FigmnConfig,
    mixture: GaussianMixture,
    trained_count: usize,
}

impl FigmnModel {
    pub fn new(config: FigmnConfig) -> Self {
        FigmnModel {
            config,
            mixture: GaussianMixture::new(JOINT_DIM, &config),
            trained_count: 0,
        }
    }

    pub fn config(&self) -> &FigmnConfig {
        &self.config
    }

    pub fn mixture(&self) -> &GaussianMixture {
        &self.mixture
    }

    fn joint(sample: &Sample) -> [f64; JOINT_DIM] {
        let mut joint = [0.0; JOINT_DIM];
        joint[..FEATURE_COUNT].copy_from_slice(&sample.normalized_input());
        joint[FEATURE_COUNT] = sample.normalized_target();
        joint
    }
}

impl Regressor for FigmnModel {
    fn name(&self) -> &'static str {
        "figmn"
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
            warnings: if self.mixture.resets > 0 {
                vec![format!("{} covariance reset(s) taken", self.mixture.resets)]
            } else {
                Vec::new()
            },
        })
    }

    fn learn_one(&mut self, sample: &Sample) -> Result<f64, LearnError> {
        let input = sample.normalized_input();
        // Neutral midpoint before the first component exists.
        let prediction = self
            .mixture
            .predict_conditional(&input)
            .map(|y| y * 100.0)
            .unwrap_or(50.0);
        self.mixture.learn(&Self::joint(sample));
        self.trained_count += 1;
        Ok(prediction)
    }

    fn predict(&self, features: &[f64; FEATURE_COUNT]) -> Result<f64, LearnError> {
        self.mixture
            .predict_conditional(&normalize_input(features))
            .map(|y| y * 100.0)
            .ok_or(LearnError::Untrained)
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::Figmn(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn is_symmetric_pd(precision: &[f64], dim: usize) -> bool {
        let m = DMatrix::from_row_slice(dim, dim, precision);
        if (&m - m.transpose()).abs().max() > 1e-9 {
            return false;
        }
        m.cholesky().is_some()
    }

    #[test]
    fn first_sample_becomes_the_first_component() {
        let mut mixture = GaussianMixture::new(3, &FigmnConfig::default());
        let x = [0.2, 0.4, 0.9];
        mixture.learn(&x);
        assert_eq!(mixture.components().len(), 1);
        let c = &mixture.components()[0];
        assert_eq!(c.mean, x.to_vec());
        assert_eq!(c.sp, 1.0);
        assert_eq!(c.age, 1);
        assert_eq!(mixture.priors(), vec![1.0]);
    }

    #[test]
    fn rank_one_precision_updates_match_direct_inversion() {
        // Oracle: track the covariance itself through the same recurrence
        // and invert it densely after every update.
        let dim = 5;
        let config = FigmnConfig {
            delta: 2.0, // wide initial covariance so every point is accepted
            ..FigmnConfig::default()
        };
        let mut mixture = GaussianMixture::new(dim, &config);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let first: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
        mixture.learn(&first);

        let mut cov = DMatrix::identity(dim, dim) * (2.0f64 * 2.0);
        let mut mean = first.clone();
        let mut sp = 1.0;

        for step in 0..100 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            mixture.learn(&x);
            assert_eq!(mixture.components().len(), 1, "all points accepted");

            // Oracle covariance recurrence (posterior over one component = 1).
            sp += 1.0;
            let omega: f64 = 1.0 / sp;
            let e = DMatrix::from_column_slice(dim, 1, &x)
                - DMatrix::from_column_slice(dim, 1, &mean);
            let dmu = &e * omega;
            for i in 0..dim {
                mean[i] += dmu[(i, 0)];
            }
            let e_new = DMatrix::from_column_slice(dim, 1, &x)
                - DMatrix::from_column_slice(dim, 1, &mean);
            cov = cov * (1.0 - omega) + &e_new * e_new.transpose() * omega
                - &dmu * dmu.transpose();

            let oracle_precision = cov.clone().try_inverse().expect("oracle covariance PD");
            let tracked = DMatrix::from_row_slice(dim, dim, mixture.components()[0].precision());
            let rel = (&tracked - &oracle_precision).norm() / oracle_precision.norm();
            assert!(rel < 1e-8, "step {step}: relative error {rel}");

            let oracle_log_det = cov.determinant().ln();
            assert!(
                (mixture.components()[0].log_det_cov - oracle_log_det).abs() < 1e-8,
                "log-det drift at step {step}"
            );
        }
    }

    #[test]
    fn well_separated_clusters_get_exactly_two_components() {
        // Separation is orders of magnitude beyond the acceptance radius
        // (about 5 sigma), cluster spread well inside it. Oracle: check the
        // distances directly.
        let config = FigmnConfig {
            delta: 0.01,
            ..FigmnConfig::default()
        };
        let mut mixture = GaussianMixture::new(JOINT_DIM, &config);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let center_a = [0.2f64; JOINT_DIM];
        let center_b = [0.8f64; JOINT_DIM];
        let radius = (mixture.chi_sq_threshold()).sqrt() * 0.01;
        let separation = (0..JOINT_DIM)
            .map(|i| (center_a[i] - center_b[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(separation > 20.0 * radius);

        for i in 0..200 {
            let center = if i % 2 == 0 { &center_a } else { &center_b };
            let x: Vec<f64> = center
                .iter()
                .map(|c| c + rng.random_range(-0.0005..0.0005))
                .collect();
            mixture.learn(&x);
        }
        assert_eq!(mixture.components().len(), 2);
    }

    #[test]
    fn priors_sum_to_one_and_precisions_stay_pd() {
        let config = FigmnConfig {
            delta: 0.25,
            ..FigmnConfig::default()
        };
        let mut mixture = GaussianMixture::new(4, &config);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            mixture.learn(&x);
            let prior_sum: f64 = mixture.priors().iter().sum();
            assert!((prior_sum - 1.0).abs() < 1e-9);
            for c in mixture.components() {
                assert!(is_symmetric_pd(c.precision(), 4));
            }
        }
    }

    #[test]
    fn single_component_predicts_its_mean_at_the_mean() {
        let mut model = FigmnModel::new(FigmnConfig {
            delta: 1.0,
            ..FigmnConfig::default()
        });
        let features = [0.5; FEATURE_COUNT];
        let sample = Sample {
            features,
            credibility: 61.5,
        };
        model.learn_one(&sample).unwrap();
        assert_eq!(model.mixture().components().len(), 1);
        let pred = model.predict(&features).unwrap();
        assert!((pred - 61.5).abs() < 1e-9, "pred {pred}");
    }

    #[test]
    fn learns_an_exact_linear_map() {
        // Data from y = c^T x stays jointly Gaussian-compatible: the
        // conditional-mean regression converges onto the plane.
        let mut model = FigmnModel::new(FigmnConfig {
            delta: 1.0,
            ..FigmnConfig::default()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let coeff: Vec<f64> = (0..FEATURE_COUNT)
            .map(|_| rng.random_range(0.0..1.0 / FEATURE_COUNT as f64 * 2.0))
            .collect();
        let make = |rng: &mut ChaCha8Rng| {
            let mut f = [0.0; FEATURE_COUNT];
            for (i, v) in f.iter_mut().enumerate() {
                let (lo, hi) = crate::features::FEATURE_RANGES[i];
                *v = rng.random_range(lo..hi);
            }
            let x = crate::features::FeatureVector::from_array(f).normalized();
            let y: f64 = coeff.iter().zip(x.iter()).map(|(c, xi)| c * xi).sum();
            Sample {
                features: f,
                credibility: y * 100.0,
            }
        };
        for _ in 0..500 {
            let s = make(&mut rng);
            model.learn_one(&s).unwrap();
        }
        let mut abs_err = 0.0;
        for _ in 0..200 {
            let s = make(&mut rng);
            abs_err += (model.predict(&s.features).unwrap() - s.credibility).abs();
        }
        abs_err /= 200.0;
        assert!(abs_err < 0.5, "MAE {abs_err} on the linear target");
    }

    #[test]
    fn aging_prunes_never_activated_components() {
        // With a microscopic initial covariance every uniform sample is
        // novel; old singletons must be pruned instead of piling up.
        let config = FigmnConfig::default(); // delta = 0.01
        let mut mixture = GaussianMixture::new(6, &config);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
            mixture.learn(&x);
        }
        assert!(
            mixture.components().len() <= config.v_min as usize + 2,
            "{} components survived",
            mixture.components().len()
        );
    }
}
