//! Extreme learning machine: a single hidden layer whose weights and biases
//! are drawn once from a seeded generator and never tuned; only the output
//! weights are computed, by regularized least squares on the hidden-layer
//! output matrix.

use super::numeric::least_squares_solve;
use super::{normalize_input, Checkpoint, FitReport, LearnError, Regressor, Sample};
use crate::features::FEATURE_COUNT;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ElmConfig {
    pub hidden_count: usize,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for ElmConfig {
    fn default() -> Self {
        ElmConfig {
            hidden_count: 100,
            ridge: 1e-6,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElmNetwork {
    config: ElmConfig,
    /// Frozen random input weights, `hidden_count` rows of 16.
    input_weights: Vec<Vec<f64>>,
    /// Frozen random biases.
    biases: Vec<f64>,
    /// Output weights; present after `fit`.
    output_weights: Option<Vec<f64>>,
    /// Mean of the normalized training targets; the output weights fit the
    /// centered residuals, so ridge shrinkage pulls predictions toward the
    /// mean instead of toward zero.
    target_mean: f64,
    trained_count: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ElmNetwork {
    pub fn new(config: ElmConfig) -> Self {
        assert!(config.hidden_count >= 1, "need at least one hidden node");
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let input_weights = (0..config.hidden_count)
            .map(|_| {
                (0..FEATURE_COUNT)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        let biases = (0..config.hidden_count)
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        ElmNetwork {
            config,
            input_weights,
            biases,
            output_weights: None,
            target_mean: 0.0,
            trained_count: 0,
        }
    }

    pub fn config(&self) -> &ElmConfig {
        &self.config
    }

    fn hidden_row(&self, input: &[f64; FEATURE_COUNT]) -> Vec<f64> {
        self.input_weights
            .iter()
            .zip(self.biases.iter())
            .map(|(w, b)| {
                let z: f64 = w.iter().zip(input.iter()).map(|(wi, xi)| wi * xi).sum();
                sigmoid(z + b)
            })
            .collect()
    }

    /// Hidden-layer output matrix for a normalized batch.
    fn hidden_matrix(&self, inputs: &[[f64; FEATURE_COUNT]]) -> DMatrix<f64> {
        let rows: Vec<f64> = inputs.iter().flat_map(|x| self.hidden_row(x)).collect();
        DMatrix::from_row_slice(inputs.len(), self.config.hidden_count, &rows)
    }
}

impl Regressor for ElmNetwork {
    fn name(&self) -> &'static str {
        "elm"
    }

    fn supports_incremental(&self) -> bool {
        false
    }

    fn trained_count(&self) -> usize {
        self.trained_count
    }

    fn fit(&mut self, data: &[Sample]) -> Result<FitReport, LearnError> {
        if data.is_empty() {
            return Err(LearnError::EmptyBatch);
        }
        let inputs: Vec<[f64; FEATURE_COUNT]> =
            data.iter().map(|s| s.normalized_input()).collect();
        let mean = data.iter().map(|s| s.normalized_target()).sum::<f64>() / data.len() as f64;
        let targets = DVector::from_iterator(
            data.len(),
            data.iter().map(|s| s.normalized_target() - mean),
        );
        let h = self.hidden_matrix(&inputs);
        let solution = least_squares_solve(&h, &targets, self.config.ridge)?;
        let mut warnings = Vec::new();
        if solution.rank_deficient {
            warnings.push(
                "hidden output matrix is rank-deficient; minimum-norm solution taken".to_string(),
            );
        }
        let residual = &h * &solution.coefficients - &targets;
        let final_mse = residual.norm_squared() / data.len() as f64;
        self.output_weights = Some(solution.coefficients.iter().cloned().collect());
        self.target_mean = mean;
        self.trained_count = data.len();
        Ok(FitReport {
            final_mse,
            epochs_run: 1,
            converged: true,
            warnings,
        })
    }

    fn learn_one(&mut self, _sample: &Sample) -> Result<f64, LearnError> {
        Err(LearnError::IncrementalUnsupported("elm"))
    }

    fn predict(&self, features: &[f64; FEATURE_COUNT]) -> Result<f64, LearnError> {
        let beta = self.output_weights.as_ref().ok_or(LearnError::Untrained)?;
        let h = self.hidden_row(&normalize_input(features));
        let y: f64 = h.iter().zip(beta.iter()).map(|(hi, bi)| hi * bi).sum();
        Ok((y + self.target_mean) * 100.0)
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint::Elm(self.clone())
    }
}
