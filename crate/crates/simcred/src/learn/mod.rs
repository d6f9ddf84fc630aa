//! Regressors mapping the 16 internal features to a credibility score.
//!
//! Two batch learners (back-propagation network, extreme learning machine)
//! and two incremental learners (evolving neo-fuzzy neuron, incremental
//! Gaussian mixture) share one contract: [`Regressor`]. Inputs are min-max
//! normalized by the declared feature ranges and targets are scaled to
//! [0, 1] internally; the public API works on the natural scales.

mod bp;
mod elm;
mod enfn;
mod figmn;
pub mod numeric;

pub use bp::{BpConfig, BpGradients, BpNetwork};
pub use elm::{ElmConfig, ElmNetwork};
pub use enfn::{EnfnConfig, EnfnCore, EnfnModel, InputPartition, MfShape};
pub use figmn::{FigmnConfig, FigmnModel, GaussianMixture, MixtureComponent};

use crate::features::{FeatureVector, FEATURE_COUNT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One training/evaluation pair on the natural scales: raw features and a
/// credibility score in [0, 100].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub features: [f64; FEATURE_COUNT],
    pub credibility: f64,
}

impl Sample {
    pub fn new(features: &FeatureVector, credibility: f64) -> Self {
        Sample {
            features: features.to_array(),
            credibility,
        }
    }

    pub(crate) fn normalized_input(&self) -> [f64; FEATURE_COUNT] {
        FeatureVector::from_array(self.features).normalized()
    }

    pub(crate) fn normalized_target(&self) -> f64 {
        self.credibility / 100.0
    }
}

pub(crate) fn normalize_input(features: &[f64; FEATURE_COUNT]) -> [f64; FEATURE_COUNT] {
    FeatureVector::from_array(*features).normalized()
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("{0} does not support incremental updates")]
    IncrementalUnsupported(&'static str),
    #[error("model has not been trained yet")]
    Untrained,
    #[error("training data is empty")]
    EmptyBatch,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
}

/// Outcome of a batch fit (or of replaying a batch through an incremental
/// learner).
#[derive(Debug, Clone)]
pub struct FitReport {
    /// Mean squared error on the normalized target scale after training.
    pub final_mse: f64,
    pub epochs_run: usize,
    /// False when an epoch cap stopped training before the target error.
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Common contract of the four learners.
///
/// Determinism: with a fixed seed and identical data order, every
/// implementation produces a bit-identical prediction sequence. Instances
/// are single-writer: `fit`/`learn_one` require `&mut self`, `predict` on an
/// un-mutated model is safe to call concurrently.
pub trait Regressor {
    fn name(&self) -> &'static str;

    fn supports_incremental(&self) -> bool;

    /// Number of samples this model has been trained on.
    fn trained_count(&self) -> usize;

    /// Batch training. Incremental learners replay the batch in order.
    fn fit(&mut self, data: &[Sample]) -> Result<FitReport, LearnError>;

    /// One prequential step: returns the prediction made *before* the
    /// sample's label is used for the update. Batch-only learners refuse.
    fn learn_one(&mut self, sample: &Sample) -> Result<f64, LearnError>;

    /// Predicts the credibility score for raw features.
    fn predict(&self, features: &[f64; FEATURE_COUNT]) -> Result<f64, LearnError>;

    /// Serializable snapshot of the full model state.
    fn checkpoint(&self) -> Checkpoint;
}

/// Self-describing model snapshot. Restoring reproduces predictions
/// bit-identically (all state is carried, nothing is re-derived).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Checkpoint {
    Bp(BpNetwork),
    Elm(ElmNetwork),
    Enfn(EnfnModel),
    Figmn(FigmnModel),
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        serde_json::from_str(text).map_err(|e| LearnError::Checkpoint(e.to_string()))
    }

    pub fn restore(self) -> Box<dyn Regressor> {
        match self {
            Checkpoint::Bp(m) => Box::new(m),
            Checkpoint::Elm(m) => Box::new(m),
            Checkpoint::Enfn(m) => Box::new(m),
            Checkpoint::Figmn(m) => Box::new(m),
        }
    }
}
