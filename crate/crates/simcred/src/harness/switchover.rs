//! The manual-vs-learned switchover policy.
//!
//! While the historical database is small, every query is evaluated
//! manually (index equations + expert weights), appended to the database
//! and fed to the incremental learners. Once the database reaches the
//! threshold, queries are answered by the learned model directly.

use crate::ahp::WeightVector;
use crate::credibility::{compute_indices, credibility};
use crate::datagen::{EvaluationRecord, Provenance};
use crate::features::FeatureVector;
use crate::learn::Regressor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchoverPolicy {
    /// Database size at which evaluation switches to the learned model.
    pub threshold: usize,
}

impl Default for SwitchoverPolicy {
    fn default() -> Self {
        SwitchoverPolicy { threshold: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathTaken {
    Manual,
    Empirical,
}

impl PathTaken {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathTaken::Manual => "manual",
            PathTaken::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SwitchoverOutcome {
    pub credibility: f64,
    pub path: PathTaken,
    /// Set when the empirical path was requested but no learner had any
    /// training, forcing a manual fallback.
    pub fallback: bool,
}

/// Database plus the learners that shadow it.
pub struct SwitchoverState {
    pub policy: SwitchoverPolicy,
    pub database: Vec<EvaluationRecord>,
    /// Incremental learners update on every manual evaluation; batch
    /// learners are fitted once from the full database when the empirical
    /// path first activates, then cached. The first trained learner answers
    /// empirical queries.
    pub learners: Vec<Box<dyn Regressor>>,
}

impl SwitchoverState {
    pub fn new(
        policy: SwitchoverPolicy,
        database: Vec<EvaluationRecord>,
        learners: Vec<Box<dyn Regressor>>,
    ) -> Self {
        SwitchoverState {
            policy,
            database,
            learners,
        }
    }

    fn database_samples(&self) -> Vec<crate::learn::Sample> {
        self.database
            .iter()
            .map(|r| crate::learn::Sample::new(&r.features, r.credibility))
            .collect()
    }

    /// Evaluates one query per the policy.
    pub fn apply(
        &mut self,
        features: &FeatureVector,
        weights: &WeightVector,
        provenance: Provenance,
    ) -> SwitchoverOutcome {
        let below_threshold = self.database.len() < self.policy.threshold;
        if !below_threshold {
            // First empirical activation: batch learners get their one fit
            // over the accumulated database.
            if !self.database.is_empty() {
                let samples = self.database_samples();
                for learner in self.learners.iter_mut() {
                    if !learner.supports_incremental() && learner.trained_count() == 0 {
                        learner.fit(&samples).expect("database fits");
                    }
                }
            }
            if let Some(learner) = self.learners.iter().find(|l| l.trained_count() > 0) {
                let prediction = learner
                    .predict(&features.to_array())
                    .expect("trained learner predicts");
                return SwitchoverOutcome {
                    credibility: prediction,
                    path: PathTaken::Empirical,
                    fallback: false,
                };
            }
        }

        // Manual path: score through the pipeline, grow the database, and
        // give the incremental learners their one step.
        let indices = compute_indices(features);
        let score = credibility(&indices, weights).0;
        self.database.push(EvaluationRecord {
            features: *features,
            indices,
            credibility: score,
            provenance,
        });
        let sample = crate::learn::Sample::new(features, score);
        for learner in self.learners.iter_mut() {
            if learner.supports_incremental() {
                learner
                    .learn_one(&sample)
                    .expect("incremental learners accept samples");
            }
        }
        SwitchoverOutcome {
            credibility: score,
            path: PathTaken::Manual,
            fallback: !below_threshold,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::sample_feature_vector;
    use crate::fixtures::reference_weights;
    use crate::learn::{EnfnConfig, EnfnModel, FigmnConfig, FigmnModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fresh_state(threshold: usize) -> SwitchoverState {
        SwitchoverState::new(
            SwitchoverPolicy { threshold },
            Vec::new(),
            vec![
                Box::new(EnfnModel::new(EnfnConfig::default())),
                Box::new(FigmnModel::new(FigmnConfig {
                    delta: 1.0,
                    ..FigmnConfig::default()
                })),
            ],
        )
    }

    #[test]
    fn empty_database_takes_the_manual_path() {
        let mut state = fresh_state(200);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sample_feature_vector(&mut rng, true);
        let outcome = state.apply(&f, &reference_weights(), Provenance::Generated);
        assert_eq!(outcome.path, PathTaken::Manual);
        assert_eq!(state.database.len(), 1);
        assert_eq!(state.learners[0].trained_count(), 1);
    }

    #[test]
    fn database_at_threshold_switches_to_empirical() {
        let mut state = fresh_state(200);
        let w = reference_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let f = sample_feature_vector(&mut rng, true);
            assert_eq!(state.apply(&f, &w, Provenance::Generated).path, PathTaken::Manual);
        }
        let f = sample_feature_vector(&mut rng, true);
        let outcome = state.apply(&f, &w, Provenance::Generated);
        assert_eq!(outcome.path, PathTaken::Empirical);
        assert!(!outcome.fallback);
        // Empirical queries neither grow the database nor train learners.
        assert_eq!(state.database.len(), 200);
        assert_eq!(state.learners[0].trained_count(), 200);
    }

    #[test]
    fn three_hundred_queries_split_two_hundred_manual_one_hundred_empirical() {
        let mut state = fresh_state(200);
        let w = reference_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut manual = 0;
        let mut empirical = 0;
        for _ in 0..300 {
            let f = sample_feature_vector(&mut rng, true);
            match state.apply(&f, &w, Provenance::Generated).path {
                PathTaken::Manual => manual += 1,
                PathTaken::Empirical => empirical += 1,
            }
        }
        assert_eq!((manual, empirical), (200, 100));
    }

    #[test]
    fn preloaded_database_with_untrained_learners_falls_back_to_manual() {
        let mut state = fresh_state(10);
        let w = reference_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // Preload the database without replaying it through the learners.
        for _ in 0..10 {
            let f = sample_feature_vector(&mut rng, true);
            let x = compute_indices(&f);
            state.database.push(EvaluationRecord {
                features: f,
                indices: x,
                credibility: credibility(&x, &w).0,
                provenance: Provenance::Generated,
            });
        }
        let f = sample_feature_vector(&mut rng, true);
        let outcome = state.apply(&f, &w, Provenance::Generated);
        assert_eq!(outcome.path, PathTaken::Manual);
        assert!(outcome.fallback);
        // The fallback trained the learners, so the next query is empirical.
        let f = sample_feature_vector(&mut rng, true);
        assert_eq!(
            state.apply(&f, &w, Provenance::Generated).path,
            PathTaken::Empirical
        );
    }

    #[test]
    fn batch_learner_is_fitted_once_when_the_empirical_path_opens() {
        use crate::learn::{ElmConfig, ElmNetwork};
        let mut state = SwitchoverState::new(
            SwitchoverPolicy { threshold: 30 },
            Vec::new(),
            vec![Box::new(ElmNetwork::new(ElmConfig {
                hidden_count: 20,
                ..ElmConfig::default()
            }))],
        );
        let w = reference_weights();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let f = sample_feature_vector(&mut rng, true);
            let outcome = state.apply(&f, &w, Provenance::Generated);
            assert_eq!(outcome.path, PathTaken::Manual);
            // Batch learners are not trained on the manual path.
            assert_eq!(state.learners[0].trained_count(), 0);
        }
        let f = sample_feature_vector(&mut rng, true);
        let outcome = state.apply(&f, &w, Provenance::Generated);
        assert_eq!(outcome.path, PathTaken::Empirical);
        // Fitted exactly once, on the full 30-record database.
        assert_eq!(state.learners[0].trained_count(), 30);
        let f = sample_feature_vector(&mut rng, true);
        state.apply(&f, &w, Provenance::Generated);
        assert_eq!(state.learners[0].trained_count(), 30, "fit is cached");
    }
}
