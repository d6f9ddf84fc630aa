//! The manual-vs-learned switchover: queries are evaluated by the formula
//! pipeline while the database is small, then answered by the incremental
//! learner once enough history has accumulated.
//!
//! ```bash
//! cargo run -p simcred --example switchover_policy
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simcred::credibility::{compute_indices, credibility};
use simcred::datagen::{sample_feature_vector, Provenance};
use simcred::fixtures::reference_weights;
use simcred::harness::switchover::{PathTaken, SwitchoverPolicy, SwitchoverState};
use simcred::learn::{EnfnConfig, EnfnModel, FigmnConfig, FigmnModel};

fn main() {
    let weights = reference_weights();
    let mut state = SwitchoverState::new(
        SwitchoverPolicy { threshold: 200 },
        Vec::new(),
        vec![
            Box::new(FigmnModel::new(FigmnConfig {
                delta: 1.0,
                ..FigmnConfig::default()
            })),
            Box::new(EnfnModel::new(EnfnConfig::default())),
        ],
    );

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut manual = 0;
    let mut empirical = 0;
    let mut empirical_abs_err = 0.0;
    for query in 0..300 {
        let features = sample_feature_vector(&mut rng, true);
        let outcome = state.apply(&features, &weights, Provenance::Generated);
        match outcome.path {
            PathTaken::Manual => manual += 1,
            PathTaken::Empirical => {
                empirical += 1;
                // The formula pipeline still exists, so compare against it.
                let truth = credibility(&compute_indices(&features), &weights).0;
                empirical_abs_err += (outcome.credibility - truth).abs();
            }
        }
        if query == 199 || query == 200 {
            println!(
                "query {query:>3}: path = {:<9} credibility = {:.2}",
                outcome.path.as_str(),
                outcome.credibility
            );
        }
    }

    println!("\n300 queries -> {manual} manual, {empirical} empirical");
    println!("database size: {}", state.database.len());
    println!(
        "empirical predictions deviate from the formula pipeline by {:.2} points on average",
        empirical_abs_err / empirical as f64
    );
}
