//! Model checkpoints: every learner serializes its full state to a
//! self-describing JSON document, and reloading reproduces predictions
//! bit for bit.
//!
//! ```bash
//! cargo run -p simcred --example model_checkpoints
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simcred::credibility::{compute_indices, credibility};
use simcred::datagen::sample_feature_vector;
use simcred::fixtures::reference_weights;
use simcred::learn::{
    Checkpoint, ElmConfig, ElmNetwork, FigmnConfig, FigmnModel, Regressor, Sample,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weights = reference_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data: Vec<Sample> = (0..300)
        .map(|_| {
            let f = sample_feature_vector(&mut rng, true);
            Sample::new(&f, credibility(&compute_indices(&f), &weights).0)
        })
        .collect();

    let mut models: Vec<Box<dyn Regressor>> = vec![
        Box::new(ElmNetwork::new(ElmConfig::default())),
        Box::new(FigmnModel::new(FigmnConfig {
            delta: 1.0,
            ..FigmnConfig::default()
        })),
    ];

    for model in models.iter_mut() {
        model.fit(&data)?;
        let json = model.checkpoint().to_json();
        println!(
            "{}: checkpoint is {} bytes of JSON (kind tag + full state)",
            model.name(),
            json.len()
        );

        let restored = Checkpoint::from_json(&json)?.restore();
        let mut identical = true;
        for sample in data.iter().take(50) {
            let a = model.predict(&sample.features)?;
            let b = restored.predict(&sample.features)?;
            identical &= a.to_bits() == b.to_bits();
        }
        println!(
            "  restored model reproduces predictions bit-identically: {identical}"
        );
    }
    Ok(())
}
