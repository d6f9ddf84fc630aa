//! Incremental learners on a prequential stream: each record is predicted
//! before its label is learned, so the error series is honest test error.
//!
//! ```bash
//! cargo run -p simcred --example online_learning
//! ```

use simcred::datagen::GeneratorConfig;
use simcred::harness::{
    load_records, run_benchmark, DataSource, ExperimentConfig, LearnerKind, Split,
};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = DataSource::Generate(GeneratorConfig {
        count: 2000,
        seed: 42,
        ..GeneratorConfig::default()
    });
    let records = load_records(&data)?;
    let config = ExperimentConfig::new(
        data,
        Split::OnlineStream,
        vec![
            LearnerKind::EnfnTri,
            LearnerKind::EnfnGauss,
            LearnerKind::Figmn,
        ],
        PathBuf::new(),
    );
    let report = run_benchmark(&config, &records)?;

    println!("prequential stream over {} records:", records.len());
    for run in report.runs.iter().chain(std::iter::once(&report.baseline)) {
        let m = &run.metrics;
        println!(
            "  {:<13} mae {:>7.4}   warm-up(200) {:>7.4}   stabilized(200) {:>7.4}",
            m.learner,
            m.mean_abs_error,
            m.warmup_mae.unwrap(),
            m.stabilized_mae.unwrap(),
        );
    }
    println!("\nevery learner's stabilized window beats its warm-up window:");
    for run in &report.runs {
        let m = &run.metrics;
        println!(
            "  {:<13} improved by {:>6.2} points",
            m.learner,
            m.warmup_mae.unwrap() - m.stabilized_mae.unwrap()
        );
    }
    Ok(())
}
