//! Full evaluation pipeline on the bundled reference sample: parse the
//! definition, validate the graph, extract features from the history log,
//! score the eight indices, weight them by AHP and print the credibility.
//!
//! ```bash
//! cargo run -p simcred --example evaluate_workflow
//! ```

use simcred::ahp::{principal_eigenvector, JudgmentMatrix, RECIPROCITY_TOLERANCE};
use simcred::credibility::{compute_indices, credibility, INDEX_NAMES};
use simcred::features::{extract_features, HistoryLog, FEATURE_NAMES};
use simcred::workflow::{parse_workflow, validate_graph};

const WORKFLOW: &str = include_str!("../tests/fixtures/reference_workflow.xml");
const HISTORY: &str = include_str!("../tests/fixtures/reference_history.csv");
const NODE_FAILURES: &str = include_str!("../tests/fixtures/reference_node_failures.csv");
const MATRIX: &str = include_str!("../tests/fixtures/reference_matrix.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = parse_workflow(WORKFLOW)?;
    let census = graph.census();
    println!(
        "parsed `{}`: {} active / {} logical / {} stimulate nodes, {} linked models",
        graph.name, census.active, census.logical, census.stimulate_events, census.linked_models
    );

    let report = validate_graph(&graph);
    println!(
        "validation: {} finding(s), structurally valid = {}",
        report.entries.len(),
        report.is_structurally_valid()
    );

    let history = HistoryLog {
        runs: HistoryLog::parse_runs(HISTORY)?,
        node_failures: HistoryLog::parse_node_failures(NODE_FAILURES)?,
    };
    let extraction = extract_features(&graph, &history)?;
    for warning in &extraction.warnings {
        println!("warning: {warning}");
    }
    println!("\nfeatures:");
    for (name, value) in FEATURE_NAMES.iter().zip(extraction.features.to_array()) {
        println!("  {name:<12} {value:.6}");
    }

    let indices = compute_indices(&extraction.features);
    println!("\nindices (quantitative / on the 0-100 scale):");
    let scaled = indices.on_hundred_scale();
    for (i, (name, value)) in INDEX_NAMES.iter().zip(indices.to_array()).enumerate() {
        println!("  {name:<16} {value:.4}   {}", scaled[i]);
    }

    let matrix = JudgmentMatrix::parse(MATRIX)?;
    for deviation in matrix.reciprocity_deviations(RECIPROCITY_TOLERANCE) {
        println!(
            "note: matrix cells ({},{}) deviate from reciprocity (product {:.5})",
            deviation.row, deviation.col, deviation.product
        );
    }
    let weights = principal_eigenvector(&matrix)?;
    println!(
        "\nAHP weights: {:?}",
        weights
            .weights
            .iter()
            .map(|w| (w * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    println!(
        "lambda_max = {:.4}, CR = {:.4} ({})",
        weights.lambda_max,
        weights.cr,
        if weights.is_acceptable() { "acceptable" } else { "unreliable" }
    );

    let score = credibility(&indices, &weights);
    println!("\ncredibility E = {:.2}", score.0);
    Ok(())
}
