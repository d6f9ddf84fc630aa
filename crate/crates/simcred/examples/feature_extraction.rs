//! Feature extraction in detail: what each of the 16 internal features
//! means, where it comes from, and how out-of-range values are clamped.
//!
//! ```bash
//! cargo run -p simcred --example feature_extraction
//! ```

use simcred::features::{
    extract_features, interface_match_degree, parameter_integrity, HistoryLog, RunRecord,
    FEATURE_NAMES, FEATURE_RANGES,
};
use simcred::workflow::{Edge, EventKind, Node, WorkflowGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut graph = WorkflowGraph::new("probe-launch", 80.0);
    graph.set_incentives(6, 2);
    graph.add_node(Node::event("start", EventKind::Start))?;
    graph.add_node(Node::event("end", EventKind::End))?;
    graph.add_node(
        Node::active("stage-one")
            .with_output("telemetry", "stream")
            .with_param("thrust", true, Some("9000"))
            .with_param("burn-time", true, None) // declared but not configured
            .with_linked_model("booster"),
    )?;
    graph.add_node(
        Node::active("stage-two")
            .with_input("telemetry", "stream")
            .with_param("target-orbit", true, Some("leo"))
            .with_linked_model("booster"),
    )?;
    graph.add_edge(Edge::new("start", "stage-one"))?;
    graph.add_edge(Edge::new("stage-one", "stage-two").with_ports("telemetry", "telemetry"))?;
    graph.add_edge(Edge::new("stage-two", "end"))?;

    println!("interface match degree: {}", interface_match_degree(&graph));
    println!("parameter integrity:    {}", parameter_integrity(&graph));

    // Six runs; the duration spread pushes the variance past its declared
    // range, which the extractor clamps with a warning.
    let durations = [70.0, 92.0, 81.0, 75.0, 88.0, 74.0];
    let history = HistoryLog {
        runs: durations
            .iter()
            .enumerate()
            .map(|(i, &duration)| RunRecord {
                duration,
                overtime_count: u32::from(i % 3 == 0),
                success: i != 4,
                fingerprint: if i < 5 { "rev-7".into() } else { "rev-8".into() },
            })
            .collect(),
        node_failures: Vec::new(),
    };

    let extraction = extract_features(&graph, &history)?;
    println!("\nextracted features (declared range on the right):");
    for (i, (name, value)) in FEATURE_NAMES
        .iter()
        .zip(extraction.features.to_array())
        .enumerate()
    {
        let (lo, hi) = FEATURE_RANGES[i];
        println!("  {name:<12} {value:<20} [{lo}, {hi}]");
    }
    println!();
    for warning in &extraction.warnings {
        println!("clamped: {warning}");
    }

    // The cold-start path: no history at all.
    let cold = extract_features(&graph, &HistoryLog::empty())?;
    println!(
        "\ncold start (no history): n_history = {}, p_s = {}, t_bar = t_hat = {}",
        cold.features.n_history, cold.features.p_s, cold.features.t_bar
    );
    Ok(())
}
