//! Build a workflow graph in code, validate it, serialize it to the
//! definition format and parse it back unchanged.
//!
//! ```bash
//! cargo run -p simcred --example workflow_roundtrip
//! ```

use simcred::workflow::{
    parse_workflow, serialize_workflow, validate_graph, Connective, Edge, EventKind, Node,
    WorkflowGraph,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut graph = WorkflowGraph::new("wind-tunnel-sweep", 95.5);
    graph.set_incentives(12, 3);
    graph.add_node(Node::event("start", EventKind::Start))?;
    graph.add_node(Node::event("gust", EventKind::Stimulate))?;
    graph.add_node(Node::event("done", EventKind::End))?;
    graph.add_node(
        Node::active("mesh")
            .with_output("grid", "mesh3d")
            .with_param("resolution", true, Some("0.02"))
            .with_linked_model("cfd-core"),
    )?;
    graph.add_node(
        Node::active("solve")
            .with_input("grid", "mesh3d")
            .with_output("field", "tensor")
            .with_param("dt", true, Some("1e-3"))
            .with_param("viscosity", true, None)
            .with_linked_model("cfd-core"),
    )?;
    graph.add_node(
        Node::active("report")
            .with_input("field", "tensor")
            .with_param("format", false, Some("pdf")),
    )?;
    graph.add_node(Node::logical("both-done", Connective::And))?;
    graph.add_edge(Edge::new("start", "mesh"))?;
    graph.add_edge(Edge::new("mesh", "solve").with_ports("grid", "grid"))?;
    graph.add_edge(Edge::new("solve", "report").with_ports("field", "field"))?;
    graph.add_edge(Edge::new("gust", "solve"))?;
    graph.add_edge(Edge::new("solve", "both-done"))?;
    graph.add_edge(Edge::new("report", "both-done"))?;
    graph.add_edge(Edge::new("both-done", "done"))?;

    let report = validate_graph(&graph);
    println!("validation findings: {}", report.entries.len());
    for entry in &report.entries {
        println!("  {entry}");
    }

    let document = serialize_workflow(&graph);
    println!("\nserialized definition:\n{document}");

    let reparsed = parse_workflow(&document)?;
    assert_eq!(graph, reparsed, "round trip must preserve the graph");
    println!("round trip: parse(serialize(g)) == g");

    let census = reparsed.census();
    println!(
        "census: {} active, {} logical, {} stimulate, {} models",
        census.active, census.logical, census.stimulate_events, census.linked_models
    );
    Ok(())
}
