//! Directed-graph data model for simulation workflows.
//!
//! A workflow is a typed directed graph: active nodes describe under-layer
//! simulation sub-processes (with ports and parameters), logical nodes
//! combine execution conditions (AND/OR/NOR), and event nodes mark the
//! start, external stimulation and end of the process.

mod text;

pub use text::{parse_workflow, serialize_workflow};

use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

/// Connective of a logical node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Nor,
}

impl Connective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Nor => "nor",
        }
    }
}

/// Role of an event node in the process lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Start,
    Stimulate,
    End,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::Stimulate => "stimulate",
            EventKind::End => "end",
        }
    }
}

/// Discriminates the three node families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Active,
    Logical(Connective),
    Event(EventKind),
}

/// A named, type-tagged interface port on an active node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub type_tag: String,
}

/// A simulation parameter declaration. A parameter is *configured* when the
/// definition file supplies a value for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub required: bool,
    pub value: Option<String>,
}

impl Param {
    pub fn configured(&self) -> bool {
        self.value.is_some()
    }
}

/// A node of the workflow graph. Ports, parameters and linked models are
/// only meaningful on active nodes; the parser rejects them elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub params: Vec<Param>,
    pub linked_model: Option<String>,
}

impl Node {
    pub fn active(id: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::Active,
            inputs: Vec::new(),
            outputs: Vec::new(),
            params: Vec::new(),
            linked_model: None,
        }
    }

    pub fn logical(id: impl Into<String>, connective: Connective) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::Logical(connective),
            inputs: Vec::new(),
            outputs: Vec::new(),
            params: Vec::new(),
            linked_model: None,
        }
    }

    pub fn event(id: impl Into<String>, kind: EventKind) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::Event(kind),
            inputs: Vec::new(),
            outputs: Vec::new(),
            params: Vec::new(),
            linked_model: None,
        }
    }

    pub fn with_output(mut self, name: &str, type_tag: &str) -> Self {
        self.outputs.push(Port {
            name: name.to_string(),
            type_tag: type_tag.to_string(),
        });
        self
    }

    pub fn with_input(mut self, name: &str, type_tag: &str) -> Self {
        self.inputs.push(Port {
            name: name.to_string(),
            type_tag: type_tag.to_string(),
        });
        self
    }

    pub fn with_param(mut self, name: &str, required: bool, value: Option<&str>) -> Self {
        self.params.push(Param {
            name: name.to_string(),
            required,
            value: value.map(str::to_string),
        });
        self
    }

    pub fn with_linked_model(mut self, model: &str) -> Self {
        self.linked_model = Some(model.to_string());
        self
    }
}

/// A directed edge. Port references are present exactly when the respective
/// endpoint is an active node that exposes the named port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: String,
    pub from_port: Option<String>,
    pub to: String,
    pub to_port: Option<String>,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge {
            from: from.into(),
            from_port: None,
            to: to.into(),
            to_port: None,
        }
    }

    pub fn with_ports(mut self, from_port: &str, to_port: &str) -> Self {
        self.from_port = Some(from_port.to_string());
        self.to_port = Some(to_port.to_string());
        self
    }
}

/// Errors raised while building or parsing a workflow definition.
#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown node kind `{kind}` on node `{id}`")]
    UnknownNodeKind { id: String, kind: String },
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("duplicate port name `{port}` on node `{node}`")]
    DuplicatePort { node: String, port: String },
    #[error("edge references unknown node id `{0}`")]
    DanglingEdge(String),
    #[error("edge references unknown port `{port}` on node `{node}`")]
    DanglingPort { node: String, port: String },
    #[error("port reference `{port}` on non-active node `{node}`")]
    PortOnNonActive { node: String, port: String },
    #[error("element `{element}` is not allowed on {kind} node `{node}`")]
    ElementNotAllowed {
        node: String,
        kind: &'static str,
        element: &'static str,
    },
    #[error("missing required attribute `{attribute}` on element `{element}`")]
    MissingAttribute {
        element: &'static str,
        attribute: &'static str,
    },
    #[error("invalid value `{value}` for attribute `{attribute}` on element `{element}`")]
    InvalidAttribute {
        element: &'static str,
        attribute: &'static str,
        value: String,
    },
}

/// Census of a workflow graph: the node counts the feature extractor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeCensus {
    pub active: usize,
    pub logical: usize,
    pub start_events: usize,
    pub stimulate_events: usize,
    pub end_events: usize,
    /// Distinct model identifiers linked by active nodes.
    pub linked_models: usize,
}

/// The workflow graph: nodes, directed edges and the declared workflow-level
/// incentive-parameter counts.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowGraph {
    pub name: String,
    /// Estimated execution time in seconds, declared on the definition.
    pub estimated_time: f64,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    /// Declared count of workflow-level incentive parameters.
    pub incentive_params: u32,
    /// Declared count of external incentive parameters.
    pub external_incentive_params: u32,
}

impl WorkflowGraph {
    pub fn new(name: impl Into<String>, estimated_time: f64) -> Self {
        WorkflowGraph {
            name: name.into(),
            estimated_time,
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            incentive_params: 0,
            external_incentive_params: 0,
        }
    }

    pub fn set_incentives(&mut self, para: u32, ex_para: u32) {
        self.incentive_params = para;
        self.external_incentive_params = ex_para;
    }

    pub fn add_node(&mut self, node: Node) -> Result<(), WorkflowError> {
        if self.index.contains_key(&node.id) {
            return Err(WorkflowError::DuplicateNodeId(node.id.clone()));
        }
        let mut seen = HashSet::new();
        for port in node.inputs.iter().chain(node.outputs.iter()) {
            if !seen.insert(port.name.as_str()) {
                return Err(WorkflowError::DuplicatePort {
                    node: node.id.clone(),
                    port: port.name.clone(),
                });
            }
        }
        self.index.insert(node.id.clone(), self.nodes.len());
        self.nodes.push(node);
        Ok(())
    }

    /// Adds an edge, checking node and port references.
    pub fn add_edge(&mut self, edge: Edge) -> Result<(), WorkflowError> {
        self.check_endpoint(&edge.from, edge.from_port.as_deref(), false)?;
        self.check_endpoint(&edge.to, edge.to_port.as_deref(), true)?;
        self.edges.push(edge);
        Ok(())
    }

    fn check_endpoint(
        &self,
        id: &str,
        port: Option<&str>,
        inbound: bool,
    ) -> Result<(), WorkflowError> {
        let node = self
            .node(id)
            .ok_or_else(|| WorkflowError::DanglingEdge(id.to_string()))?;
        if let Some(port_name) = port {
            if node.kind != NodeKind::Active {
                return Err(WorkflowError::PortOnNonActive {
                    node: id.to_string(),
                    port: port_name.to_string(),
                });
            }
            let ports = if inbound { &node.inputs } else { &node.outputs };
            if !ports.iter().any(|p| p.name == port_name) {
                return Err(WorkflowError::DanglingPort {
                    node: id.to_string(),
                    port: port_name.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn census(&self) -> NodeCensus {
        let mut census = NodeCensus::default();
        let mut models = HashSet::new();
        for node in &self.nodes {
            match node.kind {
                NodeKind::Active => {
                    census.active += 1;
                    if let Some(model) = &node.linked_model {
                        models.insert(model.as_str());
                    }
                }
                NodeKind::Logical(_) => census.logical += 1,
                NodeKind::Event(EventKind::Start) => census.start_events += 1,
                NodeKind::Event(EventKind::Stimulate) => census.stimulate_events += 1,
                NodeKind::Event(EventKind::End) => census.end_events += 1,
            }
        }
        census.linked_models = models.len();
        census
    }

    fn inbound_count(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.to == id).count()
    }

    fn outbound_count(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.from == id).count()
    }
}

/// Kinds of structural findings produced by [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    NoStartEvent,
    MultipleStartEvents { ids: Vec<String> },
    NoEndEvent,
    UnreachableActiveNode { id: String },
    LogicalNodeArity { id: String, inbound: usize },
    StartEventHasInbound { id: String },
    EndEventHasOutbound { id: String },
    /// Cycles are allowed but surfaced as a warning.
    CycleDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Violation,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationEntry {
    pub severity: Severity,
    pub finding: Finding,
}

impl std::fmt::Display for ValidationEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Violation => "violation",
            Severity::Warning => "warning",
        };
        match &self.finding {
            Finding::NoStartEvent => write!(f, "{tag}: workflow has no start event"),
            Finding::MultipleStartEvents { ids } => {
                write!(f, "{tag}: multiple start events: {}", ids.join(", "))
            }
            Finding::NoEndEvent => write!(f, "{tag}: workflow has no end event"),
            Finding::UnreachableActiveNode { id } => {
                write!(f, "{tag}: active node `{id}` unreachable from any start event")
            }
            Finding::LogicalNodeArity { id, inbound } => write!(
                f,
                "{tag}: logical node `{id}` has {inbound} inbound edge(s), needs at least 2"
            ),
            Finding::StartEventHasInbound { id } => {
                write!(f, "{tag}: start event `{id}` has inbound edges")
            }
            Finding::EndEventHasOutbound { id } => {
                write!(f, "{tag}: end event `{id}` has outbound edges")
            }
            Finding::CycleDetected => write!(f, "{tag}: workflow graph contains a cycle"),
        }
    }
}

/// Result of a structural validation pass. Violations make the graph
/// structurally invalid; warnings (cycles) do not.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn is_structurally_valid(&self) -> bool {
        !self
            .entries
            .iter()
            .any(|e| e.severity == Severity::Violation)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Scans the graph for structural invariant violations. Violations are
/// report entries, never failures.
pub fn validate_graph(graph: &WorkflowGraph) -> ValidationReport {
    let mut entries = Vec::new();

    let starts: Vec<&Node> = graph
        .nodes()
        .filter(|n| n.kind == NodeKind::Event(EventKind::Start))
        .collect();
    let ends: Vec<&Node> = graph
        .nodes()
        .filter(|n| n.kind == NodeKind::Event(EventKind::End))
        .collect();

    if starts.is_empty() {
        entries.push(ValidationEntry {
            severity: Severity::Violation,
            finding: Finding::NoStartEvent,
        });
    } else if starts.len() > 1 {
        entries.push(ValidationEntry {
            severity: Severity::Violation,
            finding: Finding::MultipleStartEvents {
                ids: starts.iter().map(|n| n.id.clone()).collect(),
            },
        });
    }
    if ends.is_empty() {
        entries.push(ValidationEntry {
            severity: Severity::Violation,
            finding: Finding::NoEndEvent,
        });
    }

    for node in starts.iter() {
        if graph.inbound_count(&node.id) > 0 {
            entries.push(ValidationEntry {
                severity: Severity::Violation,
                finding: Finding::StartEventHasInbound {
                    id: node.id.clone(),
                },
            });
        }
    }
    for node in ends.iter() {
        if graph.outbound_count(&node.id) > 0 {
            entries.push(ValidationEntry {
                severity: Severity::Violation,
                finding: Finding::EndEventHasOutbound {
                    id: node.id.clone(),
                },
            });
        }
    }

    // Reachability from start events along directed edges.
    let mut reachable: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = starts.iter().map(|n| n.id.as_str()).collect();
    for id in &queue {
        reachable.insert(id);
    }
    while let Some(current) = queue.pop_front() {
        for edge in graph.edges() {
            if edge.from == current && reachable.insert(edge.to.as_str()) {
                queue.push_back(edge.to.as_str());
            }
        }
    }
    for node in graph.nodes() {
        if node.kind == NodeKind::Active && !reachable.contains(node.id.as_str()) {
            entries.push(ValidationEntry {
                severity: Severity::Violation,
                finding: Finding::UnreachableActiveNode {
                    id: node.id.clone(),
                },
            });
        }
    }

    for node in graph.nodes() {
        if let NodeKind::Logical(_) = node.kind {
            let inbound = graph.inbound_count(&node.id);
            if inbound < 2 {
                entries.push(ValidationEntry {
                    severity: Severity::Violation,
                    finding: Finding::LogicalNodeArity {
                        id: node.id.clone(),
                        inbound,
                    },
                });
            }
        }
    }

    if has_cycle(graph) {
        entries.push(ValidationEntry {
            severity: Severity::Warning,
            finding: Finding::CycleDetected,
        });
    }

    ValidationReport { entries }
}

fn has_cycle(graph: &WorkflowGraph) -> bool {
    // Kahn's algorithm: leftover nodes imply a cycle.
    let mut indegree: HashMap<&str, usize> = graph.nodes().map(|n| (n.id.as_str(), 0)).collect();
    for edge in graph.edges() {
        if let Some(d) = indegree.get_mut(edge.to.as_str()) {
            *d += 1;
        }
    }
    let mut queue: VecDeque<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| id)
        .collect();
    let mut visited = 0usize;
    while let Some(current) = queue.pop_front() {
        visited += 1;
        for edge in graph.edges() {
            if edge.from == current {
                let d = indegree.get_mut(edge.to.as_str()).expect("known node");
                *d -= 1;
                if *d == 0 {
                    queue.push_back(edge.to.as_str());
                }
            }
        }
    }
    visited < graph.nodes.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_valid_graph() -> WorkflowGraph {
        let mut g = WorkflowGraph::new("demo", 60.0);
        g.add_node(Node::event("start", EventKind::Start)).unwrap();
        g.add_node(Node::event("end", EventKind::End)).unwrap();
        g.add_node(
            Node::active("a1")
                .with_output("out", "f64")
                .with_param("alpha", true, Some("0.5")),
        )
        .unwrap();
        g.add_node(Node::active("a2").with_input("in", "f64")).unwrap();
        g.add_edge(Edge::new("start", "a1")).unwrap();
        g.add_edge(Edge::new("a1", "a2").with_ports("out", "in"))
            .unwrap();
        g.add_edge(Edge::new("a2", "end")).unwrap();
        g
    }

    #[test]
    fn valid_graph_has_empty_report() {
        let report = validate_graph(&small_valid_graph());
        assert!(report.is_empty(), "unexpected entries: {:?}", report.entries);
        assert!(report.is_structurally_valid());
    }

    #[test]
    fn isolated_active_node_is_unreachable() {
        let mut g = small_valid_graph();
        g.add_node(Node::active("orphan")).unwrap();
        let report = validate_graph(&g);
        assert_eq!(
            report
                .entries
                .iter()
                .filter(
                    |e| matches!(&e.finding, Finding::UnreachableActiveNode { id } if id == "orphan")
                )
                .count(),
            1
        );
        assert!(!report.is_structurally_valid());
    }

    #[test]
    fn logical_node_needs_two_inbound_edges() {
        let mut g = small_valid_graph();
        g.add_node(Node::logical("and1", Connective::And)).unwrap();
        g.add_edge(Edge::new("a2", "and1")).unwrap();
        let report = validate_graph(&g);
        assert!(report.entries.iter().any(
            |e| matches!(&e.finding, Finding::LogicalNodeArity { id, inbound } if id == "and1" && *inbound == 1)
        ));
    }

    #[test]
    fn arity_findings_match_brute_force_scan() {
        // Oracle: enumerate expected arity violations by scanning every
        // logical node's inbound edges directly.
        let mut g = WorkflowGraph::new("arity", 45.0);
        g.add_node(Node::event("s", EventKind::Start)).unwrap();
        g.add_node(Node::event("e", EventKind::End)).unwrap();
        for i in 0..4 {
            g.add_node(Node::active(format!("a{i}"))).unwrap();
            g.add_edge(Edge::new("s", format!("a{i}"))).unwrap();
        }
        g.add_node(Node::logical("l0", Connective::And)).unwrap();
        g.add_node(Node::logical("l1", Connective::Or)).unwrap();
        g.add_node(Node::logical("l2", Connective::Nor)).unwrap();
        g.add_edge(Edge::new("a0", "l0")).unwrap();
        g.add_edge(Edge::new("a1", "l0")).unwrap(); // l0 satisfied
        g.add_edge(Edge::new("a2", "l1")).unwrap(); // l1 has one
        g.add_edge(Edge::new("l0", "e")).unwrap();
        g.add_edge(Edge::new("l1", "e")).unwrap();
        g.add_edge(Edge::new("l2", "e")).unwrap(); // l2 has zero

        let expected: Vec<(&str, usize)> = g
            .nodes()
            .filter(|n| matches!(n.kind, NodeKind::Logical(_)))
            .map(|n| (n.id.as_str(), g.edges().iter().filter(|e| e.to == n.id).count()))
            .filter(|(_, inbound)| *inbound < 2)
            .collect();
        assert_eq!(expected, vec![("l1", 1), ("l2", 0)]);

        let report = validate_graph(&g);
        let found: Vec<(String, usize)> = report
            .entries
            .iter()
            .filter_map(|e| match &e.finding {
                Finding::LogicalNodeArity { id, inbound } => Some((id.clone(), *inbound)),
                _ => None,
            })
            .collect();
        assert_eq!(found, vec![("l1".to_string(), 1), ("l2".to_string(), 0)]);
    }

    #[test]
    fn cycle_is_a_warning_not_a_violation() {
        let mut g = small_valid_graph();
        g.add_node(Node::active("b1")).unwrap();
        g.add_node(Node::active("b2")).unwrap();
        g.add_edge(Edge::new("a2", "b1")).unwrap();
        g.add_edge(Edge::new("b1", "b2")).unwrap();
        g.add_edge(Edge::new("b2", "b1")).unwrap();
        let report = validate_graph(&g);
        assert!(report
            .entries
            .iter()
            .any(|e| e.finding == Finding::CycleDetected && e.severity == Severity::Warning));
        assert!(report.is_structurally_valid());
    }

    #[test]
    fn duplicate_node_id_rejected() {
        let mut g = WorkflowGraph::new("dup", 30.0);
        g.add_node(Node::active("x")).unwrap();
        let err = g.add_node(Node::active("x")).unwrap_err();
        assert!(matches!(err, WorkflowError::DuplicateNodeId(id) if id == "x"));
    }

    #[test]
    fn dangling_edge_names_the_missing_id() {
        let mut g = small_valid_graph();
        let err = g.add_edge(Edge::new("a1", "ghost")).unwrap_err();
        assert!(matches!(err, WorkflowError::DanglingEdge(id) if id == "ghost"));
    }

    #[test]
    fn census_counts_distinct_models() {
        let mut g = small_valid_graph();
        g.add_node(Node::active("m1").with_linked_model("shared")).unwrap();
        g.add_node(Node::active("m2").with_linked_model("shared")).unwrap();
        g.add_edge(Edge::new("start", "m1")).unwrap();
        g.add_edge(Edge::new("start", "m2")).unwrap();
        let census = g.census();
        assert_eq!(census.active, 4);
        assert_eq!(census.linked_models, 1);
        assert_eq!(census.start_events, 1);
        assert_eq!(census.end_events, 1);
    }
}
