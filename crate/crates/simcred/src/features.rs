//! The 16 internal features of a simulation workflow and their extraction
//! from a workflow graph plus an execution-history log.
//!
//! Static features (counts, interface matching, parameter integrity, the
//! declared time estimate) come from the graph; the rest are derived from
//! the history log. Every feature has a declared range; raw values outside
//! it are clamped with a recorded warning rather than rejected, and the
//! index equations consume the clamped values.

use crate::workflow::{NodeKind, WorkflowGraph};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Number of internal features.
pub const FEATURE_COUNT: usize = 16;

/// Canonical feature order used everywhere a feature vector is flattened
/// (dataset columns, learner inputs, normalization).
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "p_match",
    "p_integrity",
    "t_hat",
    "t_bar",
    "v_t",
    "n_o",
    "n_active",
    "n_logic",
    "n_history",
    "p_hist_cons",
    "n_stimulate",
    "n_para",
    "n_ex_para",
    "p_f",
    "p_s",
    "n_model",
];

/// Declared (min, max) range per feature, in canonical order.
pub const FEATURE_RANGES: [(f64, f64); FEATURE_COUNT] = [
    (0.0, 1.0),    // p_match
    (0.0, 1.0),    // p_integrity
    (30.0, 150.0), // t_hat
    (30.0, 150.0), // t_bar
    (0.0, 3.0),    // v_t
    (0.0, 100.0),  // n_o
    (0.0, 100.0),  // n_active
    (0.0, 100.0),  // n_logic
    (0.0, 200.0),  // n_history
    (0.0, 1.0),    // p_hist_cons
    (0.0, 10.0),   // n_stimulate
    (0.0, 100.0),  // n_para
    (0.0, 20.0),   // n_ex_para
    (0.0, 1.0),    // p_f
    (0.0, 1.0),    // p_s
    (0.0, 100.0),  // n_model
];

/// The internal features of one workflow evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Interface matching degree between active nodes.
    pub p_match: f64,
    /// Parameter configuration integrity.
    pub p_integrity: f64,
    /// Estimated execution time in seconds.
    pub t_hat: f64,
    /// Average practical execution time in seconds.
    pub t_bar: f64,
    /// Population variance of execution time.
    pub v_t: f64,
    /// Average number of overtime activities per run.
    pub n_o: f64,
    /// Number of active nodes.
    pub n_active: f64,
    /// Number of logical nodes.
    pub n_logic: f64,
    /// Number of historical runs.
    pub n_history: f64,
    /// Consistency of the historical configuration.
    pub p_hist_cons: f64,
    /// Number of external stimulate events.
    pub n_stimulate: f64,
    /// Number of incentive parameters.
    pub n_para: f64,
    /// Number of external incentive parameters.
    pub n_ex_para: f64,
    /// Average failure rate of active nodes.
    pub p_f: f64,
    /// Success rate of historical usage.
    pub p_s: f64,
    /// Number of distinct models linked to the workflow.
    pub n_model: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.p_match,
            self.p_integrity,
            self.t_hat,
            self.t_bar,
            self.v_t,
            self.n_o,
            self.n_active,
            self.n_logic,
            self.n_history,
            self.p_hist_cons,
            self.n_stimulate,
            self.n_para,
            self.n_ex_para,
            self.p_f,
            self.p_s,
            self.n_model,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            p_match: a[0],
            p_integrity: a[1],
            t_hat: a[2],
            t_bar: a[3],
            v_t: a[4],
            n_o: a[5],
            n_active: a[6],
            n_logic: a[7],
            n_history: a[8],
            p_hist_cons: a[9],
            n_stimulate: a[10],
            n_para: a[11],
            n_ex_para: a[12],
            p_f: a[13],
            p_s: a[14],
            n_model: a[15],
        }
    }

    /// Clamps every field into its declared range, reporting each clamp.
    pub fn clamped(&self) -> (FeatureVector, Vec<ClampWarning>) {
        let mut values = self.to_array();
        let mut warnings = Vec::new();
        for (i, value) in values.iter_mut().enumerate() {
            let (lo, hi) = FEATURE_RANGES[i];
            if *value < lo || *value > hi {
                let clamped = value.clamp(lo, hi);
                warnings.push(ClampWarning {
                    field: FEATURE_NAMES[i],
                    raw: *value,
                    clamped,
                });
                *value = clamped;
            }
        }
        (FeatureVector::from_array(values), warnings)
    }

    /// True when every field already lies inside its declared range.
    pub fn in_range(&self) -> bool {
        self.to_array()
            .iter()
            .zip(FEATURE_RANGES.iter())
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Min-max normalization by the declared ranges, clamped to [0, 1].
    pub fn normalized(&self) -> [f64; FEATURE_COUNT] {
        let mut out = self.to_array();
        for (i, v) in out.iter_mut().enumerate() {
            let (lo, hi) = FEATURE_RANGES[i];
            *v = ((*v - lo) / (hi - lo)).clamp(0.0, 1.0);
        }
        out
    }
}

/// Record of one out-of-range raw value that was clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampWarning {
    pub field: &'static str,
    pub raw: f64,
    pub clamped: f64,
}

impl std::fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} = {} outside declared range, clamped to {}",
            self.field, self.raw, self.clamped
        )
    }
}

/// One recorded execution of the workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub duration: f64,
    pub overtime_count: u32,
    pub success: bool,
    pub fingerprint: String,
}

/// Failure tally of one active node over historical executions.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFailureTally {
    pub node_id: String,
    pub failures: u64,
    pub attempts: u64,
}

/// Execution history: run rows plus optional per-node failure tallies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryLog {
    pub runs: Vec<RunRecord>,
    pub node_failures: Vec<NodeFailureTally>,
}

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("history log line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("history log is inconsistent: {0}")]
    Inconsistent(String),
}

impl HistoryLog {
    pub fn empty() -> Self {
        HistoryLog::default()
    }

    /// Parses the run-row file: header `duration,overtime_count,success,fingerprint`.
    pub fn parse_runs(text: &str) -> Result<Vec<RunRecord>, HistoryError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| HistoryError::Malformed {
            line: 1,
            message: "missing header row".to_string(),
        })?;
        let expected = "duration,overtime_count,success,fingerprint";
        if header.trim() != expected {
            return Err(HistoryError::Malformed {
                line: 1,
                message: format!("header must be `{expected}`, got `{}`", header.trim()),
            });
        }
        let mut runs = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, ',').collect();
            if fields.len() != 4 {
                return Err(HistoryError::Malformed {
                    line: line_no,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let duration: f64 = fields[0].trim().parse().map_err(|_| HistoryError::Malformed {
                line: line_no,
                message: format!("bad duration `{}`", fields[0]),
            })?;
            if !(duration.is_finite() && duration > 0.0) {
                return Err(HistoryError::Malformed {
                    line: line_no,
                    message: format!("duration must be positive, got {duration}"),
                });
            }
            let overtime_count: u32 =
                fields[1].trim().parse().map_err(|_| HistoryError::Malformed {
                    line: line_no,
                    message: format!("bad overtime_count `{}`", fields[1]),
                })?;
            let success = match fields[2].trim() {
                "true" | "1" => true,
                "false" | "0" => false,
                other => {
                    return Err(HistoryError::Malformed {
                        line: line_no,
                        message: format!("bad success flag `{other}`"),
                    })
                }
            };
            runs.push(RunRecord {
                duration,
                overtime_count,
                success,
                fingerprint: fields[3].trim().to_string(),
            });
        }
        Ok(runs)
    }

    /// Parses the optional per-node tally file: header `node_id,failures,attempts`.
    pub fn parse_node_failures(text: &str) -> Result<Vec<NodeFailureTally>, HistoryError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| HistoryError::Malformed {
            line: 1,
            message: "missing header row".to_string(),
        })?;
        let expected = "node_id,failures,attempts";
        if header.trim() != expected {
            return Err(HistoryError::Malformed {
                line: 1,
                message: format!("header must be `{expected}`, got `{}`", header.trim()),
            });
        }
        let mut tallies = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(HistoryError::Malformed {
                    line: line_no,
                    message: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let failures: u64 = fields[1].trim().parse().map_err(|_| HistoryError::Malformed {
                line: line_no,
                message: format!("bad failures `{}`", fields[1]),
            })?;
            let attempts: u64 = fields[2].trim().parse().map_err(|_| HistoryError::Malformed {
                line: line_no,
                message: format!("bad attempts `{}`", fields[2]),
            })?;
            if attempts == 0 {
                return Err(HistoryError::Malformed {
                    line: line_no,
                    message: "attempts must be positive".to_string(),
                });
            }
            if failures > attempts {
                return Err(HistoryError::Malformed {
                    line: line_no,
                    message: format!("failures {failures} exceed attempts {attempts}"),
                });
            }
            tallies.push(NodeFailureTally {
                node_id: fields[0].trim().to_string(),
                failures,
                attempts,
            });
        }
        Ok(tallies)
    }
}

/// Fraction of active-to-active edges whose source output port and target
/// input port carry the same type tag; 1 when there are no such edges.
pub fn interface_match_degree(graph: &WorkflowGraph) -> f64 {
    let mut total = 0usize;
    let mut matched = 0usize;
    for edge in graph.edges() {
        let from = graph.node(&edge.from).map(|n| n.kind);
        let to = graph.node(&edge.to).map(|n| n.kind);
        if from != Some(NodeKind::Active) || to != Some(NodeKind::Active) {
            continue;
        }
        total += 1;
        let source_tag = edge.from_port.as_deref().and_then(|p| {
            graph
                .node(&edge.from)
                .and_then(|n| n.outputs.iter().find(|port| port.name == p))
                .map(|port| port.type_tag.as_str())
        });
        let target_tag = edge.to_port.as_deref().and_then(|p| {
            graph
                .node(&edge.to)
                .and_then(|n| n.inputs.iter().find(|port| port.name == p))
                .map(|port| port.type_tag.as_str())
        });
        if let (Some(s), Some(t)) = (source_tag, target_tag) {
            if s == t {
                matched += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        matched as f64 / total as f64
    }
}

/// Configured required parameters over total required parameters across all
/// active nodes; 1 when nothing is required.
pub fn parameter_integrity(graph: &WorkflowGraph) -> f64 {
    let mut required = 0usize;
    let mut configured = 0usize;
    for node in graph.nodes() {
        if node.kind != NodeKind::Active {
            continue;
        }
        for param in &node.params {
            if param.required {
                required += 1;
                if param.configured() {
                    configured += 1;
                }
            }
        }
    }
    if required == 0 {
        1.0
    } else {
        configured as f64 / required as f64
    }
}

/// Result of a feature extraction: the clamped features plus any clamp
/// warnings that fired.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub features: FeatureVector,
    pub warnings: Vec<ClampWarning>,
}

/// Computes the full feature vector from a graph and its history log.
///
/// An empty history yields the cold-start defaults: `n_history = 0`,
/// `p_s = p_f = 0`, `t_bar = t_hat`, `v_t = 0`, `n_o = 0`, `p_hist_cons = 0`.
pub fn extract_features(
    graph: &WorkflowGraph,
    history: &HistoryLog,
) -> Result<Extraction, HistoryError> {
    for run in &history.runs {
        if !(run.duration.is_finite() && run.duration > 0.0) {
            return Err(HistoryError::Inconsistent(format!(
                "run duration must be positive, got {}",
                run.duration
            )));
        }
    }
    for tally in &history.node_failures {
        if tally.attempts == 0 {
            return Err(HistoryError::Inconsistent(format!(
                "node `{}` has zero attempts",
                tally.node_id
            )));
        }
        if tally.failures > tally.attempts {
            return Err(HistoryError::Inconsistent(format!(
                "node `{}` failures exceed attempts",
                tally.node_id
            )));
        }
    }

    let census = graph.census();
    let t_hat = graph.estimated_time;

    let n_history = history.runs.len();
    let (t_bar, v_t, n_o, p_s, p_hist_cons) = if n_history == 0 {
        (t_hat, 0.0, 0.0, 0.0, 0.0)
    } else {
        let n = n_history as f64;
        let mean = history.runs.iter().map(|r| r.duration).sum::<f64>() / n;
        let variance = history
            .runs
            .iter()
            .map(|r| (r.duration - mean).powi(2))
            .sum::<f64>()
            / n;
        let overtime = history
            .runs
            .iter()
            .map(|r| r.overtime_count as f64)
            .sum::<f64>()
            / n;
        let successes = history.runs.iter().filter(|r| r.success).count() as f64;
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for run in &history.runs {
            *counts.entry(run.fingerprint.as_str()).or_insert(0) += 1;
        }
        // Deterministic tie-break on the fingerprint itself.
        let modal = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
            .map(|(_, &c)| c)
            .unwrap_or(0);
        (
            mean,
            variance,
            overtime,
            successes / n,
            modal as f64 / n,
        )
    };

    let p_f = if history.node_failures.is_empty() {
        0.0
    } else {
        history
            .node_failures
            .iter()
            .map(|t| t.failures as f64 / t.attempts as f64)
            .sum::<f64>()
            / history.node_failures.len() as f64
    };

    let raw = FeatureVector {
        p_match: interface_match_degree(graph),
        p_integrity: parameter_integrity(graph),
        t_hat,
        t_bar,
        v_t,
        n_o,
        n_active: census.active as f64,
        n_logic: census.logical as f64,
        n_history: n_history as f64,
        p_hist_cons,
        n_stimulate: census.stimulate_events as f64,
        n_para: graph.incentive_params as f64,
        n_ex_para: graph.external_incentive_params as f64,
        p_f,
        p_s,
        n_model: census.linked_models as f64,
    };
    let (features, warnings) = raw.clamped();
    Ok(Extraction { features, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::{Edge, EventKind, Node, WorkflowGraph};

    fn graph_with_edges(specs: &[(&str, &str, bool)]) -> WorkflowGraph {
        // (from_tag, to_tag, expect_match) per active-to-active edge
        let mut g = WorkflowGraph::new("match", 60.0);
        g.add_node(Node::event("s", EventKind::Start)).unwrap();
        g.add_node(Node::event("e", EventKind::End)).unwrap();
        for (i, (from_tag, to_tag, _)) in specs.iter().enumerate() {
            let a = format!("a{i}");
            let b = format!("b{i}");
            g.add_node(Node::active(&a).with_output("o", from_tag)).unwrap();
            g.add_node(Node::active(&b).with_input("i", to_tag)).unwrap();
            g.add_edge(Edge::new("s", a.clone())).unwrap();
            g.add_edge(Edge::new(a.clone(), b.clone()).with_ports("o", "i"))
                .unwrap();
            g.add_edge(Edge::new(b, "e")).unwrap();
        }
        g
    }

    #[test]
    fn all_compatible_edges_give_one() {
        let g = graph_with_edges(&[("f64", "f64", true), ("txt", "txt", true)]);
        assert_eq!(interface_match_degree(&g), 1.0);
    }

    #[test]
    fn no_active_edges_is_vacuously_one() {
        let mut g = WorkflowGraph::new("none", 60.0);
        g.add_node(Node::event("s", EventKind::Start)).unwrap();
        g.add_node(Node::event("e", EventKind::End)).unwrap();
        g.add_edge(Edge::new("s", "e")).unwrap();
        assert_eq!(interface_match_degree(&g), 1.0);
    }

    #[test]
    fn three_of_four_matching_gives_three_quarters() {
        // Oracle: count the matches by hand over the constructed edges.
        let specs = [
            ("f64", "f64", true),
            ("f64", "i32", false),
            ("txt", "txt", true),
            ("img", "img", true),
        ];
        let expected = specs.iter().filter(|s| s.2).count() as f64 / specs.len() as f64;
        assert_eq!(expected, 0.75);
        let g = graph_with_edges(&specs);
        assert_eq!(interface_match_degree(&g), 0.75);
    }

    #[test]
    fn integrity_counts_required_params() {
        let mut g = WorkflowGraph::new("params", 60.0);
        g.add_node(Node::event("s", EventKind::Start)).unwrap();
        g.add_node(Node::event("e", EventKind::End)).unwrap();
        g.add_node(
            Node::active("a")
                .with_param("p1", true, Some("1"))
                .with_param("p2", true, None)
                .with_param("p3", false, None),
        )
        .unwrap();
        g.add_edge(Edge::new("s", "a")).unwrap();
        g.add_edge(Edge::new("a", "e")).unwrap();
        assert_eq!(parameter_integrity(&g), 0.5);
    }

    #[test]
    fn integrity_is_one_without_required_params() {
        let g = WorkflowGraph::new("bare", 60.0);
        assert_eq!(parameter_integrity(&g), 1.0);
    }

    #[test]
    fn integrity_zero_when_all_required_missing() {
        let mut g = WorkflowGraph::new("missing", 60.0);
        g.add_node(Node::active("a").with_param("p", true, None)).unwrap();
        assert_eq!(parameter_integrity(&g), 0.0);
    }

    #[test]
    fn empty_inputs_give_cold_start_defaults() {
        let g = WorkflowGraph::new("empty", 60.0);
        let x = extract_features(&g, &HistoryLog::empty()).unwrap();
        let f = x.features;
        assert_eq!(f.p_match, 1.0);
        assert_eq!(f.p_integrity, 1.0);
        assert_eq!(f.n_history, 0.0);
        assert_eq!(f.p_s, 0.0);
        assert_eq!(f.p_f, 0.0);
        assert_eq!(f.t_bar, f.t_hat);
        assert_eq!(f.v_t, 0.0);
        assert_eq!(f.n_o, 0.0);
        assert_eq!(f.p_hist_cons, 0.0);
        assert_eq!(f.n_active, 0.0);
        assert!(x.warnings.is_empty());
    }

    #[test]
    fn identical_durations_have_zero_variance() {
        let g = WorkflowGraph::new("var", 60.0);
        let history = HistoryLog {
            runs: vec![
                RunRecord {
                    duration: 42.0,
                    overtime_count: 0,
                    success: true,
                    fingerprint: "a".into(),
                };
                5
            ],
            node_failures: vec![],
        };
        let f = extract_features(&g, &history).unwrap().features;
        assert_eq!(f.v_t, 0.0);
        assert_eq!(f.t_bar, 42.0);
        assert_eq!(f.p_s, 1.0);
        assert_eq!(f.n_history, 5.0);
        assert_eq!(f.p_hist_cons, 1.0);
    }

    #[test]
    fn out_of_range_variance_is_clamped_with_warning() {
        let g = WorkflowGraph::new("clamp", 60.0);
        let mut runs = Vec::new();
        // Alternating durations with population variance 16 (> declared max 3).
        for i in 0..10 {
            runs.push(RunRecord {
                duration: if i % 2 == 0 { 56.0 } else { 64.0 },
                overtime_count: 0,
                success: true,
                fingerprint: "c".into(),
            });
        }
        let x = extract_features(&g, &HistoryLog { runs, node_failures: vec![] }).unwrap();
        assert_eq!(x.features.v_t, 3.0);
        assert_eq!(x.warnings.len(), 1);
        assert_eq!(x.warnings[0].field, "v_t");
        assert_eq!(x.warnings[0].raw, 16.0);
    }

    #[test]
    fn nonpositive_duration_is_malformed() {
        let g = WorkflowGraph::new("bad", 60.0);
        let history = HistoryLog {
            runs: vec![RunRecord {
                duration: 0.0,
                overtime_count: 0,
                success: true,
                fingerprint: "x".into(),
            }],
            node_failures: vec![],
        };
        assert!(extract_features(&g, &history).is_err());
    }

    #[test]
    fn success_rate_complements_failure_fraction() {
        let g = WorkflowGraph::new("ps", 60.0);
        let mut runs = Vec::new();
        for i in 0..8 {
            runs.push(RunRecord {
                duration: 50.0,
                overtime_count: 0,
                success: i < 6,
                fingerprint: "f".into(),
            });
        }
        let f = extract_features(&g, &HistoryLog { runs, node_failures: vec![] })
            .unwrap()
            .features;
        let failed_fraction = 2.0 / 8.0;
        assert!((f.p_s + failed_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn runs_csv_round_trip_and_errors() {
        let text = "duration,overtime_count,success,fingerprint\n143.71,3,true,cfgA\n141.2,0,false,cfgB\n";
        let runs = HistoryLog::parse_runs(text).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].overtime_count, 3);
        assert!(!runs[1].success);

        let bad_header = HistoryLog::parse_runs("time,x,y,z\n1,2,true,a\n");
        assert!(bad_header.is_err());
        let bad_duration =
            HistoryLog::parse_runs("duration,overtime_count,success,fingerprint\n-3,0,true,a\n");
        assert!(bad_duration.is_err());
    }

    #[test]
    fn normalization_lands_in_unit_interval() {
        let f = FeatureVector::from_array([
            1.0, 0.5, 90.0, 120.0, 1.5, 50.0, 25.0, 10.0, 100.0, 0.3, 5.0, 60.0, 10.0, 0.2, 0.9,
            12.0,
        ]);
        let n = f.normalized();
        assert!(n.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((n[2] - 0.5).abs() < 1e-12); // t_hat 90 in [30, 150]
        assert!((n[10] - 0.5).abs() < 1e-12); // n_stimulate 5 in [0, 10]
    }
}
