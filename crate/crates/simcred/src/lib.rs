//! Credibility scoring for simulation workflows.
//!
//! The library covers the full evaluation pipeline:
//!
//! 1. [`workflow`] — parse, validate and serialize workflow definition
//!    documents (typed directed graphs of active/logical/event nodes).
//! 2. [`features`] — extract the 16 internal features from a graph and its
//!    execution-history log.
//! 3. [`mod@credibility`] + [`ahp`] — score the eight evaluation indices from
//!    the features and aggregate them into a credibility value with weights
//!    from a pairwise expert judgment matrix.
//! 4. [`learn`] — four regressors (batch: back-propagation, extreme learning
//!    machine; incremental: evolving neo-fuzzy neuron, incremental Gaussian
//!    mixture) that learn the feature-to-credibility mapping from evaluation
//!    history.
//! 5. [`datagen`] — seeded synthetic evaluation databases with
//!    pipeline-consistent labels for oracle-checkable experiments.
//! 6. [`harness`] — experiment runner, metrics, plots and the
//!    manual-vs-learned switchover policy behind the `simcred` binary.
//!
//! See the crate `examples/` directory for one runnable example per
//! capability, and the `simcred` binary for the file-based CLI.

pub mod ahp;
pub mod credibility;
pub mod features;
pub mod fixtures;
pub(crate) mod fmtnum;
pub mod harness;
pub mod learn;
pub mod datagen;
pub mod workflow;

pub use ahp::{JudgmentMatrix, WeightVector};
pub use credibility::{compute_indices, credibility, Credibility, IndexVector};
pub use features::{extract_features, FeatureVector, HistoryLog};
pub use workflow::{parse_workflow, serialize_workflow, validate_graph, WorkflowGraph};
