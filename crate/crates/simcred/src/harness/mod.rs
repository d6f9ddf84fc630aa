//! Experiment harness behind the `simcred` binary: evaluate workflows,
//! derive AHP weights, generate databases, benchmark the learners, drive
//! the switchover policy and run the golden checks.

pub mod golden;
pub mod metrics;
pub mod plot;
pub mod switchover;

use crate::ahp::{principal_eigenvector, JudgmentMatrix, WeightVector, RECIPROCITY_TOLERANCE};
use crate::credibility::{compute_indices, credibility, INDEX_NAMES};
use crate::datagen::{
    self, generate_dataset, parse_dataset, records_to_csv, EvaluationRecord, GeneratorConfig,
    Provenance, WeightSource,
};
use crate::features::{extract_features, FeatureVector, HistoryLog, FEATURE_NAMES};
use crate::fmtnum::fmt_sig;
use crate::learn::{
    BpConfig, BpNetwork, ElmConfig, ElmNetwork, EnfnConfig, EnfnModel, FigmnConfig, FigmnModel,
    MfShape, Regressor, Sample,
};
use crate::workflow::{parse_workflow, validate_graph, Severity};
use metrics::{errors_csv, metrics_csv_header, metrics_csv_row, ErrorRecord, LearnerMetrics};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Harness-level failure, mapped onto the binary's exit codes.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("golden checks failed")]
    GoldenFailure,
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Input(_) => 2,
            HarnessError::GoldenFailure => 3,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Input(e.to_string())
}

fn read_file(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
}

/// The learner roster of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Bp,
    Elm,
    EnfnTri,
    EnfnGauss,
    Figmn,
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Bp => "bp",
            LearnerKind::Elm => "elm",
            LearnerKind::EnfnTri => "enfn-tri",
            LearnerKind::EnfnGauss => "enfn-gauss",
            LearnerKind::Figmn => "figmn",
        }
    }

    pub fn is_incremental(&self) -> bool {
        matches!(
            self,
            LearnerKind::EnfnTri | LearnerKind::EnfnGauss | LearnerKind::Figmn
        )
    }

    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::Bp,
        LearnerKind::Elm,
        LearnerKind::EnfnTri,
        LearnerKind::EnfnGauss,
        LearnerKind::Figmn,
    ];

    /// Parses a comma-separated roster. A bare `enfn` resolves through the
    /// membership-function flag.
    pub fn parse_list(spec: &str, default_mf: MfShape) -> Result<Vec<LearnerKind>, HarnessError> {
        let mut out = Vec::new();
        for part in spec.split(',') {
            let part = part.trim();
            let kind = match part {
                "bp" => LearnerKind::Bp,
                "elm" => LearnerKind::Elm,
                "enfn-tri" => LearnerKind::EnfnTri,
                "enfn-gauss" => LearnerKind::EnfnGauss,
                "enfn" => match default_mf {
                    MfShape::Triangular => LearnerKind::EnfnTri,
                    MfShape::Gaussian => LearnerKind::EnfnGauss,
                },
                "figmn" => LearnerKind::Figmn,
                "all" => {
                    out.extend_from_slice(&LearnerKind::ALL);
                    continue;
                }
                other => {
                    return Err(HarnessError::Usage(format!(
                        "unknown learner `{other}` (expected bp, elm, enfn, enfn-tri, enfn-gauss, figmn or all)"
                    )))
                }
            };
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(HarnessError::Usage("no learners selected".to_string()));
        }
        Ok(out)
    }
}

/// Where benchmark records come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    File(PathBuf),
    Generate(GeneratorConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// Train on the first `train` records, test on the next `test`.
    Holdout { train: usize, test: usize },
    /// Prequential predict-then-learn over the whole stream.
    OnlineStream,
}

impl Split {
    /// Parses `TRAIN/TEST` or `online`.
    pub fn parse(spec: &str) -> Result<Split, HarnessError> {
        if spec == "online" {
            return Ok(Split::OnlineStream);
        }
        let parts: Vec<&str> = spec.split('/').collect();
        if parts.len() == 2 {
            let train = parts[0].parse().ok();
            let test = parts[1].parse().ok();
            if let (Some(train), Some(test)) = (train, test) {
                return Ok(Split::Holdout { train, test });
            }
        }
        Err(HarnessError::Usage(format!(
            "bad split `{spec}` (expected TRAIN/TEST or `online`)"
        )))
    }
}

/// Full configuration of a benchmark run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub split: Split,
    pub learners: Vec<LearnerKind>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub bp_epoch_cap: usize,
    pub bp_target_mse: f64,
    pub elm_hidden: usize,
    pub elm_ridge: f64,
    /// Initial-covariance scale of the mixture learner. The classical 0.01
    /// collapses on high-dimensional uniform data; benchmarks use 1.0.
    pub figmn_delta: f64,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, split: Split, learners: Vec<LearnerKind>, out_dir: PathBuf) -> Self {
        ExperimentConfig {
            data,
            split,
            learners,
            seed: 42,
            out_dir,
            bp_epoch_cap: 300,
            bp_target_mse: 1e-4,
            elm_hidden: 100,
            elm_ridge: 1e-6,
            figmn_delta: 1.0,
        }
    }

    pub fn build_learner(&self, kind: LearnerKind) -> Box<dyn Regressor> {
        match kind {
            LearnerKind::Bp => Box::new(BpNetwork::new(BpConfig {
                epoch_cap: self.bp_epoch_cap,
                target_mse: self.bp_target_mse,
                seed: self.seed,
                ..BpConfig::default()
            })),
            LearnerKind::Elm => Box::new(ElmNetwork::new(ElmConfig {
                hidden_count: self.elm_hidden,
                ridge: self.elm_ridge,
                seed: self.seed,
            })),
            LearnerKind::EnfnTri => Box::new(EnfnModel::new(EnfnConfig::default())),
            LearnerKind::EnfnGauss => Box::new(EnfnModel::new(EnfnConfig {
                shape: MfShape::Gaussian,
                ..EnfnConfig::default()
            })),
            LearnerKind::Figmn => Box::new(FigmnModel::new(FigmnConfig {
                delta: self.figmn_delta,
                ..FigmnConfig::default()
            })),
        }
    }
}

/// One learner's results within a benchmark.
#[derive(Debug, Clone)]
pub struct LearnerRun {
    pub metrics: LearnerMetrics,
    pub errors: Vec<ErrorRecord>,
    pub warnings: Vec<String>,
}

/// Results of a whole benchmark, including the predict-the-mean baseline.
#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub runs: Vec<LearnerRun>,
    pub baseline: LearnerRun,
    /// Learners that failed, with the failure message; the run continues
    /// without them.
    pub failures: Vec<(String, String)>,
}

impl BenchmarkReport {
    pub fn run(&self, learner: &str) -> Option<&LearnerRun> {
        self.runs.iter().find(|r| r.metrics.learner == learner)
    }
}

pub fn load_records(data: &DataSource) -> Result<Vec<EvaluationRecord>, HarnessError> {
    match data {
        DataSource::File(path) => parse_dataset(&read_file(path)?).map_err(input_err),
        DataSource::Generate(config) => {
            Ok(generate_dataset(config).map_err(input_err)?.records)
        }
    }
}

/// Runs the configured learners over the records. Pure computation; file
/// emission lives in [`write_benchmark_outputs`].
pub fn run_benchmark(
    config: &ExperimentConfig,
    records: &[EvaluationRecord],
) -> Result<BenchmarkReport, HarnessError> {
    let samples: Vec<Sample> = records
        .iter()
        .map(|r| Sample::new(&r.features, r.credibility))
        .collect();

    let (train, test) = match config.split {
        Split::Holdout { train, test } => {
            if train + test > samples.len() {
                return Err(HarnessError::Usage(format!(
                    "split {train}/{test} exceeds the {} available records",
                    samples.len()
                )));
            }
            if train == 0 || test == 0 {
                return Err(HarnessError::Usage(
                    "both split sides must be positive".to_string(),
                ));
            }
            (&samples[..train], &samples[train..train + test])
        }
        Split::OnlineStream => (&samples[..0], &samples[..]),
    };

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &kind in &config.learners {
        match run_one_learner(config, kind, train, test) {
            Ok(run) => runs.push(run),
            Err(e) => failures.push((kind.name().to_string(), e.to_string())),
        }
    }

    let baseline = run_baseline(config.split, train, test);
    Ok(BenchmarkReport {
        runs,
        baseline,
        failures,
    })
}

fn run_one_learner(
    config: &ExperimentConfig,
    kind: LearnerKind,
    train: &[Sample],
    test: &[Sample],
) -> Result<LearnerRun, HarnessError> {
    let mut model = config.build_learner(kind);
    match config.split {
        Split::Holdout { .. } => {
            let mut warnings = Vec::new();
            if kind.is_incremental() {
                for sample in train {
                    model.learn_one(sample).map_err(input_err)?;
                }
            } else {
                let report = model.fit(train).map_err(input_err)?;
                warnings.extend(report.warnings);
            }
            let mut errors = Vec::with_capacity(test.len());
            for (index, sample) in test.iter().enumerate() {
                let predicted = model.predict(&sample.features).map_err(input_err)?;
                errors.push(ErrorRecord {
                    index,
                    actual: sample.credibility,
                    predicted,
                });
            }
            let metrics = metrics::summarize(kind.name(), "offline", &errors, false);
            Ok(LearnerRun {
                metrics,
                errors,
                warnings,
            })
        }
        Split::OnlineStream => {
            if !kind.is_incremental() {
                return Err(HarnessError::Usage(format!(
                    "{} cannot run on an online stream",
                    kind.name()
                )));
            }
            let mut errors = Vec::with_capacity(test.len());
            for (index, sample) in test.iter().enumerate() {
                let predicted = model.learn_one(sample).map_err(input_err)?;
                errors.push(ErrorRecord {
                    index,
                    actual: sample.credibility,
                    predicted,
                });
            }
            let metrics = metrics::summarize(kind.name(), "online", &errors, true);
            Ok(LearnerRun {
                metrics,
                errors,
                warnings: Vec::new(),
            })
        }
    }
}

fn run_baseline(split: Split, train: &[Sample], test: &[Sample]) -> LearnerRun {
    let mut errors = Vec::with_capacity(test.len());
    match split {
        Split::Holdout { .. } => {
            let mean = train.iter().map(|s| s.credibility).sum::<f64>() / train.len() as f64;
            for (index, sample) in test.iter().enumerate() {
                errors.push(ErrorRecord {
                    index,
                    actual: sample.credibility,
                    predicted: mean,
                });
            }
            LearnerRun {
                metrics: metrics::summarize("baseline-mean", "offline", &errors, false),
                errors,
                warnings: Vec::new(),
            }
        }
        Split::OnlineStream => {
            // Prequential running mean: predict the mean of the labels seen
            // so far, then absorb the current label.
            let mut mean = 50.0;
            let mut count = 0usize;
            for (index, sample) in test.iter().enumerate() {
                errors.push(ErrorRecord {
                    index,
                    actual: sample.credibility,
                    predicted: mean,
                });
                count += 1;
                mean += (sample.credibility - mean) / count as f64;
            }
            LearnerRun {
                metrics: metrics::summarize("baseline-mean", "online", &errors, true),
                errors,
                warnings: Vec::new(),
            }
        }
    }
}

/// Writes `metrics.csv`, per-learner error series and plots.
pub fn write_benchmark_outputs(
    report: &BenchmarkReport,
    out_dir: &Path,
) -> Result<(), HarnessError> {
    let mut metrics_text = String::from(metrics_csv_header());
    metrics_text.push('\n');
    for run in report.runs.iter().chain(std::iter::once(&report.baseline)) {
        metrics_text.push_str(&metrics_csv_row(&run.metrics));
        metrics_text.push('\n');
    }
    write_file(&out_dir.join("metrics.csv"), &metrics_text)?;

    for run in report.runs.iter().chain(std::iter::once(&report.baseline)) {
        let name = &run.metrics.learner;
        write_file(
            &out_dir.join(format!("errors_{name}.csv")),
            &errors_csv(&run.errors),
        )?;
        let series = vec![(
            name.clone(),
            run.errors
                .iter()
                .map(|e| (e.index as f64, e.abs_error()))
                .collect::<Vec<_>>(),
        )];
        let svg = plot::line_plot_svg(
            &format!("absolute prediction error: {name}"),
            "record",
            "absolute error",
            &series,
        );
        write_file(&out_dir.join(format!("plot_{name}.svg")), &svg)?;
    }
    Ok(())
}

/// Loads a weight specification, returning the vector plus human-readable
/// notes (reciprocity deviations, consistency verdict).
pub fn load_weights(source: &WeightSource, seed: u64) -> Result<(WeightVector, Vec<String>), HarnessError> {
    let mut notes = Vec::new();
    let weights = match source {
        WeightSource::MatrixFile(path) => {
            let matrix = JudgmentMatrix::parse(&read_file(path)?).map_err(input_err)?;
            for deviation in matrix.reciprocity_deviations(RECIPROCITY_TOLERANCE) {
                notes.push(format!(
                    "warning: entries ({r},{c}) and ({c},{r}) are not reciprocal (product {p:.5})",
                    r = deviation.row,
                    c = deviation.col,
                    p = deviation.product
                ));
            }
            let wv = principal_eigenvector(&matrix).map_err(input_err)?;
            if !wv.is_acceptable() {
                notes.push(format!(
                    "warning: judgment matrix inconsistent (CR = {:.4} >= 0.1), weights unreliable",
                    wv.cr
                ));
            }
            wv
        }
        other => datagen::resolve_weights(other, seed).map_err(input_err)?,
    };
    Ok((weights, notes))
}

/// Parses `--weights paper|FILE|perturbed:SCALE`.
pub fn parse_weight_source(spec: &str) -> Result<WeightSource, HarnessError> {
    if spec == "paper" {
        return Ok(WeightSource::Paper);
    }
    if let Some(scale) = spec.strip_prefix("perturbed:") {
        let scale: f64 = scale.parse().map_err(|_| {
            HarnessError::Usage(format!("bad perturbation scale in `{spec}`"))
        })?;
        return Ok(WeightSource::Perturbed { scale });
    }
    Ok(WeightSource::MatrixFile(PathBuf::from(spec)))
}

/// Outcome of `evaluate`, kept structured for printing and testing.
pub struct EvaluationOutput {
    pub features: FeatureVector,
    pub indices: crate::credibility::IndexVector,
    pub weights: WeightVector,
    pub credibility: f64,
    pub notes: Vec<String>,
}

/// Full single-workflow evaluation: parse, validate, extract, score, append
/// to the database file and emit the metrics rows.
pub fn cmd_evaluate(
    workflow_path: &Path,
    history_path: &Path,
    node_failures_path: Option<&Path>,
    weight_source: &WeightSource,
    seed: u64,
    db_path: &Path,
    out_dir: &Path,
) -> Result<EvaluationOutput, HarnessError> {
    let graph = parse_workflow(&read_file(workflow_path)?)
        .map_err(|e| HarnessError::Input(format!("{}: {e}", workflow_path.display())))?;
    let report = validate_graph(&graph);
    let mut notes = Vec::new();
    for entry in &report.entries {
        notes.push(entry.to_string());
    }
    if !report.is_structurally_valid() {
        return Err(HarnessError::Input(format!(
            "{}: workflow is structurally invalid:\n  {}",
            workflow_path.display(),
            report
                .entries
                .iter()
                .filter(|e| e.severity == Severity::Violation)
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("\n  ")
        )));
    }

    let runs = HistoryLog::parse_runs(&read_file(history_path)?)
        .map_err(|e| HarnessError::Input(format!("{}: {e}", history_path.display())))?;
    let node_failures = match node_failures_path {
        Some(path) => HistoryLog::parse_node_failures(&read_file(path)?)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?,
        None => Vec::new(),
    };
    let history = HistoryLog {
        runs,
        node_failures,
    };

    let extraction = extract_features(&graph, &history).map_err(input_err)?;
    for warning in &extraction.warnings {
        notes.push(warning.to_string());
    }
    let (weights, weight_notes) = load_weights(weight_source, seed)?;
    notes.extend(weight_notes);

    let indices = compute_indices(&extraction.features);
    let score = credibility(&indices, &weights).0;

    // Append to the historical database.
    let record = EvaluationRecord {
        features: extraction.features,
        indices,
        credibility: score,
        provenance: Provenance::ComputedFromWorkflow,
    };
    let mut db_text = if db_path.exists() {
        read_file(db_path)?
    } else {
        let mut header = datagen::dataset_header();
        header.push('\n');
        header
    };
    db_text.push_str(&datagen::record_to_csv_row(&record));
    db_text.push('\n');
    write_file(db_path, &db_text)?;

    // Named key-value metrics rows.
    let mut metrics_text = String::from("metric,value\n");
    for (name, value) in FEATURE_NAMES.iter().zip(extraction.features.to_array()) {
        let _ = writeln!(metrics_text, "{name},{}", fmt_sig(value, 6));
    }
    for (name, value) in INDEX_NAMES.iter().zip(indices.to_array()) {
        let _ = writeln!(metrics_text, "{name},{}", fmt_sig(value, 6));
    }
    for (i, w) in weights.weights.iter().enumerate() {
        let _ = writeln!(metrics_text, "w{},{}", i + 1, fmt_sig(*w, 6));
    }
    let _ = writeln!(metrics_text, "lambda_max,{}", fmt_sig(weights.lambda_max, 6));
    let _ = writeln!(metrics_text, "ci,{}", fmt_sig(weights.ci, 6));
    let _ = writeln!(metrics_text, "cr,{}", fmt_sig(weights.cr, 6));
    let _ = writeln!(metrics_text, "credibility,{}", fmt_sig(score, 6));
    write_file(&out_dir.join("metrics.csv"), &metrics_text)?;

    Ok(EvaluationOutput {
        features: extraction.features,
        indices,
        weights,
        credibility: score,
        notes,
    })
}

/// AHP on a judgment matrix file: weights, eigenvalue, consistency verdict.
pub fn cmd_ahp(matrix_path: &Path, out_dir: &Path) -> Result<(WeightVector, Vec<String>), HarnessError> {
    let source = WeightSource::MatrixFile(matrix_path.to_path_buf());
    let (weights, notes) = load_weights(&source, 0)?;
    let mut metrics_text = String::from("metric,value\n");
    for (i, w) in weights.weights.iter().enumerate() {
        let _ = writeln!(metrics_text, "w{},{}", i + 1, fmt_sig(*w, 6));
    }
    let _ = writeln!(metrics_text, "lambda_max,{}", fmt_sig(weights.lambda_max, 6));
    let _ = writeln!(metrics_text, "ci,{}", fmt_sig(weights.ci, 6));
    let _ = writeln!(metrics_text, "cr,{}", fmt_sig(weights.cr, 6));
    let _ = writeln!(
        metrics_text,
        "acceptable,{}",
        if weights.is_acceptable() { 1 } else { 0 }
    );
    write_file(&out_dir.join("metrics.csv"), &metrics_text)?;
    Ok((weights, notes))
}

/// Generates a synthetic database and writes `dataset.csv`.
pub fn cmd_generate(config: &GeneratorConfig, out_dir: &Path) -> Result<datagen::Dataset, HarnessError> {
    let dataset = generate_dataset(config).map_err(input_err)?;
    write_file(&out_dir.join("dataset.csv"), &records_to_csv(&dataset.records))?;
    Ok(dataset)
}

/// Runs a benchmark and writes all its outputs.
pub fn cmd_benchmark(config: &ExperimentConfig) -> Result<BenchmarkReport, HarnessError> {
    let records = load_records(&config.data)?;
    let report = run_benchmark(config, &records)?;
    write_benchmark_outputs(&report, &config.out_dir)?;
    if let DataSource::Generate(_) = config.data {
        write_file(&config.out_dir.join("dataset.csv"), &records_to_csv(&records))?;
    }
    Ok(report)
}

/// Per-query switchover simulation results.
pub struct SwitchoverSummary {
    pub manual: usize,
    pub empirical: usize,
    pub fallbacks: usize,
}

/// Simulates a stream of evaluation queries through the switchover policy,
/// growing the database file as manual evaluations happen. Incremental
/// learners update per manual record; batch learners are fitted from the
/// database when the empirical path first opens.
#[allow(clippy::too_many_arguments)]
pub fn cmd_switchover(
    queries: usize,
    threshold: usize,
    seed: u64,
    weight_source: &WeightSource,
    learners: &[LearnerKind],
    db_path: &Path,
    out_dir: &Path,
    figmn_delta: f64,
) -> Result<SwitchoverSummary, HarnessError> {
    let database = if db_path.exists() {
        parse_dataset(&read_file(db_path)?).map_err(input_err)?
    } else {
        Vec::new()
    };
    let (weights, _) = load_weights(weight_source, seed)?;
    let config = ExperimentConfig {
        figmn_delta,
        ..ExperimentConfig::new(
            DataSource::Generate(GeneratorConfig::default()),
            Split::OnlineStream,
            learners.to_vec(),
            out_dir.to_path_buf(),
        )
    };
    let built: Vec<Box<dyn Regressor>> =
        learners.iter().map(|&k| config.build_learner(k)).collect();
    let mut state = switchover::SwitchoverState::new(
        switchover::SwitchoverPolicy { threshold },
        database,
        built,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = String::from("query,path,credibility,fallback\n");
    let mut summary = SwitchoverSummary {
        manual: 0,
        empirical: 0,
        fallbacks: 0,
    };
    for q in 0..queries {
        let features = datagen::quantize_features(&datagen::sample_feature_vector(&mut rng, true));
        let outcome = state.apply(&features, &weights, Provenance::Generated);
        match outcome.path {
            switchover::PathTaken::Manual => summary.manual += 1,
            switchover::PathTaken::Empirical => summary.empirical += 1,
        }
        if outcome.fallback {
            summary.fallbacks += 1;
        }
        let _ = writeln!(
            rows,
            "{q},{},{},{}",
            outcome.path.as_str(),
            fmt_sig(outcome.credibility, 6),
            if outcome.fallback { 1 } else { 0 }
        );
    }
    write_file(&out_dir.join("switchover.csv"), &rows)?;
    write_file(db_path, &records_to_csv(&state.database))?;
    Ok(summary)
}

/// Runs the golden checks. `mutate` swaps in the robustness sign mutation
/// to prove the checks can fail. The caller prints the per-check lines and
/// maps a failing report to the golden-failure exit code.
pub fn cmd_validate_pipeline(mutate: bool) -> golden::GoldenReport {
    if mutate {
        golden::golden_report_with(&golden::robustness_sign_mutation)
    } else {
        golden::golden_report()
    }
}
