//! Seeded synthetic evaluation databases.
//!
//! Substitutes for a private historical database: features are drawn
//! uniformly inside their declared ranges (with cross-feature couplings),
//! labels are computed through the index equations and weighting pipeline,
//! so every generated label can be re-derived from its own row. Features
//! are quantized to the CSV precision *before* labeling, which makes
//! zero-noise datasets byte-reproducible from disk.

use crate::ahp::{principal_eigenvector, JudgmentMatrix, WeightVector};
use crate::credibility::{compute_indices, credibility, IndexVector, INDEX_NAMES};
use crate::features::{FeatureVector, FEATURE_NAMES, FEATURE_RANGES};
use crate::fixtures;
use crate::fmtnum::fmt_sig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::PathBuf;
use thiserror::Error;

/// Where the index weights of a generated database come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    /// The bundled reference weight vector.
    Paper,
    /// AHP on a judgment matrix file (8x8 numeric grid).
    MatrixFile(PathBuf),
    /// Reference weights with seeded multiplicative log-normal noise,
    /// modeling shifting expert opinion.
    Perturbed { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub count: usize,
    pub seed: u64,
    pub weight_source: WeightSource,
    /// Standard deviation of Gaussian label noise, in credibility points.
    pub label_noise_sd: f64,
    /// Enforce the cross-feature couplings.
    pub coupling: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            count: 2000,
            seed: 42,
            weight_source: WeightSource::Paper,
            label_noise_sd: 0.0,
            coupling: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("weight matrix file `{path}`: {message}")]
    WeightFile { path: String, message: String },
    #[error("dataset file line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Origin of an evaluation record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Generated,
    ComputedFromWorkflow,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Generated => "generated",
            Provenance::ComputedFromWorkflow => "computed-from-workflow",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "generated" => Some(Provenance::Generated),
            "computed-from-workflow" => Some(Provenance::ComputedFromWorkflow),
            _ => None,
        }
    }
}

/// One row of the historical evaluation database.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRecord {
    pub features: FeatureVector,
    pub indices: IndexVector,
    pub credibility: f64,
    pub provenance: Provenance,
}

/// A generated database plus the weights that labeled it.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<EvaluationRecord>,
    pub weights: WeightVector,
    /// Noisy labels that had to be clamped back into [0, 100].
    pub clamped_labels: usize,
}

/// Quantizes a value to the 6-significant-digit CSV precision.
fn quantize(x: f64) -> f64 {
    fmt_sig(x, 6).parse().expect("formatted value reparses")
}

/// Quantizes every feature to the CSV precision, so that downstream labels
/// computed from the vector survive a round trip through the file format.
pub fn quantize_features(features: &FeatureVector) -> FeatureVector {
    FeatureVector::from_array(features.to_array().map(quantize))
}

/// Draws one feature vector: every field uniform in its declared range,
/// then coupled (`n_ex_para <= n_para`, `n_model <= n_active`,
/// `n_o <= n_active`, `t_bar` within 10% of `t_hat`). Count-like fields are
/// rounded to integers; `n_o` is an average and stays continuous.
pub fn sample_feature_vector(rng: &mut ChaCha8Rng, coupling: bool) -> FeatureVector {
    let uniform = |rng: &mut ChaCha8Rng, i: usize| -> f64 {
        let (lo, hi) = FEATURE_RANGES[i];
        rng.random_range(lo..=hi)
    };
    let p_match = uniform(rng, 0);
    let p_integrity = uniform(rng, 1);
    let t_hat = uniform(rng, 2);
    let t_bar = if coupling {
        rng.random_range(0.9 * t_hat..=1.1 * t_hat).clamp(30.0, 150.0)
    } else {
        uniform(rng, 3)
    };
    let v_t = uniform(rng, 4);
    let n_active = uniform(rng, 6).round();
    let n_o_raw = uniform(rng, 5);
    let n_o = if coupling { n_o_raw.min(n_active) } else { n_o_raw };
    let n_logic = uniform(rng, 7).round();
    let n_history = uniform(rng, 8).round();
    let p_hist_cons = uniform(rng, 9);
    let n_stimulate = uniform(rng, 10).round();
    let n_para = uniform(rng, 11).round();
    let n_ex_para_raw = uniform(rng, 12).round();
    let n_ex_para = if coupling {
        n_ex_para_raw.min(n_para)
    } else {
        n_ex_para_raw
    };
    let p_f = uniform(rng, 13);
    let p_s = uniform(rng, 14);
    let n_model_raw = uniform(rng, 15).round();
    let n_model = if coupling {
        n_model_raw.min(n_active)
    } else {
        n_model_raw
    };
    FeatureVector {
        p_match,
        p_integrity,
        t_hat,
        t_bar,
        v_t,
        n_o,
        n_active,
        n_logic,
        n_history,
        p_hist_cons,
        n_stimulate,
        n_para,
        n_ex_para,
        p_f,
        p_s,
        n_model,
    }
}

/// Resolves a weight source into a concrete weight vector.
pub fn resolve_weights(source: &WeightSource, seed: u64) -> Result<WeightVector, DatagenError> {
    match source {
        WeightSource::Paper => Ok(fixtures::reference_weights()),
        WeightSource::MatrixFile(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| DatagenError::WeightFile {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let matrix = JudgmentMatrix::parse(&text).map_err(|e| DatagenError::WeightFile {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            principal_eigenvector(&matrix).map_err(|e| DatagenError::WeightFile {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        }
        WeightSource::Perturbed { scale } => {
            if scale.is_nan() || *scale < 0.0 {
                return Err(DatagenError::Config(format!(
                    "perturbation scale must be non-negative, got {scale}"
                )));
            }
            // Separate stream so record sampling is unaffected by the
            // weight perturbation draws.
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57e1_6377);
            let noise = Normal::new(0.0, *scale)
                .map_err(|e| DatagenError::Config(e.to_string()))?;
            let perturbed: Vec<f64> = fixtures::REFERENCE_WEIGHTS
                .iter()
                .map(|w| w * noise.sample(&mut rng).exp())
                .collect();
            WeightVector::from_weights(&perturbed)
                .map_err(|e| DatagenError::Config(e.to_string()))
        }
    }
}

/// Generates the database: `count` records in a deterministic stream, each
/// labeled through the index pipeline, optionally with Gaussian noise.
pub fn generate_dataset(config: &GeneratorConfig) -> Result<Dataset, DatagenError> {
    if config.count == 0 {
        return Err(DatagenError::Config("count must be at least 1".to_string()));
    }
    if config.label_noise_sd.is_nan() || config.label_noise_sd < 0.0 {
        return Err(DatagenError::Config(format!(
            "label noise must be non-negative, got {}",
            config.label_noise_sd
        )));
    }
    let weights = resolve_weights(&config.weight_source, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = if config.label_noise_sd > 0.0 {
        Some(Normal::new(0.0, config.label_noise_sd).map_err(|e| DatagenError::Config(e.to_string()))?)
    } else {
        None
    };

    let mut records = Vec::with_capacity(config.count);
    let mut clamped_labels = 0usize;
    for _ in 0..config.count {
        let raw = sample_feature_vector(&mut rng, config.coupling);
        // Quantize first so the stored row reproduces the label exactly.
        let features = quantize_features(&raw);
        let indices = compute_indices(&features);
        let mut label = credibility(&indices, &weights).0;
        if let Some(noise) = &noise {
            label += noise.sample(&mut rng);
            if !(0.0..=100.0).contains(&label) {
                label = label.clamp(0.0, 100.0);
                clamped_labels += 1;
            }
        }
        records.push(EvaluationRecord {
            features,
            indices,
            credibility: label,
            provenance: Provenance::Generated,
        });
    }
    Ok(Dataset {
        records,
        weights,
        clamped_labels,
    })
}

/// The dataset CSV header: 16 feature columns, 8 index columns, the label
/// and the provenance.
pub fn dataset_header() -> String {
    let mut cols: Vec<&str> = FEATURE_NAMES.to_vec();
    cols.extend_from_slice(&INDEX_NAMES);
    cols.push("credibility");
    cols.push("provenance");
    cols.join(",")
}

pub fn record_to_csv_row(record: &EvaluationRecord) -> String {
    let mut fields: Vec<String> = record
        .features
        .to_array()
        .iter()
        .map(|v| fmt_sig(*v, 6))
        .collect();
    fields.extend(record.indices.to_array().iter().map(|v| fmt_sig(*v, 6)));
    fields.push(fmt_sig(record.credibility, 6));
    fields.push(record.provenance.as_str().to_string());
    fields.join(",")
}

pub fn records_to_csv(records: &[EvaluationRecord]) -> String {
    let mut out = dataset_header();
    out.push('\n');
    for record in records {
        out.push_str(&record_to_csv_row(record));
        out.push('\n');
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<Vec<EvaluationRecord>, DatagenError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| DatagenError::Malformed {
        line: 1,
        message: "missing header".to_string(),
    })?;
    if header.trim() != dataset_header() {
        return Err(DatagenError::Malformed {
            line: 1,
            message: "unexpected header".to_string(),
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 26 {
            return Err(DatagenError::Malformed {
                line: line_no,
                message: format!("expected 26 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, line: usize| -> Result<f64, DatagenError> {
            s.trim().parse().map_err(|_| DatagenError::Malformed {
                line,
                message: format!("bad number `{s}`"),
            })
        };
        let mut features = [0.0; 16];
        for (i, v) in features.iter_mut().enumerate() {
            *v = parse(fields[i], line_no)?;
        }
        let mut indices = [0.0; 8];
        for (i, v) in indices.iter_mut().enumerate() {
            *v = parse(fields[16 + i], line_no)?;
        }
        let credibility = parse(fields[24], line_no)?;
        let provenance =
            Provenance::parse(fields[25].trim()).ok_or_else(|| DatagenError::Malformed {
                line: line_no,
                message: format!("bad provenance `{}`", fields[25]),
            })?;
        records.push(EvaluationRecord {
            features: FeatureVector::from_array(features),
            indices: IndexVector::from_array(indices),
            credibility,
            provenance,
        });
    }
    Ok(records)
}
