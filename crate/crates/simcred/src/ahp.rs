//! Analytic-hierarchy-process weighting: pairwise judgment matrices, the
//! dominant eigenvector by power iteration, and Saaty consistency checking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Saaty random consistency index, indexed by matrix order (`RI[n]`, n = 1..=8).
pub const RANDOM_INDEX: [f64; 9] = [0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41];

/// Consistency-ratio acceptance threshold.
pub const CR_THRESHOLD: f64 = 0.1;

/// Tolerance used when reporting reciprocity deviations.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-2;

const MAX_ITERATIONS: usize = 1000;
const CONVERGENCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AhpError {
    #[error("judgment matrix must be square, row {row} has {got} entries (expected {expected})")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("judgment matrix order {0} not supported (need 1..=8 for the consistency index)")]
    UnsupportedOrder(usize),
    #[error("judgment matrix entry ({row},{col}) = {value} must be positive and finite")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("judgment matrix diagonal entry ({0},{0}) must be 1")]
    DiagonalNotOne(usize),
    #[error("could not parse matrix cell `{cell}` on line {line}")]
    ParseCell { line: usize, cell: String },
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("weights must be positive and have a positive sum")]
    InvalidWeights,
}

/// A positive pairwise-comparison matrix.
///
/// Hard invariants (enforced on construction): square shape, positive finite
/// entries, unit diagonal. Reciprocity (`a_ij * a_ji = 1`) is reported as a
/// diagnostic, not enforced: judgment tables scored by hand routinely carry
/// rounded or transcribed entries that break it, and positivity alone
/// guarantees a dominant positive eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentMatrix {
    n: usize,
    entries: Vec<f64>,
}

/// One reciprocity deviation: `|a_ij * a_ji - 1| > tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocityDeviation {
    pub row: usize,
    pub col: usize,
    pub product: f64,
}

impl JudgmentMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, AhpError> {
        let n = rows.len();
        if n == 0 || n > 8 {
            return Err(AhpError::UnsupportedOrder(n));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(AhpError::NotSquare {
                    row: i + 1,
                    got: row.len(),
                    expected: n,
                });
            }
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() || value <= 0.0 {
                    return Err(AhpError::NonPositiveEntry {
                        row: i + 1,
                        col: j + 1,
                        value,
                    });
                }
                entries.push(value);
            }
        }
        for i in 0..n {
            if (entries[i * n + i] - 1.0).abs() > 1e-9 {
                return Err(AhpError::DiagonalNotOne(i + 1));
            }
        }
        Ok(JudgmentMatrix { n, entries })
    }

    /// Parses a delimiter-separated numeric grid (commas, spaces or tabs).
    pub fn parse(text: &str) -> Result<Self, AhpError> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for cell in trimmed.split(|c: char| c == ',' || c.is_whitespace()) {
                if cell.is_empty() {
                    continue;
                }
                let value: f64 = cell.parse().map_err(|_| AhpError::ParseCell {
                    line: idx + 1,
                    cell: cell.to_string(),
                })?;
                row.push(value);
            }
            rows.push(row);
        }
        JudgmentMatrix::new(rows)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    /// Scales every entry by a positive factor (the dominant eigenvector is
    /// invariant under this; the eigenvalue scales with it).
    pub fn scaled(&self, factor: f64) -> JudgmentMatrix {
        JudgmentMatrix {
            n: self.n,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// Builds the exactly consistent matrix `a_ij = v_i / v_j`.
    pub fn consistent_from(values: &[f64]) -> Result<Self, AhpError> {
        let rows = values
            .iter()
            .map(|vi| values.iter().map(|vj| vi / vj).collect())
            .collect();
        JudgmentMatrix::new(rows)
    }

    /// All pairs whose product deviates from 1 by more than `tolerance`.
    pub fn reciprocity_deviations(&self, tolerance: f64) -> Vec<ReciprocityDeviation> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let product = self.entry(i, j) * self.entry(j, i);
                if (product - 1.0).abs() > tolerance {
                    out.push(ReciprocityDeviation {
                        row: i + 1,
                        col: j + 1,
                        product,
                    });
                }
            }
        }
        out
    }

    pub fn is_reciprocal(&self, tolerance: f64) -> bool {
        self.reciprocity_deviations(tolerance).is_empty()
    }
}

/// Normalized dominant eigenvector of a judgment matrix together with its
/// consistency diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
}

impl WeightVector {
    /// Wraps literal weights, normalizing them to sum 1. The diagnostics are
    /// those of the exactly consistent ratio matrix the weights imply:
    /// `lambda_max = n`, `ci = cr = 0`.
    pub fn from_weights(weights: &[f64]) -> Result<Self, AhpError> {
        let n = weights.len();
        if n == 0 || n > 8 || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(AhpError::InvalidWeights);
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(AhpError::InvalidWeights);
        }
        Ok(WeightVector {
            weights: weights.iter().map(|w| w / sum).collect(),
            lambda_max: n as f64,
            ci: 0.0,
            cr: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Saaty acceptance: CR below [`CR_THRESHOLD`].
    pub fn is_acceptable(&self) -> bool {
        consistency_check(self)
    }
}

/// Power iteration with a uniform start vector, normalized to sum 1 each
/// step. Converges for any positive matrix by Perron-Frobenius dominance.
pub fn principal_eigenvector(matrix: &JudgmentMatrix) -> Result<WeightVector, AhpError> {
    let n = matrix.size();
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = (0..n).map(|j| matrix.entry(i, j) * v[j]).sum();
        }
        let sum: f64 = w.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(AhpError::NonConvergence(MAX_ITERATIONS));
        }
        for wi in w.iter_mut() {
            *wi /= sum;
        }
        let max_rel_change = w
            .iter()
            .zip(v.iter())
            .map(|(new, old)| ((new - old) / old).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut w);
        if max_rel_change < CONVERGENCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AhpError::NonConvergence(MAX_ITERATIONS));
    }

    // Rayleigh quotient for the dominant eigenvalue.
    let av: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| matrix.entry(i, j) * v[j]).sum())
        .collect();
    let lambda_max = v.iter().zip(av.iter()).map(|(x, y)| x * y).sum::<f64>()
        / v.iter().map(|x| x * x).sum::<f64>();

    let ci = if n > 1 {
        (lambda_max - n as f64) / (n as f64 - 1.0)
    } else {
        0.0
    };
    let ri = RANDOM_INDEX[n];
    let cr = if ri > 0.0 { ci / ri } else { 0.0 };

    Ok(WeightVector {
        weights: v,
        lambda_max,
        ci,
        cr,
    })
}

/// Saaty convention: the judgment is acceptable when CR < 0.1.
pub fn consistency_check(weights: &WeightVector) -> bool {
    weights.cr < CR_THRESHOLD
}
