//! Golden checks behind `validate-pipeline`: the bundled worked example
//! must reproduce its reference values, and the documented divergences must
//! stay divergent (proving they are intentional, not drift).

use crate::ahp::principal_eigenvector;
use crate::credibility::{credibility, IndexVector, INDEX_NAMES};
use crate::features::FeatureVector;
use crate::fixtures;

/// How a golden check compares actual against expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// `|actual - expected| <= tolerance`.
    Within,
    /// `|actual - expected| > tolerance` (locked-in divergence).
    Beyond,
}

#[derive(Debug, Clone)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub mode: CheckMode,
}

impl GoldenCheck {
    pub fn passed(&self) -> bool {
        let diff = (self.actual - self.expected).abs();
        match self.mode {
            CheckMode::Within => diff <= self.tolerance,
            CheckMode::Beyond => diff > self.tolerance,
        }
    }

    pub fn describe(&self) -> String {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        let relation = match self.mode {
            CheckMode::Within => "within",
            CheckMode::Beyond => "beyond",
        };
        format!(
            "[{verdict}] {}: actual {:.6}, expected {:.6} ({relation} {:.0e})",
            self.name, self.actual, self.expected, self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct GoldenReport {
    pub checks: Vec<GoldenCheck>,
}

impl GoldenReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(GoldenCheck::passed)
    }
}

/// Index scores the defining equations produce on the reference sample for
/// the three reference values they do not reproduce.
pub const DIVERGENT_EQUATION_VALUES: [(usize, f64); 3] =
    [(1, 0.9788), (3, 0.7237), (7, 0.8365)];

/// Indices whose reference scores the equations do reproduce.
pub const MATCHING_INDICES: [usize; 5] = [0, 2, 4, 5, 6];

/// Runs every golden check with the supplied index computation, normally
/// [`crate::credibility::compute_indices`]. Taking the function as an
/// argument lets the self-check mutation mode reuse the whole report.
pub fn golden_report_with(index_fn: &dyn Fn(&FeatureVector) -> IndexVector) -> GoldenReport {
    let mut checks = Vec::new();
    let sample = fixtures::reference_feature_sample();
    let computed = index_fn(&sample).to_array();
    let reference = fixtures::REFERENCE_INDEX_SCORES;

    for &i in &MATCHING_INDICES {
        checks.push(GoldenCheck {
            name: format!("index {} matches the reference score", INDEX_NAMES[i]),
            expected: reference[i],
            actual: computed[i],
            tolerance: 5e-4,
            mode: CheckMode::Within,
        });
    }
    for &(i, equation_value) in &DIVERGENT_EQUATION_VALUES {
        checks.push(GoldenCheck {
            name: format!("index {} follows its defining equation", INDEX_NAMES[i]),
            expected: equation_value,
            actual: computed[i],
            tolerance: 5e-4,
            mode: CheckMode::Within,
        });
        checks.push(GoldenCheck {
            name: format!(
                "index {} intentionally diverges from the reference score",
                INDEX_NAMES[i]
            ),
            expected: reference[i],
            actual: computed[i],
            tolerance: 0.05,
            mode: CheckMode::Beyond,
        });
    }

    let weights = principal_eigenvector(&fixtures::reference_judgment_matrix())
        .expect("reference matrix converges");
    for (i, (computed_w, reference_w)) in weights
        .weights
        .iter()
        .zip(fixtures::REFERENCE_WEIGHTS.iter())
        .enumerate()
    {
        checks.push(GoldenCheck {
            name: format!("weight {} from the judgment matrix", i + 1),
            expected: *reference_w,
            actual: *computed_w,
            tolerance: 2e-3,
            mode: CheckMode::Within,
        });
    }
    checks.push(GoldenCheck {
        name: "weights sum to one".to_string(),
        expected: 1.0,
        actual: weights.weights.iter().sum(),
        tolerance: 1e-9,
        mode: CheckMode::Within,
    });
    checks.push(GoldenCheck {
        name: "judgment matrix is consistent (CR below 0.1)".to_string(),
        expected: 0.0,
        actual: weights.cr,
        tolerance: 0.1,
        mode: CheckMode::Within,
    });

    let reference_scores = IndexVector::from_array(reference);
    checks.push(GoldenCheck {
        name: "credibility of the reference scores".to_string(),
        expected: fixtures::REFERENCE_CREDIBILITY,
        actual: credibility(&reference_scores, &weights).0,
        tolerance: 0.05,
        mode: CheckMode::Within,
    });

    GoldenReport { checks }
}

/// The production golden report.
pub fn golden_report() -> GoldenReport {
    golden_report_with(&crate::credibility::compute_indices)
}

/// Index computation with the robustness exponent sign deliberately broken,
/// used by the `validate-pipeline` self-check to prove the goldens detect a
/// mutated pipeline.
pub fn robustness_sign_mutation(f: &FeatureVector) -> IndexVector {
    let mut x = crate::credibility::compute_indices(f).to_array();
    x[4] = if f.n_active > 0.0 {
        (f.n_model / f.n_active).exp().clamp(0.0, 1.0)
    } else {
        1.0
    };
    IndexVector::from_array(x)
}
