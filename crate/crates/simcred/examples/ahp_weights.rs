//! AHP weighting in isolation: consistent matrices recover their generating
//! ratios exactly, inconsistent ones are flagged by the consistency ratio.
//!
//! ```bash
//! cargo run -p simcred --example ahp_weights
//! ```

use simcred::ahp::{consistency_check, principal_eigenvector, JudgmentMatrix};
use simcred::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The bundled expert judgment over the eight evaluation indices.
    let weights = principal_eigenvector(&fixtures::reference_judgment_matrix())?;
    println!("expert matrix weights:");
    for (i, w) in weights.weights.iter().enumerate() {
        println!("  w{} = {w:.4}", i + 1);
    }
    println!(
        "  lambda_max = {:.4}, CI = {:.4}, CR = {:.4}, acceptable = {}",
        weights.lambda_max,
        weights.ci,
        weights.cr,
        consistency_check(&weights)
    );

    // A perfectly consistent matrix built from known ratios.
    let ratios = [4.0, 2.0, 1.0, 0.5];
    let consistent = JudgmentMatrix::consistent_from(&ratios)?;
    let wv = principal_eigenvector(&consistent)?;
    println!("\nconsistent 4x4 ratio matrix:");
    println!("  weights = {:?}", wv.weights);
    println!("  CR = {:.2e} (exactly consistent)", wv.cr);

    // A contradictory judgment: a >> b, b >> c, yet c >> a.
    let mut rows = vec![vec![1.0; 8]; 8];
    rows[0][1] = 9.0;
    rows[1][0] = 1.0 / 9.0;
    rows[1][2] = 9.0;
    rows[2][1] = 1.0 / 9.0;
    rows[0][2] = 1.0 / 9.0;
    rows[2][0] = 9.0;
    let contradictory = JudgmentMatrix::new(rows)?;
    let wv = principal_eigenvector(&contradictory)?;
    println!("\ncontradictory triple embedded in an 8x8 matrix:");
    println!(
        "  CR = {:.4} -> acceptable = {} (expert should re-score)",
        wv.cr,
        consistency_check(&wv)
    );
    Ok(())
}
