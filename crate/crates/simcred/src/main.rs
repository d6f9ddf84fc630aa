//! Thin command-line front end over the `simcred` library.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 golden-check
//! failure.

use clap::{Parser, Subcommand, ValueEnum};
use simcred::credibility::INDEX_NAMES;
use simcred::datagen::GeneratorConfig;
use simcred::features::FEATURE_NAMES;
use simcred::harness::{
    self, cmd_validate_pipeline, DataSource, ExperimentConfig, HarnessError, LearnerKind, Split,
};
use simcred::learn::MfShape;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "simcred",
    version,
    about = "Credibility scoring for simulation workflows: closed-form indices, AHP weighting and learned evaluation models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MfArg {
    Triangular,
    Gaussian,
}

impl From<MfArg> for MfShape {
    fn from(value: MfArg) -> Self {
        match value {
            MfArg::Triangular => MfShape::Triangular,
            MfArg::Gaussian => MfShape::Gaussian,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score one workflow from its definition, history log and expert weights
    Evaluate {
        /// Workflow definition document
        workflow: PathBuf,
        /// Execution-history log (duration,overtime_count,success,fingerprint)
        history: PathBuf,
        /// Judgment matrix file; omit to use --weights
        matrix: Option<PathBuf>,
        /// Optional per-node failure tallies (node_id,failures,attempts)
        #[arg(long)]
        node_failures: Option<PathBuf>,
        /// Weight source when no matrix file is given
        #[arg(long, default_value = "paper")]
        weights: String,
        /// Historical database to append the evaluation to
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Derive index weights from a pairwise judgment matrix
    Ahp {
        /// 8x8 delimiter-separated numeric grid
        matrix: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a synthetic historical evaluation database
    Generate {
        #[arg(long, default_value_t = 2000)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// paper | FILE | perturbed:SCALE
        #[arg(long, default_value = "paper")]
        weights: String,
        /// Gaussian label noise (credibility points)
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Drop the cross-feature couplings
        #[arg(long)]
        no_coupling: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Train and compare learners on a database
    Benchmark {
        /// Existing dataset file; omitted: generate per --count/--seed/--noise
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "paper")]
        weights: String,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// TRAIN/TEST holdout or `online` for prequential evaluation
        #[arg(long, default_value = "1900/100")]
        split: String,
        /// Comma-separated: bp, elm, enfn, enfn-tri, enfn-gauss, figmn, all
        #[arg(long, default_value = "all")]
        learners: String,
        /// Membership-function shape a bare `enfn` resolves to
        #[arg(long, value_enum, default_value = "triangular")]
        mf: MfArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Initial-covariance scale of the mixture learner
        #[arg(long, default_value_t = 1.0)]
        figmn_delta: f64,
        #[arg(long, default_value_t = 300)]
        bp_epochs: usize,
        #[arg(long, default_value_t = 1e-4)]
        bp_target_mse: f64,
        #[arg(long, default_value_t = 100)]
        elm_hidden: usize,
    },
    /// Route a query stream through the manual-vs-learned switchover policy
    Switchover {
        #[arg(long, default_value_t = 300)]
        queries: usize,
        /// Database size at which evaluation switches to the learned model
        #[arg(long, default_value_t = 200)]
        threshold: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "paper")]
        weights: String,
        /// Incremental learners shadowing the database
        #[arg(long, default_value = "enfn-tri,figmn")]
        learners: String,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        figmn_delta: f64,
    },
    /// Re-derive the bundled worked example and verify every golden value
    ValidatePipeline {
        /// Self-check: break the robustness exponent sign and expect failure
        #[arg(long, hide = true)]
        mutate_eq5_sign: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's rendering but pin the usage exit code.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Evaluate {
            workflow,
            history,
            matrix,
            node_failures,
            weights,
            db,
            out,
            seed,
        } => {
            let source = match matrix {
                Some(path) => simcred::datagen::WeightSource::MatrixFile(path),
                None => harness::parse_weight_source(&weights)?,
            };
            let db_path = db.unwrap_or_else(|| out.join("database.csv"));
            let result = harness::cmd_evaluate(
                &workflow,
                &history,
                node_failures.as_deref(),
                &source,
                seed,
                &db_path,
                &out,
            )?;
            println!("features:");
            for (name, value) in FEATURE_NAMES.iter().zip(result.features.to_array()) {
                println!("  {name:<12} {value}");
            }
            println!("indices:                    value   /100");
            let scaled = result.indices.on_hundred_scale();
            for (i, (name, value)) in INDEX_NAMES
                .iter()
                .zip(result.indices.to_array())
                .enumerate()
            {
                println!("  {name:<16} {value:<10.4} {}", scaled[i]);
            }
            println!("weights:");
            for (i, w) in result.weights.weights.iter().enumerate() {
                println!("  w{:<11} {w:.4}", i + 1);
            }
            println!(
                "  lambda_max = {:.4}, CI = {:.4}, CR = {:.4} ({})",
                result.weights.lambda_max,
                result.weights.ci,
                result.weights.cr,
                if result.weights.is_acceptable() {
                    "acceptable"
                } else {
                    "weights unreliable"
                }
            );
            for note in &result.notes {
                println!("note: {note}");
            }
            println!("credibility E = {:.2}", result.credibility);
            println!("appended evaluation to {}", db_path.display());
            Ok(())
        }
        Command::Ahp { matrix, out } => {
            let (weights, notes) = harness::cmd_ahp(&matrix, &out)?;
            for (i, w) in weights.weights.iter().enumerate() {
                println!("w{} = {w:.4}", i + 1);
            }
            println!(
                "lambda_max = {:.4}, CI = {:.4}, CR = {:.4} ({})",
                weights.lambda_max,
                weights.ci,
                weights.cr,
                if weights.is_acceptable() {
                    "acceptable"
                } else {
                    "unacceptable: CR >= 0.1"
                }
            );
            for note in notes {
                println!("{note}");
            }
            Ok(())
        }
        Command::Generate {
            count,
            seed,
            weights,
            noise,
            no_coupling,
            out,
        } => {
            let config = GeneratorConfig {
                count,
                seed,
                weight_source: harness::parse_weight_source(&weights)?,
                label_noise_sd: noise,
                coupling: !no_coupling,
            };
            let dataset = harness::cmd_generate(&config, &out)?;
            println!(
                "wrote {} records to {} ({} noisy labels clamped)",
                dataset.records.len(),
                out.join("dataset.csv").display(),
                dataset.clamped_labels
            );
            Ok(())
        }
        Command::Benchmark {
            data,
            count,
            seed,
            weights,
            noise,
            split,
            learners,
            mf,
            out,
            figmn_delta,
            bp_epochs,
            bp_target_mse,
            elm_hidden,
        } => {
            let source = match data {
                Some(path) => DataSource::File(path),
                None => DataSource::Generate(GeneratorConfig {
                    count,
                    seed,
                    weight_source: harness::parse_weight_source(&weights)?,
                    label_noise_sd: noise,
                    coupling: true,
                }),
            };
            let roster = LearnerKind::parse_list(&learners, mf.into())?;
            let config = ExperimentConfig {
                seed,
                bp_epoch_cap: bp_epochs,
                bp_target_mse,
                elm_hidden,
                figmn_delta,
                ..ExperimentConfig::new(source, Split::parse(&split)?, roster, out.clone())
            };
            let report = harness::cmd_benchmark(&config)?;
            println!(
                "{:<12} {:>10} {:>10} {:>8} {:>8} {:>10} {:>10}",
                "learner", "mae", "mape%", ">2", ">5", "warmup", "stable"
            );
            for run in report
                .runs
                .iter()
                .chain(std::iter::once(&report.baseline))
            {
                let m = &run.metrics;
                let opt = |v: Option<f64>| {
                    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".to_string())
                };
                println!(
                    "{:<12} {:>10.4} {:>10} {:>8.3} {:>8.3} {:>10} {:>10}",
                    m.learner,
                    m.mean_abs_error,
                    opt(m.mean_abs_error_pct),
                    m.frac_err_gt_2,
                    m.frac_err_gt_5,
                    opt(m.warmup_mae),
                    opt(m.stabilized_mae),
                );
                for warning in &run.warnings {
                    println!("  note ({}): {warning}", m.learner);
                }
            }
            for (learner, message) in &report.failures {
                println!("failed ({learner}): {message}");
            }
            println!("outputs written to {}", config.out_dir.display());
            Ok(())
        }
        Command::Switchover {
            queries,
            threshold,
            seed,
            weights,
            learners,
            db,
            out,
            figmn_delta,
        } => {
            let roster = LearnerKind::parse_list(&learners, MfShape::Triangular)?;
            let source = harness::parse_weight_source(&weights)?;
            let db_path = db.unwrap_or_else(|| out.join("database.csv"));
            let summary = harness::cmd_switchover(
                queries,
                threshold,
                seed,
                &source,
                &roster,
                &db_path,
                &out,
                figmn_delta,
            )?;
            println!(
                "{queries} queries: {} manual, {} empirical ({} fallbacks)",
                summary.manual, summary.empirical, summary.fallbacks
            );
            println!(
                "database now at {}; per-query log in {}",
                db_path.display(),
                out.join("switchover.csv").display()
            );
            Ok(())
        }
        Command::ValidatePipeline { mutate_eq5_sign } => {
            let report = cmd_validate_pipeline(mutate_eq5_sign);
            for check in &report.checks {
                println!("{}", check.describe());
            }
            if report.all_passed() {
                println!("all {} golden checks passed", report.checks.len());
                Ok(())
            } else {
                Err(HarnessError::GoldenFailure)
            }
        }
    }
}
