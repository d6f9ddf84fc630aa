//! Prediction-error bookkeeping shared by the experiment commands.

use crate::fmtnum::fmt_sig;

/// Labels below this magnitude are excluded from the percentage-error mean
/// (the ratio is unbounded near zero) and counted separately.
pub const MAPE_LABEL_FLOOR: f64 = 1.0;

/// One scored prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub index: usize,
    pub actual: f64,
    pub predicted: f64,
}

impl ErrorRecord {
    pub fn abs_error(&self) -> f64 {
        (self.predicted - self.actual).abs()
    }
}

/// Summary metrics of one learner on one experiment.
#[derive(Debug, Clone)]
pub struct LearnerMetrics {
    pub learner: String,
    /// "offline" or "online".
    pub mode: &'static str,
    pub samples: usize,
    pub mean_abs_error: f64,
    /// Mean absolute percentage error over labels >= the floor; `None`
    /// when every label was excluded.
    pub mean_abs_error_pct: Option<f64>,
    /// Labels excluded from the percentage mean.
    pub mape_excluded: usize,
    pub frac_err_gt_2: f64,
    pub frac_err_gt_5: f64,
    /// Mean absolute error over the first window of a stream run.
    pub warmup_mae: Option<f64>,
    /// Mean absolute error over the last window of a stream run.
    pub stabilized_mae: Option<f64>,
}

/// Length of the warm-up and stabilized windows of a stream run.
pub const STREAM_WINDOW: usize = 200;

pub fn summarize(
    learner: &str,
    mode: &'static str,
    errors: &[ErrorRecord],
    stream_windows: bool,
) -> LearnerMetrics {
    assert!(!errors.is_empty(), "no errors to summarize");
    let n = errors.len();
    let mae = errors.iter().map(ErrorRecord::abs_error).sum::<f64>() / n as f64;

    let mut pct_sum = 0.0;
    let mut pct_count = 0usize;
    for e in errors {
        if e.actual.abs() >= MAPE_LABEL_FLOOR {
            pct_sum += (e.abs_error() / e.actual.abs()) * 100.0;
            pct_count += 1;
        }
    }
    let mean_abs_error_pct = if pct_count > 0 {
        Some(pct_sum / pct_count as f64)
    } else {
        None
    };

    let frac_err_gt_2 = errors.iter().filter(|e| e.abs_error() > 2.0).count() as f64 / n as f64;
    let frac_err_gt_5 = errors.iter().filter(|e| e.abs_error() > 5.0).count() as f64 / n as f64;

    let (warmup_mae, stabilized_mae) = if stream_windows {
        let window = STREAM_WINDOW.min(n / 2).max(1);
        let head = &errors[..window];
        let tail = &errors[n - window..];
        (
            Some(head.iter().map(ErrorRecord::abs_error).sum::<f64>() / window as f64),
            Some(tail.iter().map(ErrorRecord::abs_error).sum::<f64>() / window as f64),
        )
    } else {
        (None, None)
    };

    LearnerMetrics {
        learner: learner.to_string(),
        mode,
        samples: n,
        mean_abs_error: mae,
        mean_abs_error_pct,
        mape_excluded: n - pct_count,
        frac_err_gt_2,
        frac_err_gt_5,
        warmup_mae,
        stabilized_mae,
    }
}

pub fn metrics_csv_header() -> &'static str {
    "learner,mode,samples,mae,mape_pct,mape_excluded,frac_err_gt_2,frac_err_gt_5,warmup_mae,stabilized_mae"
}

pub fn metrics_csv_row(m: &LearnerMetrics) -> String {
    let opt = |v: Option<f64>| v.map(|x| fmt_sig(x, 6)).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        m.learner,
        m.mode,
        m.samples,
        fmt_sig(m.mean_abs_error, 6),
        opt(m.mean_abs_error_pct),
        m.mape_excluded,
        fmt_sig(m.frac_err_gt_2, 6),
        fmt_sig(m.frac_err_gt_5, 6),
        opt(m.warmup_mae),
        opt(m.stabilized_mae),
    )
}

pub fn errors_csv(errors: &[ErrorRecord]) -> String {
    let mut out = String::from("index,actual,predicted,abs_error\n");
    for e in errors {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.index,
            fmt_sig(e.actual, 6),
            fmt_sig(e.predicted, 6),
            fmt_sig(e.abs_error(), 6)
        ));
    }
    out
}

/// Recomputes summary metrics from an emitted error-series CSV; the result
/// must agree with the originally reported summary.
pub fn parse_errors_csv(text: &str) -> Result<Vec<ErrorRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("index,actual,predicted,abs_error") => {}
        other => return Err(format!("bad header {other:?}")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!("line {}: expected 4 fields", i + 2));
        }
        out.push(ErrorRecord {
            index: fields[0].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            actual: fields[1].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
            predicted: fields[2].parse().map_err(|e| format!("line {}: {e}", i + 2))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize, actual: f64, predicted: f64) -> ErrorRecord {
        ErrorRecord {
            index: i,
            actual,
            predicted,
        }
    }

    #[test]
    fn threshold_fractions_are_ordered() {
        let errors = vec![
            record(0, 50.0, 50.5),
            record(1, 50.0, 53.0),
            record(2, 50.0, 58.0),
            record(3, 50.0, 44.0),
        ];
        let m = summarize("x", "offline", &errors, false);
        assert!(m.frac_err_gt_5 <= m.frac_err_gt_2);
        assert_eq!(m.frac_err_gt_2, 0.75);
        assert_eq!(m.frac_err_gt_5, 0.5);
    }

    #[test]
    fn tiny_labels_are_excluded_from_mape() {
        let errors = vec![record(0, 0.5, 1.0), record(1, 80.0, 84.0)];
        let m = summarize("x", "offline", &errors, false);
        assert_eq!(m.mape_excluded, 1);
        assert!((m.mean_abs_error_pct.unwrap() - 5.0).abs() < 1e-12);

        let all_tiny = vec![record(0, 0.1, 0.2)];
        let m = summarize("x", "offline", &all_tiny, false);
        assert!(m.mean_abs_error_pct.is_none());
        assert_eq!(m.mape_excluded, 1);
    }

    #[test]
    fn stream_windows_cover_head_and_tail() {
        let errors: Vec<ErrorRecord> = (0..600)
            .map(|i| record(i, 50.0, if i < 300 { 60.0 } else { 51.0 }))
            .collect();
        let m = summarize("x", "online", &errors, true);
        assert_eq!(m.warmup_mae, Some(10.0));
        assert_eq!(m.stabilized_mae, Some(1.0));
    }

    #[test]
    fn summary_recomputes_exactly_from_the_emitted_csv() {
        let errors: Vec<ErrorRecord> = (0..50)
            .map(|i| record(i, 40.0 + i as f64, 41.5 + i as f64 * 0.9))
            .collect();
        let reported = summarize("demo", "offline", &errors, false);
        let parsed = parse_errors_csv(&errors_csv(&errors)).unwrap();
        let recomputed = summarize("demo", "offline", &parsed, false);
        // The CSV stores 6 significant digits; summaries agree to that
        // precision.
        assert!((reported.mean_abs_error - recomputed.mean_abs_error).abs() < 1e-4);
        assert_eq!(reported.frac_err_gt_2, recomputed.frac_err_gt_2);
        assert_eq!(reported.frac_err_gt_5, recomputed.frac_err_gt_5);
    }
}
