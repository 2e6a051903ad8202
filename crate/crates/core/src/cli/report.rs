//! CSV and plain-text rendering of experiment reports.

use std::fmt::Write as _;

use crate::analysis::ExperimentReport;

pub const CSV_HEADER: &str = "variant,context_size,embedding_dim,encoder,n_runs,mean_R,sd_R,mean_accuracy,failed_runs";

fn opt4(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.4}")).unwrap_or_default()
}

pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.4},{},{},{}",
            row.variant,
            row.context_size,
            row.embedding_dim,
            row.encoder,
            row.n_runs,
            row.mean_r,
            opt4(row.sd_r),
            opt4(row.mean_accuracy),
            row.failed_runs
        )
        .unwrap();
    }
    out
}

pub fn report_table(report: &ExperimentReport) -> String {
    let mut out = format!(
        "{:<14} {:>3} {:>3} {:<15} {:>5} {:>8} {:>8} {:>9} {:>6}\n",
        "variant", "c", "d", "encoder", "runs", "mean R", "sd R", "accuracy", "failed"
    );
    for row in &report.rows {
        writeln!(
            out,
            "{:<14} {:>3} {:>3} {:<15} {:>5} {:>8.4} {:>8} {:>9} {:>6}",
            row.variant.name(),
            row.context_size,
            row.embedding_dim,
            row.encoder.name(),
            row.n_runs,
            row.mean_r,
            opt4(row.sd_r),
            opt4(row.mean_accuracy),
            row.failed_runs
        )
        .unwrap();
    }
    out
}
