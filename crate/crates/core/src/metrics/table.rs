use std::fmt::{Display, Write};

use serde::{Deserialize, Serialize};

use super::{percent_change, EvalReport, MetricsError};

/// sklearn-style aligned text report.
pub fn render_report<L: Ord + Display>(report: &EvalReport<L>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>12} {:>10} {:>10} {:>10} {:>10}",
        "", "precision", "recall", "f1-score", "support"
    );
    for (class, s) in &report.per_class {
        let _ = writeln!(
            out,
            "{:>12} {:>10.4} {:>10.4} {:>10.4} {:>10}",
            class.to_string(),
            s.precision,
            s.recall,
            s.f1,
            s.support
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>12} {:>10} {:>10} {:>10.4} {:>10}",
        "accuracy", "", "", report.accuracy, report.total
    );
    let _ = writeln!(
        out,
        "{:>12} {:>10.4} {:>10.4} {:>10.4} {:>10}",
        "weighted avg", report.weighted_precision, report.weighted_recall, report.weighted_f1, report.total
    );
    if report.invalid_predictions > 0 {
        let _ = writeln!(out, "invalid predictions: {}", report.invalid_predictions);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub baseline_f1: f64,
    pub augmented_f1: f64,
    pub percent_change: f64,
}

impl ComparisonRow {
    pub fn new(name: impl Into<String>, baseline_f1: f64, augmented_f1: f64) -> Result<Self, MetricsError> {
        Ok(Self {
            name: name.into(),
            baseline_f1,
            augmented_f1,
            percent_change: percent_change(baseline_f1, augmented_f1)?,
        })
    }
}

pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(10);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$} {:>10} {:>11} {:>10}",
        "run", "baseline", "+synthetic", "% change"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$} {:>10.3} {:>11.3} {:>+9.2}%",
            r.name, r.baseline_f1, r.augmented_f1, r.percent_change
        );
    }
    out
}
