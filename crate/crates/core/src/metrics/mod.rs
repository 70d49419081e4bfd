//! Classification scores, relative improvement, inter-annotator agreement
//! and code-mixing pattern statistics.

mod classification;
mod codemix;
mod kappa;
mod table;

use thiserror::Error;

pub use classification::{classification_report, ClassScores, ConfusionMatrix, EvalReport, Predicted};
pub use codemix::{cm_stats, CMPatternStats, Lexicons};
pub use kappa::cohens_kappa;
pub use table::{render_comparison, render_report, ComparisonRow};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no labels to score")]
    Empty,
    #[error("label {0:?} is not one of the scored classes")]
    UnknownLabel(String),
    #[error("baseline score is zero; percent change is undefined")]
    DivisionByZero,
    #[error("expected agreement is 1 (both annotators constant on the same label); kappa is undefined")]
    DegenerateAgreement,
    #[error("configuration error: {0}")]
    Config(String),
}

/// `100 * (augmented - baseline) / baseline`, unrounded.
pub fn percent_change_exact(baseline: f64, augmented: f64) -> Result<f64, MetricsError> {
    if baseline == 0.0 {
        return Err(MetricsError::DivisionByZero);
    }
    Ok(100.0 * (augmented - baseline) / baseline)
}

/// Percent change rounded to two decimals, half away from zero.
pub fn percent_change(baseline: f64, augmented: f64) -> Result<f64, MetricsError> {
    percent_change_exact(baseline, augmented).map(|p| round_to(p, 2))
}

/// Round half away from zero to `decimals` places.
pub fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let scaled = value * scale;
    // Snap values within float noise of a .5 boundary before rounding.
    let snapped = (scaled * 1e9).round() / 1e9;
    let r = snapped.round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn percent_change_matches_published_rows() {
        assert_eq!(percent_change(0.588, 0.603).unwrap(), 2.55);
        assert_eq!(percent_change(0.547, 0.598).unwrap(), 9.32);
        assert_eq!(percent_change(0.588, 0.491).unwrap(), -16.5);
    }

    #[test]
    fn zero_baseline() {
        assert_eq!(percent_change(0.0, 0.5), Err(MetricsError::DivisionByZero));
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_to(1.005, 2), 1.01);
        assert_eq!(round_to(-1.005, 2), -1.01);
        assert_eq!(round_to(2.344, 2), 2.34);
        assert_eq!(round_to(-0.001, 2), 0.0);
    }

    proptest! {
        #[test]
        fn identity_is_zero(x in 0.001f64..1.0) {
            prop_assert_eq!(percent_change(x, x).unwrap(), 0.0);
        }

        #[test]
        fn sign_follows_difference(b in 0.01f64..1.0, a in 0.0f64..1.0) {
            let p = percent_change_exact(b, a).unwrap();
            prop_assert_eq!(p > 0.0, a > b);
            prop_assert_eq!(p < 0.0, a < b);
        }
    }
}
