use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::Sentiment;

/// A prediction; `Invalid` marks an unparseable model reply and always
/// counts as wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predicted<L> {
    Label(L),
    Invalid,
}

impl<L> From<L> for Predicted<L> {
    fn from(label: L) -> Self {
        Predicted::Label(label)
    }
}

impl<L> Predicted<L> {
    pub fn label(&self) -> Option<&L> {
        match self {
            Predicted::Label(l) => Some(l),
            Predicted::Invalid => None,
        }
    }
}

/// Rows are true classes, columns predicted classes; invalid predictions
/// are kept in a separate column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix<L> {
    pub classes: Vec<L>,
    pub counts: Vec<Vec<u64>>,
    pub invalid: Vec<u64>,
}

impl<L: PartialEq + Debug + Clone> ConfusionMatrix<L> {
    pub fn build(y_true: &[L], y_pred: &[Predicted<L>], classes: &[L]) -> Result<Self, MetricsError> {
        if y_true.len() != y_pred.len() {
            return Err(MetricsError::LengthMismatch {
                left: y_true.len(),
                right: y_pred.len(),
            });
        }
        if y_true.is_empty() {
            return Err(MetricsError::Empty);
        }
        let index = |l: &L| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| MetricsError::UnknownLabel(format!("{l:?}")))
        };
        let k = classes.len();
        let mut counts = vec![vec![0u64; k]; k];
        let mut invalid = vec![0u64; k];
        for (t, p) in y_true.iter().zip(y_pred) {
            let row = index(t)?;
            match p {
                Predicted::Label(p) => counts[row][index(p)?] += 1,
                Predicted::Invalid => invalid[row] += 1,
            }
        }
        Ok(Self {
            classes: classes.to_vec(),
            counts,
            invalid,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.invalid.iter().sum::<u64>()
    }

    fn support(&self, i: usize) -> u64 {
        self.counts[i].iter().sum::<u64>() + self.invalid[i]
    }

    fn predicted(&self, j: usize) -> u64 {
        self.counts.iter().map(|row| row[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<L: Ord = Sentiment> {
    pub per_class: BTreeMap<L, ClassScores>,
    pub weighted_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub invalid_predictions: u64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision/recall/F1 and support-weighted averages. Classes
/// with zero support get zero weight, so the weights renormalize over the
/// classes present in `y_true`.
pub fn classification_report<L: Ord + Clone + Debug>(
    y_true: &[L],
    y_pred: &[Predicted<L>],
    classes: &[L],
) -> Result<EvalReport<L>, MetricsError> {
    let cm = ConfusionMatrix::build(y_true, y_pred, classes)?;
    let n = cm.total();
    let mut per_class = BTreeMap::new();
    let (mut wf1, mut wp, mut wr, mut macro_f1) = (0.0, 0.0, 0.0, 0.0);
    let mut correct = 0;
    for (i, class) in cm.classes.iter().enumerate() {
        let tp = cm.counts[i][i];
        correct += tp;
        let support = cm.support(i);
        let precision = ratio(tp, cm.predicted(i));
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let weight = support as f64 / n as f64;
        wf1 += weight * f1;
        wp += weight * precision;
        wr += weight * recall;
        macro_f1 += f1;
        per_class.insert(
            class.clone(),
            ClassScores {
                precision,
                recall,
                f1,
                support,
            },
        );
    }
    Ok(EvalReport {
        per_class,
        weighted_f1: wf1,
        weighted_precision: wp,
        weighted_recall: wr,
        macro_f1: macro_f1 / cm.classes.len() as f64,
        accuracy: ratio(correct, n),
        invalid_predictions: cm.invalid.iter().sum(),
        total: n,
    })
}
