//! Confusion matrices and precision/recall/F-score reporting.
//!
//! Conventions that matter for comparing runs: undefined precision or
//! recall (zero denominator) is reported as 0, macro averages are
//! unweighted over all classes in the matrix, weighted averages are
//! support-weighted, and scores render at 4 decimal places.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("golds and preds differ in length ({golds} vs {preds})")]
    LengthMismatch { golds: usize, preds: usize },
    #[error("category {label:?} is not in the label set")]
    UnknownCategory { label: String },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("score inputs out of domain: {reason}")]
    DomainError { reason: String },
    #[error("malformed matrix: {reason}")]
    Malformed { reason: String },
}

/// Square count table indexed `counts[gold][pred]`, plus the label order
/// that indexes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    /// Row sums: how many gold instances each class has.
    pub support: Vec<u64>,
}

impl ConfusionMatrix {
    /// Builds a matrix from parallel gold/prediction slices over a fixed
    /// label set.
    pub fn from_pairs(
        labels: &[&str],
        golds: &[&str],
        preds: &[&str],
    ) -> Result<Self, MetricsError> {
        if golds.len() != preds.len() {
            return Err(MetricsError::LengthMismatch {
                golds: golds.len(),
                preds: preds.len(),
            });
        }
        let index = label_index(labels)?;
        let n = labels.len();
        let mut counts = vec![vec![0u64; n]; n];
        for (g, p) in golds.iter().zip(preds) {
            let gi = *index
                .get(*g)
                .ok_or_else(|| MetricsError::UnknownCategory { label: g.to_string() })?;
            let pi = *index
                .get(*p)
                .ok_or_else(|| MetricsError::UnknownCategory { label: p.to_string() })?;
            counts[gi][pi] += 1;
        }
        Ok(Self::assemble(labels, counts))
    }

    /// Builds a matrix from pre-tallied counts (`counts[gold][pred]`).
    pub fn from_counts(labels: &[&str], counts: Vec<Vec<u64>>) -> Result<Self, MetricsError> {
        label_index(labels)?;
        if counts.len() != labels.len() || counts.iter().any(|row| row.len() != labels.len()) {
            return Err(MetricsError::Malformed {
                reason: format!("counts must be {0}x{0}", labels.len()),
            });
        }
        Ok(Self::assemble(labels, counts))
    }

    fn assemble(labels: &[&str], counts: Vec<Vec<u64>>) -> Self {
        let support = counts.iter().map(|row| row.iter().sum()).collect();
        ConfusionMatrix {
            labels: labels.iter().map(|l| l.to_string()).collect(),
            counts,
            support,
        }
    }

    pub fn total(&self) -> u64 {
        self.support.iter().sum()
    }
}

fn label_index<'a>(
    labels: &[&'a str],
) -> Result<std::collections::HashMap<&'a str, usize>, MetricsError> {
    let mut index = std::collections::HashMap::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        if index.insert(*label, i).is_some() {
            return Err(MetricsError::Malformed {
                reason: format!("duplicate label {label:?}"),
            });
        }
    }
    Ok(index)
}

/// F_β = (1+β²)·P·R / (β²·P + R), with 0 when the denominator is 0.
pub fn fbeta(p: f64, r: f64, beta: f64) -> Result<f64, MetricsError> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&r) {
        return Err(MetricsError::DomainError {
            reason: format!("p={p}, r={r} must lie in [0,1]"),
        });
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(MetricsError::DomainError {
            reason: format!("beta={beta} must be a positive real"),
        });
    }
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + b2) * p * r / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f2: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedScores {
    pub f1: f64,
    pub f2: f64,
}

/// Per-class scores in matrix label order, plus the aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassScores>,
    pub macro_avg: MacroScores,
    pub weighted: WeightedScores,
    pub accuracy: f64,
}

impl MetricsReport {
    pub fn class(&self, name: &str) -> Option<&ClassScores> {
        self.per_class.iter().find(|c| c.class == name)
    }
}

/// Full classification report over a confusion matrix.
pub fn class_report(cm: &ConfusionMatrix) -> Result<MetricsReport, MetricsError> {
    let n = cm.labels.len();
    let total = cm.total();
    if n == 0 || total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }

    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mut per_class = Vec::with_capacity(n);
    let mut trace = 0u64;
    for i in 0..n {
        let diag = cm.counts[i][i];
        trace += diag;
        let colsum: u64 = cm.counts.iter().map(|row| row[i]).sum();
        let precision = ratio(diag, colsum);
        let recall = ratio(diag, cm.support[i]);
        per_class.push(ClassScores {
            class: cm.labels[i].clone(),
            precision,
            recall,
            f1: fbeta(precision, recall, 1.0)?,
            f2: fbeta(precision, recall, 2.0)?,
            support: cm.support[i],
        });
    }

    let mean = |f: &dyn Fn(&ClassScores) -> f64| {
        per_class.iter().map(|c| f(c)).sum::<f64>() / n as f64
    };
    let weighted_mean = |f: &dyn Fn(&ClassScores) -> f64| {
        per_class
            .iter()
            .map(|c| f(c) * c.support as f64)
            .sum::<f64>()
            / total as f64
    };

    Ok(MetricsReport {
        macro_avg: MacroScores {
            precision: mean(&|c| c.precision),
            recall: mean(&|c| c.recall),
            f1: mean(&|c| c.f1),
            f2: mean(&|c| c.f2),
        },
        weighted: WeightedScores {
            f1: weighted_mean(&|c| c.f1),
            f2: weighted_mean(&|c| c.f2),
        },
        accuracy: ratio(trace, total),
        per_class,
    })
}

/// Fixed-width score rendering used by every report surface: 4 decimal
/// places, ties to even.
pub fn format_score(x: f64) -> String {
    format!("{x:.4}")
}
