//! Scoring verdicts against ground-truth labels: per-class confusion
//! matrices, precision/specificity/sensitivity, and runtimes.
//!
//! Counting follows per-line semantics: a flagged line that the ground
//! truth calls safe is a false positive; a line the tool stayed silent on
//! counts toward the negatives. Labelled lines inside regions the tool
//! could not analyze are tracked in `missed`, separately from the four
//! classic cells, so both the strict and the folded readings stay
//! computable.

use crate::detect::VulnClass;
use crate::model::NotAnalyzedRecord;
use crate::patterns::{Outcome, Verdict};
use serde::Serialize;
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    /// The line is genuinely vulnerable.
    TP,
    /// The line is of interest for the class but cannot be exploited
    /// (counted as a true negative when the tool clears it).
    FP,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthLabel {
    pub file: String,
    pub line: u32,
    pub vuln: VulnClass,
    pub label: Label,
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("cannot read labels file: {0}")]
    Io(#[from] std::io::Error),
    #[error("labels row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("duplicate label for {file}:{line} {vuln}")]
    Duplicate {
        file: String,
        line: u32,
        vuln: VulnClass,
    },
}

/// Load a `file,line,vuln,label` CSV. Duplicate (file, line, vuln) keys are
/// an error; so is any malformed row, fatally, with its row number.
pub fn load_labels(path: &Path) -> Result<Vec<GroundTruthLabel>, LabelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => LabelError::Io(std::io::Error::other(e.to_string())),
            _ => LabelError::Row {
                row: 0,
                message: e.to_string(),
            },
        })?;
    let mut labels = Vec::new();
    let mut seen: BTreeSet<(String, u32, VulnClass)> = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is row 1
        let record = record.map_err(|e| LabelError::Row {
            row,
            message: e.to_string(),
        })?;
        if record.len() < 4 {
            return Err(LabelError::Row {
                row,
                message: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let file = record[0].to_string();
        let line: u32 = record[1].parse().map_err(|_| LabelError::Row {
            row,
            message: format!("bad line number `{}`", &record[1]),
        })?;
        if line == 0 {
            return Err(LabelError::Row {
                row,
                message: "line numbers are 1-based".into(),
            });
        }
        let vuln = VulnClass::parse(&record[2]).ok_or_else(|| LabelError::Row {
            row,
            message: format!("unknown class `{}`", &record[2]),
        })?;
        let label = match record[3].to_ascii_uppercase().as_str() {
            "TP" => Label::TP,
            "FP" | "TN" => Label::FP,
            other => {
                return Err(LabelError::Row {
                    row,
                    message: format!("unknown label `{other}`"),
                })
            }
        };
        if !seen.insert((file.clone(), line, vuln)) {
            return Err(LabelError::Duplicate { file, line, vuln });
        }
        labels.push(GroundTruthLabel {
            file,
            line,
            vuln,
            label,
        });
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Labelled lines inside regions the tool did not analyze.
    pub missed: usize,
    /// Breakdown of `missed` by ground-truth label; folding them into the
    /// negatives gives the alternative reading.
    #[serde(skip)]
    pub missed_tp: usize,
    #[serde(skip)]
    pub missed_fp: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_ + self.missed
    }

    /// The reading where missed lines fold into the negatives.
    pub fn folded(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp,
            fp: self.fp,
            tn: self.tn + self.missed_fp,
            fn_: self.fn_ + self.missed_tp,
            missed: 0,
            missed_tp: 0,
            missed_fp: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub specificity: Option<f64>,
    pub sensitivity: Option<f64>,
    pub runtime_seconds: f64,
}

/// How one verdict relates to one label line.
fn verdict_matches(v: &Verdict, label: &GroundTruthLabel) -> bool {
    v.candidate.vuln == label.vuln
        && v.candidate.line() == label.line
        && v.candidate.span.file == label.file
}

/// Score verdicts for one class against the labels of that class.
///
/// Per line: LikelyTP on a TP label counts tp, on an FP label counts fp;
/// FlaggedFP on an FP label counts tn, on a TP label counts fn. A labelled
/// line with no verdict at all is a negative for the tool. Labelled lines
/// in not-analyzed scope count as missed.
pub fn evaluate(
    verdicts: &[Verdict],
    not_analyzed: &[NotAnalyzedRecord],
    labels: &[GroundTruthLabel],
    vuln: VulnClass,
) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for label in labels.iter().filter(|l| l.vuln == vuln) {
        let at_line: Vec<&Verdict> = verdicts
            .iter()
            .filter(|v| verdict_matches(v, label))
            .collect();
        let any_tp = at_line.iter().any(|v| v.outcome == Outcome::LikelyTP);
        let any_fp = at_line.iter().any(|v| v.outcome == Outcome::FlaggedFP);
        let any_na = at_line
            .iter()
            .any(|v| matches!(v.outcome, Outcome::NotAnalyzed(_)));
        let in_na_scope = not_analyzed.iter().any(|r| {
            r.file == label.file && r.span.line_start <= label.line && label.line <= r.span.line_end
        });

        if any_tp {
            match label.label {
                Label::TP => cm.tp += 1,
                Label::FP => cm.fp += 1,
            }
        } else if any_fp {
            match label.label {
                Label::TP => cm.fn_ += 1,
                Label::FP => cm.tn += 1,
            }
        } else if any_na || in_na_scope {
            cm.missed += 1;
            match label.label {
                Label::TP => cm.missed_tp += 1,
                Label::FP => cm.missed_fp += 1,
            }
        } else {
            // the tool said nothing about this line: a negative
            match label.label {
                Label::TP => cm.fn_ += 1,
                Label::FP => cm.tn += 1,
            }
        }
    }
    debug_assert_eq!(
        cm.total(),
        labels.iter().filter(|l| l.vuln == vuln).count(),
        "every label lands in exactly one cell"
    );
    cm
}

/// Ratios from a confusion matrix. Undefined denominators surface as
/// `None`, never as 0 or 1.
pub fn metrics(cm: &ConfusionMatrix, runtime_seconds: f64) -> Metrics {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    Metrics {
        precision: ratio(cm.tp, cm.tp + cm.fp),
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        sensitivity: ratio(cm.tp, cm.tp + cm.fn_),
        runtime_seconds,
    }
}
