//! Triage of findings produced by external scanners: align each finding
//! with our verdict for the same file and line, and judge it — confirmed
//! suspicious, probable false alarm (with the matching patterns as the
//! explanation), no candidate there at all, or unjudged.

use crate::detect::VulnClass;
use crate::patterns::{Outcome, PatternId, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

/// One warning from an external tool's report.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalFinding {
    pub tool: String,
    pub file: String,
    pub line: u32,
    /// `None` when the report names a class we do not judge; the finding is
    /// passed through unjudged.
    pub vuln: Option<VulnClass>,
    pub raw_vuln: String,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Judgement {
    /// Matches a verdict we consider a likely true positive.
    ConfirmedSuspicious,
    /// Matches a verdict flagged as a false positive.
    ProbableFalseAlarm,
    /// Nothing at that line is a candidate for the class.
    NoCandidateHere,
    /// Unsupported class, un-analyzed code, or unknown file.
    Unjudged { reason: String },
}

#[derive(Debug, Clone)]
pub struct TriageResult {
    pub finding: ExternalFinding,
    pub judgement: Judgement,
    pub patterns: BTreeSet<PatternId>,
    pub justification: Vec<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read findings file: {0}")]
    Io(#[from] std::io::Error),
    #[error("findings file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("findings file has no `findings` array")]
    Shape,
}

#[derive(Debug, Deserialize)]
struct RawReport {
    #[serde(default)]
    tool: Option<String>,
    findings: Option<Vec<Value>>,
}

/// Parse a findings report. Malformed records produce a diagnostic and are
/// skipped; a malformed file is fatal.
pub fn ingest_report(path: &Path) -> Result<(Vec<ExternalFinding>, Vec<String>), IngestError> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawReport = serde_json::from_str(&text)?;
    let Some(entries) = raw.findings else {
        return Err(IngestError::Shape);
    };
    let tool = raw.tool.unwrap_or_else(|| "unknown".to_string());
    let mut findings = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        match parse_finding(entry, &tool) {
            Ok(f) => findings.push(f),
            Err(msg) => diagnostics.push(format!("finding #{}: {msg} (record dropped)", i + 1)),
        }
    }
    Ok((findings, diagnostics))
}

fn parse_finding(v: &Value, tool: &str) -> Result<ExternalFinding, String> {
    let obj = v.as_object().ok_or("not an object")?;
    let file = obj
        .get("file")
        .and_then(Value::as_str)
        .ok_or("missing `file`")?
        .to_string();
    let line = obj
        .get("line")
        .and_then(Value::as_u64)
        .ok_or("missing or non-numeric `line`")?;
    if line == 0 {
        return Err("line must be >= 1".into());
    }
    let raw_vuln = obj
        .get("vuln")
        .and_then(Value::as_str)
        .ok_or("missing `vuln`")?
        .to_string();
    let vuln = VulnClass::parse(&raw_vuln);
    let message = obj
        .get("message")
        .and_then(Value::as_str)
        .map(str::to_string);
    Ok(ExternalFinding {
        tool: tool.to_string(),
        file,
        line: line as u32,
        vuln,
        raw_vuln,
        message,
    })
}

/// Paths that count as "the same file" for matching: exact match after
/// stripping a leading `./`, or a unique basename match among the analyzed
/// files.
fn file_matches(finding_file: &str, verdict_file: &str, analyzed: &[String]) -> bool {
    let norm = |s: &str| s.strip_prefix("./").unwrap_or(s).to_string();
    let f = norm(finding_file);
    let v = norm(verdict_file);
    if f == v {
        return true;
    }
    // unique-basename fallback
    let base = Path::new(&f)
        .file_name()
        .map(|b| b.to_string_lossy().to_string());
    let Some(base) = base else { return false };
    let candidates: Vec<&String> = analyzed
        .iter()
        .filter(|a| {
            Path::new(a.as_str())
                .file_name()
                .is_some_and(|ab| ab.to_string_lossy() == base)
        })
        .collect();
    candidates.len() == 1 && norm(candidates[0]) == v
}

/// Judge each finding against the verdicts, preserving input order. Exactly
/// one result per finding.
pub fn triage(
    findings: &[ExternalFinding],
    verdicts: &[Verdict],
    analyzed_files: &[String],
) -> Vec<TriageResult> {
    findings
        .iter()
        .map(|f| judge_one(f, verdicts, analyzed_files))
        .collect()
}

fn judge_one(
    finding: &ExternalFinding,
    verdicts: &[Verdict],
    analyzed_files: &[String],
) -> TriageResult {
    let Some(vuln) = finding.vuln else {
        return TriageResult {
            finding: finding.clone(),
            judgement: Judgement::Unjudged {
                reason: format!("class `{}` is not judged by this tool", finding.raw_vuln),
            },
            patterns: BTreeSet::new(),
            justification: Vec::new(),
        };
    };
    if !analyzed_files
        .iter()
        .any(|a| file_matches(&finding.file, a, analyzed_files))
    {
        return TriageResult {
            finding: finding.clone(),
            judgement: Judgement::Unjudged {
                reason: format!("file `{}` was never analyzed", finding.file),
            },
            patterns: BTreeSet::new(),
            justification: Vec::new(),
        };
    }

    let at_line: Vec<&Verdict> = verdicts
        .iter()
        .filter(|v| {
            v.candidate.vuln == vuln
                && v.candidate.line() == finding.line
                && file_matches(&finding.file, &v.candidate.span.file, analyzed_files)
        })
        .collect();

    if at_line.is_empty() {
        return TriageResult {
            finding: finding.clone(),
            judgement: Judgement::NoCandidateHere,
            patterns: BTreeSet::new(),
            justification: vec!["no candidate of this class at that line".into()],
        };
    }
    if let Some(v) = at_line.iter().find(|v| v.outcome == Outcome::LikelyTP) {
        return TriageResult {
            finding: finding.clone(),
            judgement: Judgement::ConfirmedSuspicious,
            patterns: BTreeSet::new(),
            justification: v.justification.clone(),
        };
    }
    if at_line.iter().any(|v| v.outcome == Outcome::FlaggedFP) {
        let mut patterns = BTreeSet::new();
        let mut justification = Vec::new();
        for v in at_line.iter().filter(|v| v.outcome == Outcome::FlaggedFP) {
            patterns.extend(v.matched_patterns.iter().copied());
            justification.extend(v.justification.iter().cloned());
        }
        return TriageResult {
            finding: finding.clone(),
            judgement: Judgement::ProbableFalseAlarm,
            patterns,
            justification,
        };
    }
    // only not-analyzed verdicts remain
    let reason = at_line
        .iter()
        .find_map(|v| match &v.outcome {
            Outcome::NotAnalyzed(r) => Some(r.clone()),
            _ => None,
        })
        .unwrap_or_else(|| "not analyzed".into());
    TriageResult {
        finding: finding.clone(),
        judgement: Judgement::Unjudged { reason },
        patterns: BTreeSet::new(),
        justification: Vec::new(),
    }
}
