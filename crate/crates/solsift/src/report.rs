//! Report rendering: deterministic JSON for pipelines and a text form for
//! people. No timestamps or absolute paths are injected into the payloads,
//! so identical inputs give byte-identical output.

use crate::analyze::AnalysisReport;
use crate::detect::VulnClass;
use crate::eval::{ConfusionMatrix, Metrics};
use crate::patterns::{Outcome, Verdict};
use crate::triage::{Judgement, TriageResult};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Serialize)]
struct VerdictJson<'a> {
    file: &'a str,
    line: u32,
    col: u32,
    contract: &'a str,
    function: &'a str,
    vuln: VulnClass,
    call_kind: crate::detect::CallKind,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    patterns: Vec<&'static str>,
    justification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    receiver: Option<&'a str>,
}

fn outcome_tag(o: &Outcome) -> (&'static str, Option<&str>) {
    match o {
        Outcome::LikelyTP => ("likely_tp", None),
        Outcome::FlaggedFP => ("flagged_fp", None),
        Outcome::NotAnalyzed(r) => ("not_analyzed", Some(r.as_str())),
    }
}

fn verdict_json(v: &Verdict) -> Value {
    let (outcome, reason) = outcome_tag(&v.outcome);
    serde_json::to_value(VerdictJson {
        file: &v.candidate.span.file,
        line: v.candidate.line(),
        col: v.candidate.span.span.col_start,
        contract: &v.candidate.contract,
        function: &v.candidate.function,
        vuln: v.candidate.vuln,
        call_kind: v.candidate.call_kind,
        outcome,
        reason,
        patterns: v.matched_patterns.iter().map(|p| p.name()).collect(),
        justification: v.justification.join("; "),
        receiver: v.candidate.receiver.as_deref(),
    })
    .expect("verdict serialization")
}

/// Machine-readable analyze report.
pub fn analysis_json(report: &AnalysisReport) -> Value {
    json!({
        "files": report.files.iter().map(|f| json!({
            "file": f.file,
            "readable": f.read_error.is_none(),
            "diagnostics": f.diagnostics.iter().map(|d| json!({
                "line": d.span.line_start,
                "severity": format!("{:?}", d.severity).to_lowercase(),
                "message": d.message,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "verdicts": report.verdicts().map(verdict_json).collect::<Vec<_>>(),
        "not_analyzed": report.not_analyzed().map(|r| json!({
            "file": r.file,
            "contract": r.contract,
            "function": r.function,
            "line_start": r.span.line_start,
            "line_end": r.span.line_end,
            "reason": r.reason,
        })).collect::<Vec<_>>(),
    })
}

/// Human-readable analyze report.
pub fn analysis_text(report: &AnalysisReport, verbose: bool) -> String {
    let mut out = String::new();
    for v in report.verdicts() {
        let c = &v.candidate;
        out.push_str(&format!(
            "{}:{}: [{}] {} in {}.{} -> {}\n",
            c.span.file,
            c.line(),
            c.vuln,
            kind_text(c),
            c.contract,
            c.function,
            v.outcome,
        ));
        if !v.matched_patterns.is_empty() {
            let names: Vec<&str> = v.matched_patterns.iter().map(|p| p.name()).collect();
            out.push_str(&format!("    patterns: {}\n", names.join(", ")));
        }
        for why in &v.justification {
            out.push_str(&format!("    - {why}\n"));
        }
        if verbose {
            out.push_str(&format!(
                "    span: {}:{}..{}:{}\n",
                c.span.span.line_start,
                c.span.span.col_start,
                c.span.span.line_end,
                c.span.span.col_end
            ));
        }
    }
    for r in report.not_analyzed() {
        out.push_str(&format!(
            "{}:{}: not analyzed: {}.{} ({})\n",
            r.file, r.span.line_start, r.contract, r.function, r.reason
        ));
    }
    if verbose {
        for f in &report.files {
            for d in &f.diagnostics {
                out.push_str(&format!(
                    "{}:{}: {:?}: {}\n",
                    f.file, d.span.line_start, d.severity, d.message
                ));
            }
        }
    }
    let tps = report.likely_tp_count();
    let total: usize = report.files.iter().map(|f| f.verdicts.len()).sum();
    out.push_str(&format!(
        "{total} candidate(s), {tps} likely true positive(s), {} flagged false positive(s)\n",
        report
            .verdicts()
            .filter(|v| v.outcome == Outcome::FlaggedFP)
            .count()
    ));
    out
}

fn kind_text(c: &crate::detect::Candidate) -> String {
    use crate::detect::CallKind;
    let what = match c.call_kind {
        CallKind::TimestampUse => return "timestamp use".to_string(),
        CallKind::Send => "send",
        CallKind::Call => "low-level call",
        CallKind::Callcode => "callcode",
        CallKind::Delegatecall => "delegatecall",
        CallKind::Transfer => "transfer",
        CallKind::ExternalMemberCall => "external call",
    };
    match &c.receiver {
        Some(r) => format!("{what} on `{r}`"),
        None => what.to_string(),
    }
}

/// Machine-readable triage report: one entry per finding, input order.
pub fn triage_json(results: &[TriageResult]) -> Value {
    Value::Array(
        results
            .iter()
            .map(|r| {
                let judgement = match &r.judgement {
                    Judgement::ConfirmedSuspicious => "confirmed_suspicious".to_string(),
                    Judgement::ProbableFalseAlarm => "probable_false_alarm".to_string(),
                    Judgement::NoCandidateHere => "no_candidate_here".to_string(),
                    Judgement::Unjudged { .. } => "unjudged".to_string(),
                };
                let mut obj = json!({
                    "tool": r.finding.tool,
                    "file": r.finding.file,
                    "line": r.finding.line,
                    "vuln": r.finding.raw_vuln,
                    "judgement": judgement,
                    "patterns": r.patterns.iter().map(|p| p.name()).collect::<Vec<_>>(),
                    "justification": r.justification.join("; "),
                });
                if let Some(m) = &r.finding.message {
                    obj["message"] = json!(m);
                }
                if let Judgement::Unjudged { reason } = &r.judgement {
                    obj["reason"] = json!(reason);
                }
                obj
            })
            .collect(),
    )
}

/// Human-readable triage report.
pub fn triage_text(results: &[TriageResult]) -> String {
    let mut out = String::new();
    for r in results {
        let tag = match &r.judgement {
            Judgement::ConfirmedSuspicious => "CONFIRMED".to_string(),
            Judgement::ProbableFalseAlarm => "FALSE ALARM".to_string(),
            Judgement::NoCandidateHere => "NO CANDIDATE".to_string(),
            Judgement::Unjudged { reason } => format!("UNJUDGED ({reason})"),
        };
        out.push_str(&format!(
            "{}:{} [{}] {} -> {}\n",
            r.finding.file, r.finding.line, r.finding.raw_vuln, r.finding.tool, tag
        ));
        if !r.patterns.is_empty() {
            let names: Vec<&str> = r.patterns.iter().map(|p| p.name()).collect();
            out.push_str(&format!("    patterns: {}\n", names.join(", ")));
        }
        for why in &r.justification {
            out.push_str(&format!("    - {why}\n"));
        }
    }
    let alarms = results
        .iter()
        .filter(|r| r.judgement == Judgement::ProbableFalseAlarm)
        .count();
    let confirmed = results
        .iter()
        .filter(|r| r.judgement == Judgement::ConfirmedSuspicious)
        .count();
    out.push_str(&format!(
        "{} finding(s): {confirmed} confirmed suspicious, {alarms} probable false alarm(s)\n",
        results.len()
    ));
    out
}

/// One class's benchmark row.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub vuln: VulnClass,
    #[serde(flatten)]
    pub matrix: ConfusionMatrix,
    #[serde(flatten)]
    pub metrics: Metrics,
}

pub fn bench_json(rows: &[BenchRow]) -> Value {
    serde_json::to_value(rows).expect("bench serialization")
}

/// Table shaped like a precision/specificity summary.
pub fn bench_text(rows: &[BenchRow]) -> String {
    let fmt_ratio = |r: Option<f64>| match r {
        Some(v) => format!("{v:.2}"),
        None => "  — ".to_string(),
    };
    let mut out = String::new();
    out.push_str("Vuln   TP   FP   TN   FN  Missed   Pr    Sp    Se   Runtime(s)\n");
    for row in rows {
        out.push_str(&format!(
            "{:<5} {:>3}  {:>3}  {:>3}  {:>3}  {:>5}   {:>4}  {:>4}  {:>4}  {:>8.3}\n",
            row.vuln.to_string(),
            row.matrix.tp,
            row.matrix.fp,
            row.matrix.tn,
            row.matrix.fn_,
            row.matrix.missed,
            fmt_ratio(row.metrics.precision),
            fmt_ratio(row.metrics.specificity),
            fmt_ratio(row.metrics.sensitivity),
            row.metrics.runtime_seconds,
        ));
    }
    out
}
