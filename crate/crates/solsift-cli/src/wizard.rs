//! Interactive walk over the candidates: for each one, show the code and
//! then step through the anti-pattern checks of its class one at a time.
//! Every check can be accepted as computed, overridden (its result
//! flipped), or skipped (excluded from the verdict); the final outcome is
//! recomputed from the effective check results, so accepting every default
//! reproduces the automatic analysis.
//!
//! Answers come from stdin one line at a time, so a scripted run (answers
//! piped in) produces a stable transcript; EOF resolves everything
//! remaining automatically.

use anyhow::Result;
use solsift::analyze::AnalysisReport;
use solsift::detect::VulnClass;
use solsift::patterns::{Outcome, PatternId, Verdict};
use std::collections::HashMap;
use std::io::{BufRead, IsTerminal};
use std::path::PathBuf;

const URV_PATTERNS: [PatternId; 5] = [
    PatternId::Urv1Unreachable,
    PatternId::Urv2RestrictiveModifier,
    PatternId::Urv3GuardCondition,
    PatternId::Urv4RecipientIsCaller,
    PatternId::Urv5TerminalCall,
];
const REE_PATTERNS: [PatternId; 6] = [
    PatternId::Ree1Unreachable,
    PatternId::Ree2RestrictiveModifier,
    PatternId::Ree3GuardCondition,
    PatternId::Ree4HardcodedTarget,
    PatternId::Ree5NoStateChangeAfter,
    PatternId::Ree6ValueWithinMsgValue,
];
const TD_PATTERNS: [PatternId; 1] = [PatternId::Td1IntervalCheck];

fn family_patterns(vuln: VulnClass) -> &'static [PatternId] {
    match vuln {
        VulnClass::Urv => &URV_PATTERNS,
        VulnClass::Ree => &REE_PATTERNS,
        VulnClass::Td => &TD_PATTERNS,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Choice {
    Accept,
    Override,
    Skip,
    Auto,
}

impl Choice {
    fn text(self) -> &'static str {
        match self {
            Choice::Accept => "accepted",
            Choice::Override => "overridden",
            Choice::Skip => "skipped",
            Choice::Auto => "auto",
        }
    }
}

/// Run the wizard over every verdict in the report. Returns the number of
/// findings that ended up suspicious after the user's decisions.
pub fn run(report: &AnalysisReport, paths: &[PathBuf]) -> Result<usize> {
    let stdin = std::io::stdin();
    if !stdin.is_terminal() {
        eprintln!("note: stdin is not a terminal; reading scripted answers (EOF resolves the rest automatically)");
    }
    let mut lines = stdin.lock().lines();
    let mut eof = false;
    let mut ask = move || -> Choice {
        if eof {
            return Choice::Auto;
        }
        match lines.next() {
            Some(Ok(answer)) => match answer.trim().to_ascii_lowercase().as_str() {
                "o" | "override" => Choice::Override,
                "s" | "skip" => Choice::Skip,
                _ => Choice::Accept,
            },
            _ => {
                eof = true;
                Choice::Auto
            }
        }
    };

    // source text for excerpts
    let mut sources: HashMap<String, Vec<String>> = HashMap::new();
    for p in paths {
        if let Ok(text) = std::fs::read_to_string(p) {
            sources.insert(
                p.to_string_lossy().to_string(),
                text.lines().map(str::to_string).collect(),
            );
        }
    }

    let verdicts: Vec<&Verdict> = report.verdicts().collect();
    let total = verdicts.len();
    let mut trail: Vec<String> = Vec::new();
    let mut suspicious = 0usize;

    for (i, v) in verdicts.iter().enumerate() {
        let c = &v.candidate;
        println!(
            "[{}/{}] {} candidate at {}:{} in {}.{}",
            i + 1,
            total,
            c.vuln,
            c.span.file,
            c.line(),
            c.contract,
            c.function
        );
        if let Some(lines) = sources.get(&c.span.file) {
            if let Some(code) = lines.get(c.line() as usize - 1) {
                println!("  > {}", code.trim());
            }
        }
        println!("  automatic verdict: {}", v.outcome);
        for why in &v.justification {
            println!("  - {why}");
        }

        if matches!(v.outcome, Outcome::NotAnalyzed(_)) {
            println!("  resolved: {} (no checks to run)", v.outcome);
            trail.push(format!(
                "{}:{} {} -> {} (not analyzed)",
                c.span.file,
                c.line(),
                c.vuln,
                v.outcome
            ));
            continue;
        }

        let mut effective_match = false;
        let mut decisions: Vec<String> = Vec::new();
        for p in family_patterns(c.vuln) {
            let auto = v.matched_patterns.contains(p);
            println!(
                "  check {}: {}",
                p.name(),
                if auto { "match" } else { "no match" }
            );
            println!("    [a]ccept / [o]verride / [s]kip?");
            let choice = ask();
            let used = match choice {
                Choice::Accept | Choice::Auto => auto,
                Choice::Override => !auto,
                Choice::Skip => false,
            };
            effective_match |= used;
            decisions.push(format!("{}={}", p.name(), choice.text()));
        }

        // the builtin-stipend suppression is not a numbered check and is
        // applied as computed
        let final_fp = effective_match || v.stipend_suppressed;
        let auto_fp = v.outcome == Outcome::FlaggedFP;
        let label = match (final_fp, auto_fp) {
            (true, true) => "cleared",
            (false, false) => "likely true positive",
            (true, false) => "user-flagged-FP",
            (false, true) => "user-confirmed-TP",
        };
        if !final_fp {
            suspicious += 1;
        }
        println!("  resolved: {label}");
        trail.push(format!(
            "{}:{} {} -> {} ({})",
            c.span.file,
            c.line(),
            c.vuln,
            label,
            decisions.join(", ")
        ));
    }

    println!("decisions:");
    for line in &trail {
        println!("  {line}");
    }
    println!("final: {suspicious} suspicious finding(s)");
    Ok(suspicious)
}
