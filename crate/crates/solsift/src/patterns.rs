//! The false-positive anti-pattern filters. Each candidate found by the
//! detectors is checked against the patterns of its class; a match means
//! the "vulnerability" is almost certainly a false alarm, and the verdict
//! records which patterns matched and why.
//!
//! All patterns are evaluated (no short-circuiting), so a verdict's
//! justification lists every matching pattern — triage output is the whole
//! point of the tool.

use crate::ast::{BinOp, Expr, ExprKind};
use crate::detect::{detect_all, Candidate, VulnClass};
use crate::model::cfg::{calls_out_after, statements_after, writes_state_after};
use crate::model::taint::{TaintUse, UseKind};
use crate::model::{
    classify_address, guards_dominating, AddressClass, ContractModel, FnModel, NotAnalyzedRecord,
    RestrictionReason,
};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PatternId {
    #[serde(rename = "URV1_Unreachable")]
    Urv1Unreachable,
    #[serde(rename = "URV2_RestrictiveModifier")]
    Urv2RestrictiveModifier,
    #[serde(rename = "URV3_GuardCondition")]
    Urv3GuardCondition,
    #[serde(rename = "URV4_RecipientIsCaller")]
    Urv4RecipientIsCaller,
    #[serde(rename = "URV5_TerminalCall")]
    Urv5TerminalCall,
    #[serde(rename = "REE1_Unreachable")]
    Ree1Unreachable,
    #[serde(rename = "REE2_RestrictiveModifier")]
    Ree2RestrictiveModifier,
    #[serde(rename = "REE3_GuardCondition")]
    Ree3GuardCondition,
    #[serde(rename = "REE4_HardcodedTarget")]
    Ree4HardcodedTarget,
    #[serde(rename = "REE5_NoStateChangeAfter")]
    Ree5NoStateChangeAfter,
    #[serde(rename = "REE6_ValueWithinMsgValue")]
    Ree6ValueWithinMsgValue,
    #[serde(rename = "TD1_IntervalCheck")]
    Td1IntervalCheck,
}

impl PatternId {
    pub fn family(self) -> VulnClass {
        use PatternId::*;
        match self {
            Urv1Unreachable
            | Urv2RestrictiveModifier
            | Urv3GuardCondition
            | Urv4RecipientIsCaller
            | Urv5TerminalCall => VulnClass::Urv,
            Ree1Unreachable
            | Ree2RestrictiveModifier
            | Ree3GuardCondition
            | Ree4HardcodedTarget
            | Ree5NoStateChangeAfter
            | Ree6ValueWithinMsgValue => VulnClass::Ree,
            Td1IntervalCheck => VulnClass::Td,
        }
    }

    pub fn name(self) -> &'static str {
        use PatternId::*;
        match self {
            Urv1Unreachable => "URV1_Unreachable",
            Urv2RestrictiveModifier => "URV2_RestrictiveModifier",
            Urv3GuardCondition => "URV3_GuardCondition",
            Urv4RecipientIsCaller => "URV4_RecipientIsCaller",
            Urv5TerminalCall => "URV5_TerminalCall",
            Ree1Unreachable => "REE1_Unreachable",
            Ree2RestrictiveModifier => "REE2_RestrictiveModifier",
            Ree3GuardCondition => "REE3_GuardCondition",
            Ree4HardcodedTarget => "REE4_HardcodedTarget",
            Ree5NoStateChangeAfter => "REE5_NoStateChangeAfter",
            Ree6ValueWithinMsgValue => "REE6_ValueWithinMsgValue",
            Td1IntervalCheck => "TD1_IntervalCheck",
        }
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "reason")]
pub enum Outcome {
    LikelyTP,
    FlaggedFP,
    NotAnalyzed(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::LikelyTP => write!(f, "likely true positive"),
            Outcome::FlaggedFP => write!(f, "flagged false positive"),
            Outcome::NotAnalyzed(r) => write!(f, "not analyzed ({r})"),
        }
    }
}

/// Classification of one candidate.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub candidate: Candidate,
    pub outcome: Outcome,
    pub matched_patterns: BTreeSet<PatternId>,
    /// Evidence trail: guard locations, hardcoded literals, terminal
    /// position, interval widths.
    pub justification: Vec<String>,
    /// Set when the 2300-gas stipend of builtin send/transfer is what
    /// suppresses the reentrancy alarm (no numbered pattern covers it).
    pub stipend_suppressed: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Interval width (seconds) above which a timestamp comparison is
    /// beyond miner manipulation.
    pub interval_threshold: u128,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            interval_threshold: 20,
        }
    }
}

/// Classify one Unchecked Return Value candidate.
pub fn classify_urv(c: &Candidate, model: &ContractModel, opts: &ClassifyOptions) -> Verdict {
    let _ = opts;
    let Some(func) = function_of(c, model) else {
        return not_analyzed(c, "function-not-found");
    };
    let mut matched = BTreeSet::new();
    let mut why = Vec::new();

    check_permission_patterns(c, func, model, VulnClass::Urv, &mut matched, &mut why);

    // URV4: the recipient is the caller — failure is self-harm
    if let Some(recv) = &c.receiver_expr {
        if classify_address(recv, func, model) == AddressClass::CallerControlled {
            matched.insert(PatternId::Urv4RecipientIsCaller);
            why.push(format!(
                "recipient `{}` is the caller's own address",
                c.receiver.as_deref().unwrap_or("?")
            ));
        }
    }

    // URV5: nothing harmful can execute after the call
    if let Some(cfg) = &func.cfg {
        if let Ok(after) = statements_after(cfg, c.stmt_span) {
            if !writes_state_after(&after) && !calls_out_after(&after) {
                matched.insert(PatternId::Urv5TerminalCall);
                why.push("no state write or external call can follow this call".into());
            }
        }
    }

    finish(c, matched, why, false)
}

/// Classify one Reentrancy candidate.
pub fn classify_ree(c: &Candidate, model: &ContractModel, opts: &ClassifyOptions) -> Verdict {
    let _ = opts;
    let Some(func) = function_of(c, model) else {
        return not_analyzed(c, "function-not-found");
    };
    let mut matched = BTreeSet::new();
    let mut why = Vec::new();

    check_permission_patterns(c, func, model, VulnClass::Ree, &mut matched, &mut why);

    // REE4: hardcoded call target is beyond the attacker's control
    if let Some(recv) = &c.receiver_expr {
        if classify_address(recv, func, model) == AddressClass::LiteralHardcoded {
            matched.insert(PatternId::Ree4HardcodedTarget);
            why.push(format!(
                "call target `{}` is a hardcoded address",
                c.receiver.as_deref().unwrap_or("?")
            ));
        }
    }

    // REE5: no state variable modified between the call and termination
    // (event emission is logging, not a state change)
    if let Some(cfg) = &func.cfg {
        if let Ok(after) = statements_after(cfg, c.stmt_span) {
            if !writes_state_after(&after) {
                matched.insert(PatternId::Ree5NoStateChangeAfter);
                why.push("no state variable is modified after the call".into());
            }
        }
    }

    // REE6: transferred value provably within what the call brought in
    if let Some(amount) = &c.value_arg {
        if value_within_msg_value(amount, func, 4) {
            matched.insert(PatternId::Ree6ValueWithinMsgValue);
            why.push(format!(
                "transferred value `{}` cannot exceed msg.value",
                amount.display()
            ));
        }
    }

    // builtin send/transfer forwards only the 2300-gas stipend: too little
    // to re-enter, unless an explicit gas option raises it
    let stipend = c.gas_stipend;
    if stipend {
        why.push(
            "builtin send/transfer forwards a 2300-gas stipend; the callee cannot re-enter".into(),
        );
    }
    finish(c, matched, why, stipend)
}

/// Classify one Timestamp Dependence candidate by following every use of
/// the tainted value from the candidate statement.
pub fn classify_td(c: &Candidate, model: &ContractModel, opts: &ClassifyOptions) -> Verdict {
    let Some(func) = function_of(c, model) else {
        return not_analyzed(c, "function-not-found");
    };
    let mut chase = TaintChase {
        model,
        opts,
        visited: BTreeSet::new(),
        safe: Vec::new(),
        unsafe_uses: Vec::new(),
        escapes: Vec::new(),
    };
    for use_rec in func.taint.uses_at(c.stmt_span) {
        chase.follow(use_rec, func);
    }
    dedup_preserving_order(&mut chase.safe);
    dedup_preserving_order(&mut chase.unsafe_uses);
    dedup_preserving_order(&mut chase.escapes);

    if !chase.unsafe_uses.is_empty() {
        let mut why = chase.unsafe_uses;
        why.extend(chase.safe);
        return Verdict {
            candidate: c.clone(),
            outcome: Outcome::LikelyTP,
            matched_patterns: BTreeSet::new(),
            justification: why,
            stipend_suppressed: false,
        };
    }
    if !chase.escapes.is_empty() {
        let mut v = not_analyzed(c, "function-local-scope");
        v.justification = chase.escapes;
        return v;
    }
    Verdict {
        candidate: c.clone(),
        outcome: Outcome::FlaggedFP,
        matched_patterns: BTreeSet::from([PatternId::Td1IntervalCheck]),
        justification: if chase.safe.is_empty() {
            vec!["stored value is never used outside interval verification".into()]
        } else {
            chase.safe
        },
        stipend_suppressed: false,
    }
}

struct TaintChase<'a> {
    model: &'a ContractModel,
    opts: &'a ClassifyOptions,
    /// (scope, ident) pairs already chased; scope is the function name for
    /// locals and empty for state variables.
    visited: BTreeSet<(String, String)>,
    safe: Vec<String>,
    unsafe_uses: Vec<String>,
    escapes: Vec<String>,
}

impl<'a> TaintChase<'a> {
    fn follow(&mut self, use_rec: &TaintUse, func: &FnModel) {
        let line = use_rec.stmt_span.line_start;
        match &use_rec.kind {
            UseKind::Comparison { width: Some(w) } => {
                if *w > self.opts.interval_threshold {
                    self.safe.push(format!(
                        "interval check of width {w}s (> {}s) at line {line}",
                        self.opts.interval_threshold
                    ));
                } else {
                    self.unsafe_uses.push(format!(
                        "interval width {w}s at line {line} is within miner manipulation range (threshold {}s)",
                        self.opts.interval_threshold
                    ));
                }
            }
            UseKind::Comparison { width: None } => {
                self.safe
                    .push(format!("comparison against a non-constant at line {line}"));
            }
            UseKind::Assignment { targets } => {
                for target in targets {
                    self.chase_ident(target, func);
                }
            }
            UseKind::ValueFlow { what } => {
                self.unsafe_uses
                    .push(format!("tainted value flows into {what} at line {line}"));
            }
            UseKind::InternalCallArg { callee } => {
                self.escapes.push(format!(
                    "tainted value passed to `{callee}` at line {line}; analysis is local to a function"
                ));
            }
            UseKind::ReturnValue => {
                self.escapes.push(format!(
                    "tainted value returned at line {line}; analysis is local to a function"
                ));
            }
            UseKind::Other => {
                self.unsafe_uses.push(format!(
                    "non-comparison use of tainted value at line {line}"
                ));
            }
        }
    }

    fn chase_ident(&mut self, ident: &str, origin: &FnModel) {
        let is_state = self.model.state_vars.contains_key(ident);
        let scope = if is_state {
            String::new()
        } else {
            origin.name().to_string()
        };
        if !self.visited.insert((scope, ident.to_string())) {
            return;
        }
        if is_state {
            // state persists: every read of it anywhere in the contract is
            // downstream of this write
            let fns: Vec<&FnModel> = self.model.functions.iter().collect();
            for g in fns {
                let uses: Vec<TaintUse> = g
                    .taint
                    .uses
                    .iter()
                    .filter(|u| u.ident == ident)
                    .cloned()
                    .collect();
                for u in uses {
                    self.follow(&u, g);
                }
            }
        } else {
            let uses: Vec<TaintUse> = origin
                .taint
                .uses
                .iter()
                .filter(|u| u.ident == ident)
                .cloned()
                .collect();
            for u in uses {
                self.follow(&u, origin);
            }
        }
    }
}

/// URV1–3 / REE1–3: the shared "Permission Control" patterns.
fn check_permission_patterns(
    c: &Candidate,
    func: &FnModel,
    model: &ContractModel,
    class: VulnClass,
    matched: &mut BTreeSet<PatternId>,
    why: &mut Vec<String>,
) {
    let (p1, p2, p3) = match class {
        VulnClass::Urv => (
            PatternId::Urv1Unreachable,
            PatternId::Urv2RestrictiveModifier,
            PatternId::Urv3GuardCondition,
        ),
        VulnClass::Ree => (
            PatternId::Ree1Unreachable,
            PatternId::Ree2RestrictiveModifier,
            PatternId::Ree3GuardCondition,
        ),
        VulnClass::Td => unreachable!("TD has its own single pattern"),
    };

    // pattern 1: not reachable from any unrestricted public/external entry
    if let Some(idx) = function_index_of(c, model) {
        if !model.call_graph.reachable_from_unrestricted(idx) {
            matched.insert(p1);
            why.push(format!(
                "`{}` is unreachable from public or external functions free of restrictions",
                func.name()
            ));
        }
    }

    // pattern 2: a restricting modifier on the enclosing function
    let modifier_guards: Vec<&RestrictionReason> = func
        .restriction
        .reasons
        .iter()
        .filter(|r| matches!(r, RestrictionReason::ModifierGuard { .. }))
        .collect();
    if !modifier_guards.is_empty() {
        matched.insert(p2);
        for g in &modifier_guards {
            why.push(format!("access restricted by {}", g.describe()));
        }
    }

    // pattern 3: an inline guard dominating the candidate statement
    if let Some(body) = &func.def.body {
        let class_of = |e: &Expr| classify_address(e, func, model);
        let guards = guards_dominating(body, c.stmt_span, &class_of);
        if !guards.is_empty() {
            matched.insert(p3);
            let all_fixed = guards.iter().all(|g| {
                !g.classes.is_empty()
                    && g.classes.iter().all(|cl| {
                        matches!(
                            cl,
                            AddressClass::LiteralHardcoded | AddressClass::DeployerAtConstruction
                        )
                    })
            });
            for g in &guards {
                why.push(format!(
                    "guarded by caller check at line {}{}",
                    g.span.line_start,
                    if all_fixed {
                        " (caller confined to hardcoded/deployer addresses)"
                    } else {
                        ""
                    }
                ));
            }
        }
    }
}

/// Syntactic proof that `amount <= msg.value`: the amount is `msg.value`,
/// `msg.value / k` with k a positive integer literal, `msg.value - e` with
/// e a literal, or a local assigned only such forms.
fn value_within_msg_value(amount: &Expr, func: &FnModel, depth: u8) -> bool {
    if depth == 0 {
        return false;
    }
    let e = amount.peel_casts();
    if e.is_msg_value() {
        return true;
    }
    match &e.kind {
        ExprKind::Binary {
            op: BinOp::Div,
            lhs,
            rhs,
        } => {
            lhs.peel_casts().is_msg_value()
                && matches!(&rhs.kind, ExprKind::NumberLit { value: Some(v), .. } if *v > 0)
        }
        ExprKind::Binary {
            op: BinOp::Sub,
            lhs,
            rhs,
        } => {
            lhs.peel_casts().is_msg_value()
                && matches!(&rhs.kind, ExprKind::NumberLit { value: Some(_), .. })
        }
        ExprKind::Ident(name) => {
            use crate::ast::{walk_stmts, StmtKind};
            let Some(body) = &func.def.body else {
                return false;
            };
            let mut assignments: Vec<&Expr> = Vec::new();
            let mut other_writes = false;
            walk_stmts(body, &mut |s| match &s.kind {
                StmtKind::VarDecl { slots, init } => {
                    if slots.len() == 1 {
                        if let (Some(slot), Some(init)) = (&slots[0], init) {
                            if slot.name == *name {
                                assignments.push(init);
                            }
                        }
                    } else if slots.iter().flatten().any(|sl| sl.name == *name) {
                        other_writes = true;
                    }
                }
                StmtKind::Assign { lhs, rhs, op } if lhs.ident() == Some(name) => {
                    if *op == crate::ast::AssignOp::Assign {
                        assignments.push(rhs);
                    } else {
                        other_writes = true;
                    }
                }
                _ => {}
            });
            !other_writes
                && !assignments.is_empty()
                && assignments
                    .iter()
                    .all(|rhs| value_within_msg_value(rhs, func, depth - 1))
        }
        _ => false,
    }
}

fn dedup_preserving_order(v: &mut Vec<String>) {
    let mut seen = BTreeSet::new();
    v.retain(|s| seen.insert(s.clone()));
}

fn function_index_of(c: &Candidate, model: &ContractModel) -> Option<usize> {
    model
        .functions
        .iter()
        .position(|f| f.def.span.contains(&c.stmt_span) && f.name() == c.function)
}

fn function_of<'m>(c: &Candidate, model: &'m ContractModel) -> Option<&'m FnModel> {
    function_index_of(c, model).map(|i| &model.functions[i])
}

fn not_analyzed(c: &Candidate, reason: &str) -> Verdict {
    Verdict {
        candidate: c.clone(),
        outcome: Outcome::NotAnalyzed(reason.to_string()),
        matched_patterns: BTreeSet::new(),
        justification: Vec::new(),
        stipend_suppressed: false,
    }
}

fn finish(
    c: &Candidate,
    matched: BTreeSet<PatternId>,
    justification: Vec<String>,
    stipend: bool,
) -> Verdict {
    let outcome = if !matched.is_empty() || stipend {
        Outcome::FlaggedFP
    } else {
        Outcome::LikelyTP
    };
    Verdict {
        candidate: c.clone(),
        outcome,
        matched_patterns: matched,
        justification,
        stipend_suppressed: stipend,
    }
}

/// Run detection and classification for every candidate of the selected
/// classes, ordered by (file, line, class).
pub fn classify_all(
    model: &ContractModel,
    classes: &[VulnClass],
    opts: &ClassifyOptions,
) -> Vec<Verdict> {
    let candidates = detect_all(model, classes);
    let mut verdicts: Vec<Verdict> = candidates
        .iter()
        .map(|c| match c.vuln {
            VulnClass::Urv => classify_urv(c, model, opts),
            VulnClass::Ree => classify_ree(c, model, opts),
            VulnClass::Td => classify_td(c, model, opts),
        })
        .collect();
    verdicts.sort_by(|a, b| {
        (
            &a.candidate.span.file,
            a.candidate.line(),
            a.candidate.span.span.col_start,
            a.candidate.vuln,
        )
            .cmp(&(
                &b.candidate.span.file,
                b.candidate.line(),
                b.candidate.span.span.col_start,
                b.candidate.vuln,
            ))
    });
    verdicts
}

/// Not-analyzed records for a model (opaque bodies, unparsed contracts).
pub fn not_analyzed_records(model: &ContractModel) -> Vec<NotAnalyzedRecord> {
    model.not_analyzed.clone()
}
