//! Candidate detection: every instruction that *could* be an instance of
//! one of the three vulnerability classes, before any filtering. This is
//! deliberately the same "flag everything" baseline the coarse scanners
//! use — the anti-pattern filters then sift it.

use crate::ast::*;
use crate::model::{ContractModel, FnModel};
use crate::span::{SourceSpan, Span};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VulnClass {
    #[serde(rename = "URV")]
    Urv,
    #[serde(rename = "REE")]
    Ree,
    #[serde(rename = "TD")]
    Td,
}

impl VulnClass {
    pub const ALL: [VulnClass; 3] = [VulnClass::Urv, VulnClass::Ree, VulnClass::Td];

    pub fn parse(s: &str) -> Option<VulnClass> {
        match s.to_ascii_lowercase().as_str() {
            "urv" => Some(VulnClass::Urv),
            "ree" => Some(VulnClass::Ree),
            "td" => Some(VulnClass::Td),
            _ => None,
        }
    }
}

impl fmt::Display for VulnClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VulnClass::Urv => write!(f, "URV"),
            VulnClass::Ree => write!(f, "REE"),
            VulnClass::Td => write!(f, "TD"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    Send,
    Call,
    Callcode,
    Delegatecall,
    Transfer,
    ExternalMemberCall,
    TimestampUse,
}

/// One potentially vulnerable instruction.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub vuln: VulnClass,
    /// The offending call or use expression.
    pub span: SourceSpan,
    /// The whole statement containing it.
    pub stmt_span: Span,
    pub contract: String,
    pub function: String,
    pub call_kind: CallKind,
    /// Receiver/target display text, for call-like candidates.
    pub receiver: Option<String>,
    /// Receiver/target expression (kept for classification).
    pub receiver_expr: Option<Expr>,
    /// Value argument: `send(x)`/`transfer(x)` amount or call value option.
    pub value_arg: Option<Expr>,
    /// Builtin send/transfer forwards a fixed 2300-gas stipend unless an
    /// explicit gas option appears.
    pub gas_stipend: bool,
    pub analyzed: bool,
    pub not_analyzed_reason: Option<String>,
}

impl Candidate {
    pub fn line(&self) -> u32 {
        self.span.line()
    }

    fn sort_key(&self) -> (String, u32, u32, VulnClass) {
        (
            self.span.file.clone(),
            self.span.span.line_start,
            self.span.span.col_start,
            self.vuln,
        )
    }
}

/// A call expression broken into the parts the detectors look at.
struct CallSite<'a> {
    call: &'a Expr,
    base: &'a Expr,
    member: &'a str,
    args: &'a [Expr],
    value: Option<&'a Expr>,
    gas: Option<&'a Expr>,
}

fn call_site(expr: &Expr) -> Option<CallSite<'_>> {
    let ExprKind::Call {
        callee,
        args,
        value,
        gas,
    } = &expr.kind
    else {
        return None;
    };
    let ExprKind::Member { base, name } = &callee.kind else {
        return None;
    };
    Some(CallSite {
        call: expr,
        base,
        member: name,
        args,
        value: value.as_deref(),
        gas: gas.as_deref(),
    })
}

fn low_level_kind(member: &str) -> Option<CallKind> {
    Some(match member {
        "send" => CallKind::Send,
        "call" => CallKind::Call,
        "callcode" => CallKind::Callcode,
        "delegatecall" => CallKind::Delegatecall,
        _ => return None,
    })
}

/// Detect Unchecked Return Value candidates: `send`/`call`/`callcode`/
/// `delegatecall` invocations whose boolean result is neither bound nor
/// used in any condition.
pub fn detect_urv(model: &ContractModel) -> Vec<Candidate> {
    let mut out = Vec::new();
    for func in &model.functions {
        if !func.analyzable {
            continue;
        }
        let body = func.def.body.as_ref().unwrap();
        walk_stmts(body, &mut |stmt| {
            for call in unused_result_calls(stmt) {
                let Some(site) = call_site(call) else {
                    continue;
                };
                let Some(kind) = low_level_kind(site.member) else {
                    continue;
                };
                if is_contract_typed_base(site.base, func, model) {
                    continue; // `Token(x).call(...)` is that contract's own function
                }
                out.push(make_candidate(
                    VulnClass::Urv,
                    kind,
                    &site,
                    stmt,
                    func,
                    model,
                ));
            }
        });
    }
    sort_candidates(out)
}

/// Detect Reentrancy candidates: low-level `call` invocations plus member
/// calls on contract-typed targets. Builtin `send`/`transfer` sites are
/// recorded too, pre-marked with the 2300-gas stipend note.
pub fn detect_ree(model: &ContractModel) -> Vec<Candidate> {
    let mut out = Vec::new();
    for func in &model.functions {
        if !func.analyzable {
            continue;
        }
        let body = func.def.body.as_ref().unwrap();
        walk_stmts(body, &mut |stmt| {
            stmt_exprs(stmt, &mut |e| {
                let Some(site) = call_site(e) else { return };
                if is_contract_typed_base(site.base, func, model) {
                    out.push(make_candidate(
                        VulnClass::Ree,
                        CallKind::ExternalMemberCall,
                        &site,
                        stmt,
                        func,
                        model,
                    ));
                    return;
                }
                match site.member {
                    "call" => out.push(make_candidate(
                        VulnClass::Ree,
                        CallKind::Call,
                        &site,
                        stmt,
                        func,
                        model,
                    )),
                    "send" | "transfer" => {
                        let kind = if site.member == "send" {
                            CallKind::Send
                        } else {
                            CallKind::Transfer
                        };
                        let mut c = make_candidate(VulnClass::Ree, kind, &site, stmt, func, model);
                        c.gas_stipend = site.gas.is_none();
                        out.push(c);
                    }
                    _ => {}
                }
            });
        });
    }
    sort_candidates(out)
}

/// Detect Timestamp Dependence candidates: one per statement containing a
/// use of `block.timestamp`/`now` or of a timestamp-tainted variable.
pub fn detect_td(model: &ContractModel) -> Vec<Candidate> {
    let mut out = Vec::new();
    for func in &model.functions {
        if !func.analyzable {
            continue;
        }
        let mut seen_stmts: Vec<Span> = Vec::new();
        for use_rec in &func.taint.uses {
            if seen_stmts.contains(&use_rec.stmt_span) {
                continue;
            }
            seen_stmts.push(use_rec.stmt_span);
            out.push(Candidate {
                vuln: VulnClass::Td,
                span: SourceSpan::new(model.file.clone(), use_rec.stmt_span),
                stmt_span: use_rec.stmt_span,
                contract: model.name.clone(),
                function: func.name().to_string(),
                call_kind: CallKind::TimestampUse,
                receiver: None,
                receiver_expr: None,
                value_arg: None,
                gas_stipend: false,
                analyzed: true,
                not_analyzed_reason: None,
            });
        }
    }
    sort_candidates(out)
}

/// All candidates for the selected classes, sorted by (file, line, column).
pub fn detect_all(model: &ContractModel, classes: &[VulnClass]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for class in classes {
        match class {
            VulnClass::Urv => out.extend(detect_urv(model)),
            VulnClass::Ree => out.extend(detect_ree(model)),
            VulnClass::Td => out.extend(detect_td(model)),
        }
    }
    sort_candidates(out)
}

fn sort_candidates(mut v: Vec<Candidate>) -> Vec<Candidate> {
    v.sort_by_key(|a| a.sort_key());
    v
}

fn make_candidate(
    vuln: VulnClass,
    call_kind: CallKind,
    site: &CallSite<'_>,
    stmt: &Stmt,
    func: &FnModel,
    model: &ContractModel,
) -> Candidate {
    let value_arg = site.value.cloned().or_else(|| {
        if matches!(call_kind, CallKind::Send | CallKind::Transfer) {
            site.args.first().cloned()
        } else {
            None
        }
    });
    Candidate {
        vuln,
        span: SourceSpan::new(model.file.clone(), site.call.span),
        stmt_span: stmt.span,
        contract: model.name.clone(),
        function: func.name().to_string(),
        call_kind,
        receiver: Some(site.base.display()),
        receiver_expr: Some((*site.base).clone()),
        value_arg,
        gas_stipend: false,
        analyzed: true,
        not_analyzed_reason: None,
    }
}

/// The base resolves to a contract in this unit: a `C(x)` cast, or a
/// variable declared with a contract type.
fn is_contract_typed_base(base: &Expr, func: &FnModel, model: &ContractModel) -> bool {
    match &base.kind {
        ExprKind::Call { callee, .. } => callee
            .ident()
            .is_some_and(|n| model.contract_type_names.contains(n)),
        ExprKind::Ident(name) => {
            let ty = func
                .locals
                .get(name)
                .cloned()
                .or_else(|| model.state_vars.get(name).map(|v| v.type_name.clone()));
            ty.is_some_and(|t| model.contract_type_names.contains(&t))
        }
        _ => false,
    }
}

/// Low-level calls in this statement whose boolean result goes nowhere:
/// not bound by assignment or declaration (tuple destructuring included)
/// and not used inside any condition (`if`/`require`/`assert`/ternary/
/// boolean or comparison expression).
fn unused_result_calls(stmt: &Stmt) -> Vec<&Expr> {
    let mut out = Vec::new();
    if let StmtKind::ExprStmt(e) = &stmt.kind {
        collect_bare_calls(e, &mut out);
    }
    // every other statement kind either binds the result or uses it inside
    // a condition/argument context
    out
}

/// Top-level call chains of an expression statement. A call used as an
/// operand of `&&`/`||`/comparison/ternary counts as checked; anything
/// else at statement level is a bare, unchecked invocation.
fn collect_bare_calls<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &e.kind {
        ExprKind::Call { .. } => out.push(e),
        ExprKind::Tuple(items) => {
            for item in items.iter().flatten() {
                collect_bare_calls(item, out);
            }
        }
        _ => {}
    }
}
