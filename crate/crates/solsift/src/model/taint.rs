//! Timestamp taint: which identifiers carry a value derived from
//! `block.timestamp`/`now`, and how each tainted value is used.
//!
//! Propagation is the least fixed point of "a tainted right-hand side
//! taints the left-hand side", computed per function, with state variables
//! shared across the whole contract: a state variable assigned a tainted
//! value anywhere is tainted everywhere.
//!
//! Each use site records its kind; the timestamp filter later decides from
//! these whether a use is interval verification (potentially safe), value
//! flow (suspicious), or something that would need looking into another
//! function (not analyzable at function scope).

use super::{ContractModel, FnModel};
use crate::ast::*;
use crate::span::Span;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const TIMESTAMP: &str = "block.timestamp";
pub const NOW: &str = "now";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UseKind {
    /// Operand of a relational comparison; `width` is the interval width in
    /// seconds when it is derivable from the comparison's shape.
    Comparison {
        width: Option<u128>,
    },
    /// Feeds an assignment; taint continues at the targets.
    Assignment {
        targets: Vec<String>,
    },
    /// Flows into an amount, call payload, hash input, or index.
    ValueFlow {
        what: &'static str,
    },
    /// Passed as an argument to another function of this contract; judging
    /// it needs inter-function analysis.
    InternalCallArg {
        callee: String,
    },
    /// Returned to the caller; same limitation.
    ReturnValue,
    Other,
}

impl fmt::Display for UseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UseKind::Comparison { width: Some(w) } => {
                write!(f, "comparison with interval width {w}s")
            }
            UseKind::Comparison { width: None } => {
                write!(f, "comparison against a non-constant")
            }
            UseKind::Assignment { targets } => write!(f, "assigned into {}", targets.join(", ")),
            UseKind::ValueFlow { what } => write!(f, "flows into {what}"),
            UseKind::InternalCallArg { callee } => {
                write!(f, "passed to function `{callee}`")
            }
            UseKind::ReturnValue => write!(f, "returned to caller"),
            UseKind::Other => write!(f, "non-comparison use"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaintUse {
    pub stmt_span: Span,
    /// The tainted identifier being read (`block.timestamp`/`now` for
    /// direct uses).
    pub ident: String,
    pub kind: UseKind,
}

#[derive(Debug, Clone, Default)]
pub struct TaintSet {
    /// Tainted identifiers in scope of the function: locals plus tainted
    /// state variables; always contains the two builtin names.
    pub tainted: BTreeSet<String>,
    pub uses: Vec<TaintUse>,
}

impl TaintSet {
    pub fn uses_at(&self, stmt_span: Span) -> impl Iterator<Item = &TaintUse> {
        self.uses.iter().filter(move |u| u.stmt_span == stmt_span)
    }
}

/// Fill in every function's `TaintSet`. Runs the cross-function state
/// fixpoint first, then collects per-function use records.
pub fn compute_taint(model: &mut ContractModel) {
    let state_names: BTreeSet<String> = model.state_vars.keys().cloned().collect();

    let mut tainted_state: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut changed = false;
        for f in &model.functions {
            let (_, new_state) = propagate_function(f, &tainted_state, &state_names);
            for s in new_state {
                changed |= tainted_state.insert(s);
            }
        }
        if !changed {
            break;
        }
    }

    let events = model.events.clone();
    let contract_types = model.contract_type_names.clone();
    for f in &mut model.functions {
        let (locals, _) = propagate_function(f, &tainted_state, &state_names);
        let mut tainted: BTreeSet<String> = tainted_state.union(&locals).cloned().collect();
        tainted.insert(TIMESTAMP.to_string());
        tainted.insert(NOW.to_string());
        let uses = collect_uses(f, &tainted, &events, &contract_types);
        f.taint = TaintSet { tainted, uses };
    }
}

/// One more propagation pass; used by tests to check the fixpoint is
/// stable.
pub fn propagate_once(
    f: &FnModel,
    tainted_state: &BTreeSet<String>,
    state_names: &BTreeSet<String>,
) -> (BTreeSet<String>, BTreeSet<String>) {
    propagate_function(f, tainted_state, state_names)
}

fn propagate_function(
    f: &FnModel,
    tainted_state: &BTreeSet<String>,
    state_names: &BTreeSet<String>,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut local: BTreeSet<String> = BTreeSet::new();
    let mut new_state: BTreeSet<String> = tainted_state.clone();
    let Some(body) = &f.def.body else {
        return (local, BTreeSet::new());
    };
    loop {
        let mut changed = false;
        let mut visit = |s: &Stmt| {
            let (targets, rhs): (Vec<String>, Option<&Expr>) = match &s.kind {
                StmtKind::VarDecl { slots, init } => (
                    slots.iter().flatten().map(|sl| sl.name.clone()).collect(),
                    init.as_ref(),
                ),
                StmtKind::Assign { lhs, rhs, .. } => {
                    let mut t = Vec::new();
                    match &lhs.kind {
                        ExprKind::Tuple(items) => {
                            for item in items.iter().flatten() {
                                if let Some(root) = item.lvalue_root() {
                                    t.push(root.to_string());
                                }
                            }
                        }
                        _ => {
                            if let Some(root) = lhs.lvalue_root() {
                                t.push(root.to_string());
                            }
                        }
                    }
                    (t, Some(rhs))
                }
                _ => (Vec::new(), None),
            };
            let Some(rhs) = rhs else { return };
            if !expr_tainted(rhs, &local, &new_state) {
                return;
            }
            for t in targets {
                if state_names.contains(&t) {
                    changed |= new_state.insert(t);
                } else {
                    changed |= local.insert(t);
                }
            }
        };
        walk_stmts(body, &mut visit);
        if !changed {
            break;
        }
    }
    let introduced: BTreeSet<String> = new_state.difference(tainted_state).cloned().collect();
    (local, introduced)
}

fn expr_tainted(e: &Expr, local: &BTreeSet<String>, state: &BTreeSet<String>) -> bool {
    let mut hit = false;
    walk_expr(e, &mut |n| {
        if n.is_timestamp() {
            hit = true;
        } else if let Some(id) = n.ident() {
            if local.contains(id) || state.contains(id) {
                hit = true;
            }
        }
    });
    hit
}

// ---------------------------------------------------------------------------
// Use collection
// ---------------------------------------------------------------------------

/// Where a read expression sits in its statement, which decides the kind
/// when the climb reaches the top of the expression.
#[derive(Clone, Copy, PartialEq)]
enum ReadOrigin<'a> {
    AssignRhs(&'a Expr),
    DeclRhs(&'a [Option<DeclSlot>]),
    LhsIndexKey,
    Condition,
    ReturnExpr,
    EmitArg,
    RevertArg,
    Bare,
}

fn collect_uses(
    f: &FnModel,
    tainted: &BTreeSet<String>,
    events: &BTreeSet<String>,
    contract_types: &BTreeSet<String>,
) -> Vec<TaintUse> {
    let mut uses = Vec::new();
    let Some(body) = &f.def.body else {
        return uses;
    };
    let cx = UseCx {
        tainted,
        events,
        contract_types,
    };
    walk_stmts(body, &mut |s| {
        for (root, origin) in read_roots(s) {
            cx.scan_root(root, origin, s.span, &mut uses);
        }
    });
    uses
}

/// The expressions a statement reads, with their role.
fn read_roots(s: &Stmt) -> Vec<(&Expr, ReadOrigin<'_>)> {
    let mut out: Vec<(&Expr, ReadOrigin)> = Vec::new();
    match &s.kind {
        StmtKind::ExprStmt(e) => out.push((e, ReadOrigin::Bare)),
        StmtKind::VarDecl {
            slots,
            init: Some(init),
        } => out.push((init, ReadOrigin::DeclRhs(slots))),
        StmtKind::Assign { lhs, rhs, .. } => {
            out.push((rhs, ReadOrigin::AssignRhs(lhs)));
            collect_lhs_keys(lhs, &mut out);
        }
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => {
            out.push((cond, ReadOrigin::Condition));
        }
        StmtKind::For { cond: Some(c), .. } => out.push((c, ReadOrigin::Condition)),
        StmtKind::Return(Some(e)) => out.push((e, ReadOrigin::ReturnExpr)),
        StmtKind::Require(args) | StmtKind::Assert(args) => {
            if let Some(c) = args.first() {
                out.push((c, ReadOrigin::Condition));
            }
        }
        StmtKind::Revert(args) => {
            for a in args {
                out.push((a, ReadOrigin::RevertArg));
            }
        }
        StmtKind::Emit { args, .. } => {
            for a in args {
                out.push((a, ReadOrigin::EmitArg));
            }
        }
        _ => {}
    }
    out
}

fn collect_lhs_keys<'a>(lhs: &'a Expr, out: &mut Vec<(&'a Expr, ReadOrigin<'a>)>) {
    match &lhs.kind {
        ExprKind::Index { base, key } => {
            out.push((key, ReadOrigin::LhsIndexKey));
            collect_lhs_keys(base, out);
        }
        ExprKind::Member { base, .. } => collect_lhs_keys(base, out),
        ExprKind::Tuple(items) => {
            for item in items.iter().flatten() {
                collect_lhs_keys(item, out);
            }
        }
        _ => {}
    }
}

struct UseCx<'a> {
    tainted: &'a BTreeSet<String>,
    events: &'a BTreeSet<String>,
    contract_types: &'a BTreeSet<String>,
}

impl<'a> UseCx<'a> {
    fn scan_root(
        &self,
        root: &Expr,
        origin: ReadOrigin<'_>,
        stmt_span: Span,
        out: &mut Vec<TaintUse>,
    ) {
        // parent chain by node address, within this read root
        let mut parents: ParentMap<'_> = BTreeMap::new();
        build_parents(root, &mut parents);

        let mut occurrences: Vec<&Expr> = Vec::new();
        walk_expr(root, &mut |n| {
            if n.is_timestamp() {
                occurrences.push(n);
            } else if let Some(id) = n.ident() {
                if self.tainted.contains(id) {
                    occurrences.push(n);
                }
            }
        });
        for occ in occurrences {
            let ident = if occ.is_timestamp() {
                if occ.ident() == Some("now") {
                    NOW.to_string()
                } else {
                    TIMESTAMP.to_string()
                }
            } else {
                occ.ident().unwrap().to_string()
            };
            let kind = self.classify(occ, origin, &parents);
            out.push(TaintUse {
                stmt_span,
                ident,
                kind,
            });
        }
    }

    fn classify(&self, occ: &Expr, origin: ReadOrigin<'_>, parents: &ParentMap<'_>) -> UseKind {
        let mut node: &Expr = occ;
        while let Some(parent) = parents.get(&(node as *const Expr)).copied() {
            match &parent.kind {
                ExprKind::Binary { op, .. } if op.is_comparison() => {
                    return UseKind::Comparison {
                        width: comparison_width(parent),
                    };
                }
                // arithmetic, bit ops and boolean combinators pass the
                // value along
                ExprKind::Binary { .. } => node = parent,
                ExprKind::Unary {
                    op: UnOp::Neg | UnOp::BitNot | UnOp::Not,
                    ..
                } => node = parent,
                ExprKind::Unary { .. } => return UseKind::Other,
                ExprKind::Index { key, .. } => {
                    if std::ptr::eq(key.as_ref(), node) {
                        return UseKind::ValueFlow {
                            what: "index selection",
                        };
                    }
                    node = parent; // element read of a tainted collection
                }
                ExprKind::Member { .. } => {
                    node = parent; // field read keeps the taint
                }
                ExprKind::Tuple(_) => node = parent,
                ExprKind::Conditional { cond, .. } => {
                    if std::ptr::eq(cond.as_ref(), node) {
                        return UseKind::Other;
                    }
                    node = parent; // selected value keeps the taint
                }
                ExprKind::Call { callee, value, .. } => {
                    if std::ptr::eq(callee.as_ref(), node) {
                        // `tainted.add(k)`-style arithmetic wrappers
                        if let ExprKind::Member { name, .. } = &node.kind {
                            if matches!(name.as_str(), "add" | "sub" | "mul" | "div" | "mod") {
                                node = parent;
                                continue;
                            }
                        }
                        return UseKind::Other;
                    }
                    if value
                        .as_ref()
                        .is_some_and(|v| std::ptr::eq(v.as_ref(), node))
                    {
                        return UseKind::ValueFlow {
                            what: "transfer amount",
                        };
                    }
                    // casts, SafeMath arguments and abi encoding wrappers
                    // pass the value through
                    if let Some(name) = callee.ident() {
                        if is_type_cast_name(name) || self.contract_types.contains(name) {
                            node = parent;
                            continue;
                        }
                    }
                    if let ExprKind::Member { base, name } = &callee.kind {
                        if matches!(name.as_str(), "add" | "sub" | "mul" | "div" | "mod")
                            || base.ident() == Some("abi")
                        {
                            node = parent;
                            continue;
                        }
                    }
                    return self.classify_call_arg(parent);
                }
                _ => return UseKind::Other,
            }
        }
        // reached the top of the read expression
        match origin {
            ReadOrigin::AssignRhs(lhs) => {
                let mut targets = Vec::new();
                match &lhs.kind {
                    ExprKind::Tuple(items) => {
                        for item in items.iter().flatten() {
                            if let Some(root) = item.lvalue_root() {
                                targets.push(root.to_string());
                            }
                        }
                    }
                    _ => {
                        if let Some(root) = lhs.lvalue_root() {
                            targets.push(root.to_string());
                        }
                    }
                }
                UseKind::Assignment { targets }
            }
            ReadOrigin::DeclRhs(slots) => UseKind::Assignment {
                targets: slots.iter().flatten().map(|sl| sl.name.clone()).collect(),
            },
            ReadOrigin::LhsIndexKey => UseKind::ValueFlow {
                what: "index selection",
            },
            // a bare tainted boolean as a condition: the comparison that
            // produced it was judged where it was formed
            ReadOrigin::Condition => UseKind::Comparison { width: None },
            ReadOrigin::ReturnExpr => UseKind::ReturnValue,
            ReadOrigin::EmitArg | ReadOrigin::RevertArg | ReadOrigin::Bare => UseKind::Other,
        }
    }

    fn classify_call_arg(&self, call: &Expr) -> UseKind {
        let ExprKind::Call { callee, .. } = &call.kind else {
            return UseKind::Other;
        };
        match &callee.kind {
            ExprKind::Member { base, name } => match name.as_str() {
                "send" | "transfer" => UseKind::ValueFlow {
                    what: "transfer amount",
                },
                "call" | "delegatecall" | "callcode" => UseKind::ValueFlow {
                    what: "external call argument",
                },
                _ if base.ident() == Some("this") => UseKind::InternalCallArg {
                    callee: name.clone(),
                },
                _ => UseKind::ValueFlow {
                    what: "external call argument",
                },
            },
            ExprKind::Ident(name) => {
                if matches!(
                    name.as_str(),
                    "keccak256" | "sha3" | "sha256" | "ripemd160" | "ecrecover" | "blockhash"
                ) {
                    UseKind::ValueFlow {
                        what: "randomness seed",
                    }
                } else if self.events.contains(name) {
                    UseKind::Other
                } else {
                    // own function, or an unresolved name we cannot follow
                    UseKind::InternalCallArg {
                        callee: name.clone(),
                    }
                }
            }
            _ => UseKind::Other,
        }
    }
}

fn is_type_cast_name(name: &str) -> bool {
    name == "address"
        || name == "payable"
        || name == "bool"
        || name == "byte"
        || name.starts_with("uint")
        || name.starts_with("int")
        || name.starts_with("bytes")
}

type ParentMap<'a> = BTreeMap<*const Expr, &'a Expr>;

fn build_parents<'a>(root: &'a Expr, parents: &mut ParentMap<'a>) {
    fn record<'a>(parents: &mut ParentMap<'a>, child: &Expr, parent: &'a Expr) {
        parents.insert(child as *const Expr, parent);
    }
    match &root.kind {
        ExprKind::Member { base, .. } => {
            record(parents, base, root);
            build_parents(base, parents);
        }
        ExprKind::Index { base, key } => {
            record(parents, base, root);
            record(parents, key, root);
            build_parents(base, parents);
            build_parents(key, parents);
        }
        ExprKind::Call {
            callee,
            args,
            value,
            gas,
        } => {
            record(parents, callee, root);
            build_parents(callee, parents);
            for a in args {
                record(parents, a, root);
                build_parents(a, parents);
            }
            if let Some(v) = value {
                record(parents, v, root);
                build_parents(v, parents);
            }
            if let Some(g) = gas {
                record(parents, g, root);
                build_parents(g, parents);
            }
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            record(parents, lhs, root);
            record(parents, rhs, root);
            build_parents(lhs, parents);
            build_parents(rhs, parents);
        }
        ExprKind::Unary { operand, .. } => {
            record(parents, operand, root);
            build_parents(operand, parents);
        }
        ExprKind::Conditional {
            cond,
            then_expr,
            else_expr,
        } => {
            for e in [cond, then_expr, else_expr] {
                record(parents, e, root);
                build_parents(e, parents);
            }
        }
        ExprKind::Tuple(items) => {
            for item in items.iter().flatten() {
                record(parents, item, root);
                build_parents(item, parents);
            }
        }
        _ => {}
    }
}

/// Interval width of a comparison when its shape allows deriving one:
/// `(T - x) REL k`, `T REL x + k`, `T REL x.add(k)`, `T REL x - k`, or
/// `T REL k` with `k` a literal (time units already normalized).
pub fn comparison_width(cmp: &Expr) -> Option<u128> {
    let ExprKind::Binary { op, lhs, rhs } = &cmp.kind else {
        return None;
    };
    if !op.is_comparison() {
        return None;
    }
    for side in [lhs.as_ref(), rhs.as_ref()] {
        if let Some(v) = literal_value(side) {
            return Some(v);
        }
    }
    for side in [lhs.as_ref(), rhs.as_ref()] {
        if let Some(v) = offset_literal(side) {
            return Some(v);
        }
    }
    None
}

fn literal_value(e: &Expr) -> Option<u128> {
    match &e.kind {
        ExprKind::NumberLit { value, .. } => *value,
        _ => None,
    }
}

/// `x + k`, `x - k`, `x.add(k)` with `k` a literal.
fn offset_literal(e: &Expr) -> Option<u128> {
    match &e.kind {
        ExprKind::Binary {
            op: BinOp::Add | BinOp::Sub,
            lhs,
            rhs,
        } => literal_value(rhs).or_else(|| literal_value(lhs)),
        ExprKind::Call { callee, args, .. } => match &callee.kind {
            ExprKind::Member { name, .. }
                if matches!(name.as_str(), "add" | "sub") && args.len() == 1 =>
            {
                literal_value(&args[0])
            }
            _ => None,
        },
        _ => None,
    }
}
