//! Semantic model built on top of the AST: state-variable provenance,
//! address classification, modifier and guard restriction analysis, the
//! intra-contract call graph, per-function CFGs, and timestamp taint.
//!
//! Everything here is immutable after `build_model` returns, so models can
//! be queried from any number of threads.

pub mod callgraph;
pub mod cfg;
pub mod taint;

use crate::ast::*;
use crate::span::Span;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

pub use callgraph::CallGraph;
pub use cfg::{statements_after, Cfg, Effect};
pub use taint::{TaintSet, TaintUse, UseKind};

/// Who can end up being a given address expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AddressClass {
    /// Fixed by a 40-hex-digit literal in the source.
    LiteralHardcoded,
    /// Assigned `msg.sender` only during construction: the deployer.
    DeployerAtConstruction,
    /// Whoever calls the function controls it.
    CallerControlled,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct StateVarInfo {
    pub name: String,
    pub type_name: String,
    pub address_class: AddressClass,
    /// Spans of every assignment (initializer included).
    pub assign_spans: Vec<Span>,
}

/// What a resolved modifier does to callers of the functions it guards.
#[derive(Debug, Clone)]
pub struct ModifierSummary {
    pub name: String,
    pub declared_in: String,
    pub restricting: bool,
    pub restricted_to: BTreeSet<AddressClass>,
    pub guard_span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictionReason {
    ModifierGuard { name: String, span: Span },
    InlineRequireGuard { span: Span },
    InlineIfGuard { span: Span },
}

impl RestrictionReason {
    pub fn describe(&self) -> String {
        match self {
            RestrictionReason::ModifierGuard { name, .. } => format!("modifier `{name}`"),
            RestrictionReason::InlineRequireGuard { span } => {
                format!("require guard at line {}", span.line_start)
            }
            RestrictionReason::InlineIfGuard { span } => {
                format!("if guard at line {}", span.line_start)
            }
        }
    }
}

/// Caller restrictions in force for a whole function.
#[derive(Debug, Clone, Default)]
pub struct RestrictionInfo {
    pub restricted: bool,
    pub reasons: Vec<RestrictionReason>,
    /// Classes the caller is confined to, when restricted.
    pub restricted_to: BTreeSet<AddressClass>,
    /// Applied modifiers we could not resolve anywhere in the unit;
    /// treated as non-restricting.
    pub unresolved_modifiers: Vec<String>,
}

/// A caller-equality guard found in source.
#[derive(Debug, Clone)]
pub struct GuardInfo {
    pub span: Span,
    pub classes: BTreeSet<AddressClass>,
    pub is_require: bool,
}

#[derive(Debug, Clone)]
pub struct FnModel {
    pub def: FunctionDef,
    /// Visibility with the pre-0.5 default applied: unspecified is public.
    pub visibility: Visibility,
    pub restriction: RestrictionInfo,
    pub cfg: Option<Cfg>,
    pub taint: TaintSet,
    /// Declared local name -> type name (params included when typed).
    pub locals: BTreeMap<String, String>,
    pub analyzable: bool,
}

impl FnModel {
    pub fn name(&self) -> &str {
        self.def.kind.display_name()
    }

    pub fn is_constructor(&self) -> bool {
        matches!(self.def.kind, FunctionKind::Constructor)
    }
}

/// A function or contract region the analysis cannot see into.
#[derive(Debug, Clone, Serialize)]
pub struct NotAnalyzedRecord {
    pub file: String,
    pub contract: String,
    pub function: String,
    pub span: Span,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ContractModel {
    pub file: String,
    pub name: String,
    pub kind: ContractKind,
    pub span: Span,
    pub bases: Vec<String>,
    pub events: BTreeSet<String>,
    pub state_vars: BTreeMap<String, StateVarInfo>,
    pub functions: Vec<FnModel>,
    /// Resolved modifiers visible to this contract (own plus those found
    /// in base contracts present in the same unit).
    pub modifiers: BTreeMap<String, ModifierSummary>,
    pub call_graph: CallGraph,
    /// Names of all contracts/interfaces/libraries in the unit, for
    /// recognizing `Token(addr)`-style casts.
    pub contract_type_names: BTreeSet<String>,
    pub not_analyzed: Vec<NotAnalyzedRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ContractModel {
    pub fn function(&self, name: &str) -> Option<&FnModel> {
        self.functions.iter().find(|f| f.name() == name)
    }

    pub fn fn_names(&self) -> BTreeSet<String> {
        self.functions
            .iter()
            .map(|f| f.name().to_string())
            .collect()
    }

    pub fn state_class(&self, name: &str) -> AddressClass {
        self.state_vars
            .get(name)
            .map_or(AddressClass::Unknown, |v| v.address_class)
    }
}

/// Build one model per contract in the unit.
pub fn build_model(unit: &SourceUnit, file: &str) -> Vec<ContractModel> {
    let contract_type_names: BTreeSet<String> = unit
        .contracts
        .iter()
        .map(|c| c.name.clone())
        .filter(|n| !n.is_empty())
        .collect();

    // modifier summaries per declaring contract, then resolution follows
    // `is` edges for bases that parsed in this unit
    let mut declared_modifiers: BTreeMap<String, Vec<ModifierSummary>> = BTreeMap::new();
    for c in &unit.contracts {
        let state_classes = classify_state_vars(c);
        let mut summaries = Vec::new();
        for m in &c.modifiers {
            summaries.push(summarize_modifier(m, &c.name, &state_classes));
        }
        declared_modifiers.insert(c.name.clone(), summaries);
    }

    unit.contracts
        .iter()
        .map(|c| build_contract(c, unit, file, &contract_type_names, &declared_modifiers))
        .collect()
}

fn build_contract(
    c: &ContractDef,
    unit: &SourceUnit,
    file: &str,
    contract_type_names: &BTreeSet<String>,
    declared_modifiers: &BTreeMap<String, Vec<ModifierSummary>>,
) -> ContractModel {
    let mut diagnostics = Vec::new();
    let mut not_analyzed = Vec::new();

    if c.unparsed {
        not_analyzed.push(NotAnalyzedRecord {
            file: file.to_string(),
            contract: c.name.clone(),
            function: String::new(),
            span: c.span,
            reason: "unparsed-contract".into(),
        });
    }

    let state_classes = classify_state_vars(c);
    let state_vars: BTreeMap<String, StateVarInfo> = c
        .state_vars
        .iter()
        .map(|sv| {
            let (class, spans) = state_classes
                .get(&sv.name)
                .cloned()
                .unwrap_or((AddressClass::Unknown, Vec::new()));
            (
                sv.name.clone(),
                StateVarInfo {
                    name: sv.name.clone(),
                    type_name: sv.type_name.clone(),
                    address_class: class,
                    assign_spans: spans,
                },
            )
        })
        .collect();

    let modifiers = resolve_modifiers(c, unit, declared_modifiers);
    let events: BTreeSet<String> = c.events.iter().cloned().collect();
    let fn_names: BTreeSet<String> = c
        .functions
        .iter()
        .map(|f| f.kind.display_name().to_string())
        .collect();

    let mut functions = Vec::new();
    for def in &c.functions {
        let visibility = match def.visibility {
            Visibility::Unspecified => Visibility::Public,
            v => v,
        };
        let mut restriction = function_restriction(def, &modifiers, c, &state_vars);
        for unresolved in &restriction.unresolved_modifiers {
            diagnostics.push(Diagnostic {
                span: def.span,
                message: format!(
                    "modifier `{unresolved}` on `{}.{}` not found in this unit; treated as non-restricting",
                    c.name,
                    def.kind.display_name()
                ),
                severity: Severity::Warning,
            });
        }
        restriction.restricted = !restriction.reasons.is_empty();

        let mut locals: BTreeMap<String, String> = BTreeMap::new();
        for p in &def.params {
            if let Some(n) = &p.name {
                locals.insert(n.clone(), p.type_name.clone());
            }
        }
        let mut opaque = false;
        if let Some(body) = &def.body {
            walk_stmts(body, &mut |s| match &s.kind {
                StmtKind::Opaque => opaque = true,
                StmtKind::VarDecl { slots, .. } => {
                    for slot in slots.iter().flatten() {
                        locals.insert(
                            slot.name.clone(),
                            slot.type_name.clone().unwrap_or_default(),
                        );
                    }
                }
                _ => {}
            });
        }
        let analyzable = def.body.is_some() && !opaque;
        if def.body.is_some() && !analyzable {
            not_analyzed.push(NotAnalyzedRecord {
                file: file.to_string(),
                contract: c.name.clone(),
                function: def.kind.display_name().to_string(),
                span: def.span,
                reason: "opaque-function-body".into(),
            });
        }

        let effect_ctx = cfg::EffectCtx {
            state_vars: state_vars.keys().cloned().collect(),
            state_var_types: state_vars
                .values()
                .map(|v| (v.name.clone(), v.type_name.clone()))
                .collect(),
            events: events.clone(),
            fn_names: fn_names.clone(),
            contract_type_names: contract_type_names.clone(),
            locals: locals.clone(),
        };
        let cfg = if analyzable {
            def.body.as_ref().map(|b| cfg::build_cfg(b, &effect_ctx))
        } else {
            None
        };

        functions.push(FnModel {
            def: def.clone(),
            visibility,
            restriction,
            cfg,
            taint: TaintSet::default(),
            locals,
            analyzable,
        });
    }

    let call_graph = callgraph::build_call_graph(&functions);
    let mut model = ContractModel {
        file: file.to_string(),
        name: c.name.clone(),
        kind: c.kind,
        span: c.span,
        bases: c.bases.clone(),
        events,
        state_vars,
        functions,
        modifiers,
        call_graph,
        contract_type_names: contract_type_names.clone(),
        not_analyzed,
        diagnostics,
    };
    taint::compute_taint(&mut model);
    model
}

// ---------------------------------------------------------------------------
// State-variable provenance
// ---------------------------------------------------------------------------

enum AssignedValue {
    AddressLiteral,
    Caller,
    Other,
}

fn classify_rhs(e: &Expr) -> AssignedValue {
    let e = e.peel_casts();
    if matches!(e.kind, ExprKind::AddressLit(_)) {
        AssignedValue::AddressLiteral
    } else if e.is_caller() {
        AssignedValue::Caller
    } else {
        AssignedValue::Other
    }
}

type StateClasses = BTreeMap<String, (AddressClass, Vec<Span>)>;

/// Inspect every assignment site of every state variable — initializer,
/// constructor, and all function bodies — and classify the variable.
fn classify_state_vars(c: &ContractDef) -> StateClasses {
    struct Site {
        in_constructor: bool,
        value: AssignedValue,
        span: Span,
    }
    let mut sites: BTreeMap<String, Vec<Site>> = BTreeMap::new();
    let names: BTreeSet<&str> = c.state_vars.iter().map(|v| v.name.as_str()).collect();

    for sv in &c.state_vars {
        if let Some(init) = &sv.init {
            sites.entry(sv.name.clone()).or_default().push(Site {
                in_constructor: true,
                value: classify_rhs(init),
                span: sv.span,
            });
        }
    }
    for f in &c.functions {
        let Some(body) = &f.body else { continue };
        let in_constructor = matches!(f.kind, FunctionKind::Constructor);
        // shadowing locals take the name out of state scope
        let mut shadowed: BTreeSet<String> = BTreeSet::new();
        walk_stmts(body, &mut |s| {
            if let StmtKind::VarDecl { slots, .. } = &s.kind {
                for slot in slots.iter().flatten() {
                    shadowed.insert(slot.name.clone());
                }
            }
        });
        walk_stmts(body, &mut |s| {
            if let StmtKind::Assign { lhs, rhs, op } = &s.kind {
                if *op != AssignOp::Assign {
                    // compound assignment derives from the old value
                    if let Some(root) = lhs.lvalue_root() {
                        if names.contains(root) && !shadowed.contains(root) {
                            sites.entry(root.to_string()).or_default().push(Site {
                                in_constructor,
                                value: AssignedValue::Other,
                                span: s.span,
                            });
                        }
                    }
                    return;
                }
                // plain writes to the variable itself; writes through an
                // index/member keep the site but not the provenance
                if let Some(root) = lhs.lvalue_root() {
                    if names.contains(root) && !shadowed.contains(root) {
                        let value = if lhs.ident().is_some() {
                            classify_rhs(rhs)
                        } else {
                            AssignedValue::Other
                        };
                        sites.entry(root.to_string()).or_default().push(Site {
                            in_constructor,
                            value,
                            span: s.span,
                        });
                    }
                }
            }
        });
    }

    let mut out = StateClasses::new();
    for sv in &c.state_vars {
        let var_sites = sites.remove(&sv.name).unwrap_or_default();
        let spans: Vec<Span> = var_sites.iter().map(|s| s.span).collect();
        let class = if var_sites.is_empty() {
            AddressClass::Unknown
        } else if var_sites
            .iter()
            .all(|s| matches!(s.value, AssignedValue::AddressLiteral))
        {
            AddressClass::LiteralHardcoded
        } else if var_sites
            .iter()
            .all(|s| matches!(s.value, AssignedValue::Caller))
        {
            if var_sites.iter().all(|s| s.in_constructor) {
                AddressClass::DeployerAtConstruction
            } else {
                AddressClass::CallerControlled
            }
        } else {
            AddressClass::Unknown
        };
        out.insert(sv.name.clone(), (class, spans));
    }
    out
}

// ---------------------------------------------------------------------------
// Address classification for arbitrary expressions
// ---------------------------------------------------------------------------

/// Classify the address-like expression `expr` as seen from inside `func`.
pub fn classify_address(expr: &Expr, func: &FnModel, model: &ContractModel) -> AddressClass {
    let e = expr.peel_casts();
    if matches!(e.kind, ExprKind::AddressLit(_)) {
        return AddressClass::LiteralHardcoded;
    }
    if e.is_caller() {
        return if func.is_constructor() {
            AddressClass::DeployerAtConstruction
        } else {
            AddressClass::CallerControlled
        };
    }
    if let Some(name) = e.ident() {
        if func.locals.contains_key(name) {
            return classify_local(name, func);
        }
        if model.state_vars.contains_key(name) {
            return model.state_class(name);
        }
    }
    AddressClass::Unknown
}

/// A local is caller-controlled when every assignment to it is the caller,
/// hardcoded when every assignment is an address literal.
fn classify_local(name: &str, func: &FnModel) -> AddressClass {
    let Some(body) = &func.def.body else {
        return AddressClass::Unknown;
    };
    let mut values = Vec::new();
    walk_stmts(body, &mut |s| match &s.kind {
        StmtKind::VarDecl { slots, init } => {
            if slots.len() == 1 {
                if let (Some(slot), Some(init)) = (&slots[0], init) {
                    if slot.name == name {
                        values.push(classify_rhs(init));
                    }
                }
            } else if slots.iter().flatten().any(|sl| sl.name == name) {
                values.push(AssignedValue::Other);
            }
        }
        StmtKind::Assign { lhs, rhs, op } if lhs.ident() == Some(name) => {
            values.push(if *op == AssignOp::Assign {
                classify_rhs(rhs)
            } else {
                AssignedValue::Other
            });
        }
        _ => {}
    });
    // a parameter with no local assignment stays unknown
    if values.is_empty() {
        AddressClass::Unknown
    } else if values
        .iter()
        .all(|v| matches!(v, AssignedValue::AddressLiteral))
    {
        AddressClass::LiteralHardcoded
    } else if values.iter().all(|v| matches!(v, AssignedValue::Caller)) {
        AddressClass::CallerControlled
    } else {
        AddressClass::Unknown
    }
}

// ---------------------------------------------------------------------------
// Guard recognition
// ---------------------------------------------------------------------------

/// Classes of the non-caller sides of a caller-equality condition, e.g.
/// `msg.sender == buyer || msg.sender == arbitrator` yields the classes of
/// `buyer` and `arbitrator`. `None` means the condition does not restrict
/// the caller.
pub fn caller_guard_classes(
    cond: &Expr,
    class_of: &dyn Fn(&Expr) -> AddressClass,
) -> Option<BTreeSet<AddressClass>> {
    guard_classes(cond, class_of, false)
}

/// Negated form: `msg.sender != owner` style conditions that lead to a
/// revert/return, restricting execution to `owner`.
pub fn caller_neq_guard_classes(
    cond: &Expr,
    class_of: &dyn Fn(&Expr) -> AddressClass,
) -> Option<BTreeSet<AddressClass>> {
    guard_classes(cond, class_of, true)
}

fn guard_classes(
    cond: &Expr,
    class_of: &dyn Fn(&Expr) -> AddressClass,
    negated: bool,
) -> Option<BTreeSet<AddressClass>> {
    match &cond.kind {
        ExprKind::Binary { op, lhs, rhs } => match op {
            BinOp::Eq | BinOp::Ne => {
                let wanted = if negated { BinOp::Ne } else { BinOp::Eq };
                if *op != wanted {
                    return None;
                }
                let other = if lhs.is_caller() {
                    rhs
                } else if rhs.is_caller() {
                    lhs
                } else {
                    return None;
                };
                let mut set = BTreeSet::new();
                set.insert(class_of(other));
                Some(set)
            }
            // for the positive form, a conjunction restricts when either
            // side restricts; a disjunction only when both do. The negated
            // (revert-on-true) form is the dual.
            BinOp::And | BinOp::Or => {
                let l = guard_classes(lhs, class_of, negated);
                let r = guard_classes(rhs, class_of, negated);
                let both_needed = matches!((op, negated), (BinOp::Or, false) | (BinOp::And, true));
                match (l, r) {
                    (Some(a), Some(b)) => Some(a.into_iter().chain(b).collect()),
                    (Some(a), None) | (None, Some(a)) if !both_needed => Some(a),
                    _ => None,
                }
            }
            _ => None,
        },
        ExprKind::Unary {
            op: UnOp::Not,
            operand,
        } => guard_classes(operand, class_of, !negated),
        _ => None,
    }
}

/// True when the branch unconditionally aborts or leaves the function.
fn branch_terminates(stmts: &[Stmt]) -> bool {
    stmts.iter().any(|s| {
        matches!(
            s.kind,
            StmtKind::Revert(_) | StmtKind::Throw | StmtKind::Return(_)
        )
    })
}

// ---------------------------------------------------------------------------
// Function-level restriction
// ---------------------------------------------------------------------------

fn summarize_modifier(m: &ModifierDef, declared_in: &str, state: &StateClasses) -> ModifierSummary {
    let class_of = |e: &Expr| -> AddressClass {
        let e = e.peel_casts();
        if matches!(e.kind, ExprKind::AddressLit(_)) {
            return AddressClass::LiteralHardcoded;
        }
        match e.ident() {
            Some(name) => state.get(name).map_or(AddressClass::Unknown, |(c, _)| *c),
            None => AddressClass::Unknown,
        }
    };
    let mut restricting = false;
    let mut restricted_to = BTreeSet::new();
    let mut guard_span = None;
    walk_stmts(&m.body, &mut |s| match &s.kind {
        StmtKind::Require(args) | StmtKind::Assert(args) => {
            if let Some(cond) = args.first() {
                if let Some(classes) = caller_guard_classes(cond, &class_of) {
                    restricting = true;
                    restricted_to.extend(classes);
                    guard_span.get_or_insert(s.span);
                }
            }
        }
        StmtKind::If {
            cond, then_branch, ..
        } if branch_terminates(then_branch) => {
            if let Some(classes) = caller_neq_guard_classes(cond, &class_of) {
                restricting = true;
                restricted_to.extend(classes);
                guard_span.get_or_insert(s.span);
            }
        }
        _ => {}
    });
    ModifierSummary {
        name: m.name.clone(),
        declared_in: declared_in.to_string(),
        restricting,
        restricted_to,
        guard_span,
    }
}

/// Resolve the modifiers a contract can apply: its own, plus those declared
/// in base contracts that parsed in the same unit (breadth-first through
/// the inheritance list, own declarations win).
fn resolve_modifiers(
    c: &ContractDef,
    unit: &SourceUnit,
    declared: &BTreeMap<String, Vec<ModifierSummary>>,
) -> BTreeMap<String, ModifierSummary> {
    let mut out = BTreeMap::new();
    let mut visited = BTreeSet::new();
    let mut stack = vec![c.name.clone()];
    while let Some(name) = stack.pop() {
        if !visited.insert(name.clone()) {
            continue;
        }
        if let Some(sums) = declared.get(&name) {
            for s in sums {
                out.entry(s.name.clone()).or_insert_with(|| s.clone());
            }
        }
        if let Some(def) = unit.contracts.iter().find(|cd| cd.name == name) {
            for base in &def.bases {
                stack.push(base.clone());
            }
        }
    }
    out
}

fn function_restriction(
    def: &FunctionDef,
    modifiers: &BTreeMap<String, ModifierSummary>,
    c: &ContractDef,
    state_vars: &BTreeMap<String, StateVarInfo>,
) -> RestrictionInfo {
    let mut info = RestrictionInfo::default();
    for inv in &def.modifiers_applied {
        match modifiers.get(&inv.name) {
            Some(summary) if summary.restricting => {
                info.reasons.push(RestrictionReason::ModifierGuard {
                    name: inv.name.clone(),
                    span: inv.span,
                });
                info.restricted_to
                    .extend(summary.restricted_to.iter().cloned());
            }
            Some(_) => {} // resolved but not a caller guard
            None => info.unresolved_modifiers.push(inv.name.clone()),
        }
    }

    let Some(body) = &def.body else {
        info.restricted = !info.reasons.is_empty();
        return info;
    };
    let class_of = |e: &Expr| -> AddressClass {
        let e = e.peel_casts();
        if matches!(e.kind, ExprKind::AddressLit(_)) {
            return AddressClass::LiteralHardcoded;
        }
        match e.ident() {
            Some(name) => state_vars
                .get(name)
                .map_or(AddressClass::Unknown, |v| v.address_class),
            None => AddressClass::Unknown,
        }
    };

    // top-level require/revert guards hold for the whole function
    let mut guarded_ifs = false;
    let mut residual_ok = true;
    for s in body {
        match &s.kind {
            StmtKind::Require(args) | StmtKind::Assert(args) => {
                if let Some(cond) = args.first() {
                    if let Some(classes) = caller_guard_classes(cond, &class_of) {
                        info.reasons
                            .push(RestrictionReason::InlineRequireGuard { span: s.span });
                        info.restricted_to.extend(classes);
                    }
                }
            }
            StmtKind::If {
                cond, then_branch, ..
            } => {
                if branch_terminates(then_branch) {
                    if let Some(classes) = caller_neq_guard_classes(cond, &class_of) {
                        info.reasons
                            .push(RestrictionReason::InlineIfGuard { span: s.span });
                        info.restricted_to.extend(classes);
                        continue;
                    }
                }
                if caller_guard_classes(cond, &class_of).is_some() {
                    guarded_ifs = true;
                } else if stmt_is_effectful(s, c, state_vars) {
                    residual_ok = false;
                }
            }
            StmtKind::VarDecl { .. }
            | StmtKind::Return(_)
            | StmtKind::Emit { .. }
            | StmtKind::Revert(_)
            | StmtKind::Throw
            | StmtKind::Placeholder => {}
            _ => {
                if stmt_is_effectful(s, c, state_vars) {
                    residual_ok = false;
                }
            }
        }
    }
    // the whole effectful body sits inside caller-equality ifs
    if guarded_ifs && residual_ok {
        for s in body {
            if let StmtKind::If { cond, .. } = &s.kind {
                if let Some(classes) = caller_guard_classes(cond, &class_of) {
                    info.reasons
                        .push(RestrictionReason::InlineIfGuard { span: s.span });
                    info.restricted_to.extend(classes);
                }
            }
        }
    }
    info.restricted = !info.reasons.is_empty();
    info
}

/// Does this statement (or anything nested in it) write state or call out?
fn stmt_is_effectful(
    stmt: &Stmt,
    c: &ContractDef,
    state_vars: &BTreeMap<String, StateVarInfo>,
) -> bool {
    let mut effectful = false;
    let state_names: BTreeSet<&str> = state_vars.keys().map(String::as_str).collect();
    let singleton = std::slice::from_ref(stmt);
    walk_stmts(singleton, &mut |s| {
        match &s.kind {
            StmtKind::Assign { lhs, .. } => {
                if let Some(root) = lhs.lvalue_root() {
                    if state_names.contains(root) {
                        effectful = true;
                    }
                }
            }
            StmtKind::Opaque => effectful = true,
            _ => {}
        }
        stmt_exprs(s, &mut |e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                match &callee.kind {
                    ExprKind::Member { name, .. } => {
                        if matches!(
                            name.as_str(),
                            "call" | "send" | "transfer" | "delegatecall" | "callcode"
                        ) {
                            effectful = true;
                        }
                    }
                    ExprKind::Ident(name)
                        // calls to own functions may do anything
                        if c.functions
                            .iter()
                            .any(|f| f.kind.display_name() == name.as_str())
                        => {
                            effectful = true;
                        }
                    _ => {}
                }
            }
        });
    });
    effectful
}

/// Caller-equality guards that dominate a statement: enclosing `if` guards
/// whose then-branch contains it, plus preceding require/inverted-if guards
/// in any enclosing statement list.
pub fn guards_dominating(
    body: &[Stmt],
    target: Span,
    class_of: &dyn Fn(&Expr) -> AddressClass,
) -> Vec<GuardInfo> {
    let mut out = Vec::new();
    collect_guards(body, target, class_of, &mut Vec::new(), &mut out);
    out
}

fn collect_guards(
    stmts: &[Stmt],
    target: Span,
    class_of: &dyn Fn(&Expr) -> AddressClass,
    active: &mut Vec<GuardInfo>,
    out: &mut Vec<GuardInfo>,
) -> bool {
    let mut local_count = 0usize;
    let inside = |list: &[Stmt]| list.iter().any(|t| t.span.contains(&target));
    for s in stmts {
        if s.span.contains(&target) {
            // leaf frames report the active guard stack; recursive frames
            // only propagate whether the target was found
            let found = match &s.kind {
                _ if s.span == target => {
                    out.extend(active.iter().cloned());
                    true
                }
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    if inside(then_branch) {
                        if let Some(classes) = caller_guard_classes(cond, class_of) {
                            active.push(GuardInfo {
                                span: s.span,
                                classes,
                                is_require: false,
                            });
                            local_count += 1;
                        }
                        collect_guards(then_branch, target, class_of, active, out)
                    } else if else_branch.as_ref().is_some_and(|eb| inside(eb)) {
                        collect_guards(else_branch.as_ref().unwrap(), target, class_of, active, out)
                    } else {
                        // the condition itself
                        out.extend(active.iter().cloned());
                        true
                    }
                }
                StmtKind::While { body, .. } if inside(body) => {
                    collect_guards(body, target, class_of, active, out)
                }
                StmtKind::For { body, .. } if inside(body) => {
                    collect_guards(body, target, class_of, active, out)
                }
                StmtKind::Block(inner) if inside(inner) => {
                    collect_guards(inner, target, class_of, active, out)
                }
                _ => {
                    out.extend(active.iter().cloned());
                    true
                }
            };
            for _ in 0..local_count {
                active.pop();
            }
            return found;
        }
        // statements before the target contribute require-style guards
        match &s.kind {
            StmtKind::Require(args) | StmtKind::Assert(args) => {
                if let Some(cond) = args.first() {
                    if let Some(classes) = caller_guard_classes(cond, class_of) {
                        active.push(GuardInfo {
                            span: s.span,
                            classes,
                            is_require: true,
                        });
                        local_count += 1;
                    }
                }
            }
            StmtKind::If {
                cond, then_branch, ..
            } if branch_terminates(then_branch) => {
                if let Some(classes) = caller_neq_guard_classes(cond, class_of) {
                    active.push(GuardInfo {
                        span: s.span,
                        classes,
                        is_require: true,
                    });
                    local_count += 1;
                }
            }
            _ => {}
        }
    }
    for _ in 0..local_count {
        active.pop();
    }
    false
}
