//! Test-only machinery shared by the acceptance suite: a small random
//! contract generator (rendered to Solidity source, with and without
//! guards, with and without alpha-renaming), a brute-force path-
//! enumeration oracle for the terminal-call patterns, and a random
//! assignment-graph generator with its own transitive-closure oracle.
//!
//! The oracles deliberately work on the AST directly and never touch the
//! CFG or taint engines they are checking.

use proptest::prelude::*;
use solsift::ast::{stmt_exprs, ExprKind, Stmt, StmtKind};
use solsift::model::ContractModel;
use solsift::span::Span;
use std::collections::BTreeSet;

// ---------------------------------------------------------------------------
// Random contracts for guard/alpha properties
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardStyle {
    None,
    Modifier,
    RequireEq,
    IfNeqRevert,
    IfWrap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyOp {
    SendToParam,
    SendToCaller,
    SendToOwner,
    LowLevelCall,
    StateWrite,
    EmitEvent,
    TimeCheckWide,
    TimeStore,
    LocalArith,
}

#[derive(Debug, Clone)]
pub struct SynthFn {
    pub vis_public: bool,
    pub guard: GuardStyle,
    pub ops: Vec<BodyOp>,
}

#[derive(Debug, Clone)]
pub struct SynthContract {
    pub functions: Vec<SynthFn>,
}

impl SynthContract {
    /// Render to Solidity source. `strip` removes every modifier and
    /// caller-equality guard; `rename` applies a consistent renaming of
    /// function names and locals (state vars and builtins untouched).
    pub fn render(&self, strip: bool, rename: bool) -> String {
        self.render_inner(strip, rename, false)
    }

    /// Variant with one extra call edge from the root function to the last
    /// function, for the reachability-monotonicity check.
    pub fn render_with_extra_call(&self, strip: bool) -> String {
        self.render_inner(strip, false, true)
    }

    fn render_inner(&self, strip: bool, rename: bool, extra_call: bool) -> String {
        let fn_name = |i: usize| {
            if rename {
                format!("fx{i}q")
            } else {
                format!("f{i}")
            }
        };
        let param_addr = if rename { "addr_r" } else { "p" };
        let param_amt = if rename { "amt_r" } else { "amount" };
        let local_tmp = if rename { "tmp_r" } else { "tmp" };

        let mut out = String::from("contract Synth {\n");
        out.push_str("    address owner;\n");
        out.push_str("    uint counter;\n");
        out.push_str("    uint last;\n");
        out.push_str("    event Ping(uint v);\n");
        out.push_str("    constructor() public { owner = msg.sender; }\n");
        let uses_modifier = !strip
            && self
                .functions
                .iter()
                .any(|f| f.guard == GuardStyle::Modifier);
        if uses_modifier {
            out.push_str("    modifier onlyOwner() { require(msg.sender == owner); _; }\n");
        }
        for (i, f) in self.functions.iter().enumerate() {
            let vis = if f.vis_public { "public" } else { "private" };
            let modifier = if !strip && f.guard == GuardStyle::Modifier {
                " onlyOwner"
            } else {
                ""
            };
            out.push_str(&format!(
                "    function {}(address {param_addr}, uint {param_amt}) {vis}{modifier} {{\n",
                fn_name(i)
            ));
            let guard = if strip { GuardStyle::None } else { f.guard };
            match guard {
                GuardStyle::RequireEq => {
                    out.push_str("        require(msg.sender == owner);\n");
                }
                GuardStyle::IfNeqRevert => {
                    out.push_str("        if (msg.sender != owner) revert();\n");
                }
                _ => {}
            }
            let wrap = guard == GuardStyle::IfWrap;
            if wrap {
                out.push_str("        if (msg.sender == owner) {\n");
            }
            let indent = if wrap { "            " } else { "        " };
            for op in &f.ops {
                let line = match op {
                    BodyOp::SendToParam => format!("{param_addr}.send({param_amt});"),
                    BodyOp::SendToCaller => format!("msg.sender.send({param_amt});"),
                    BodyOp::SendToOwner => format!("owner.send({param_amt});"),
                    BodyOp::LowLevelCall => format!("{param_addr}.call(\"\");"),
                    BodyOp::StateWrite => "counter = counter + 1;".to_string(),
                    BodyOp::EmitEvent => format!("emit Ping({param_amt});"),
                    BodyOp::TimeCheckWide => {
                        "if ((now - last) >= 86400) { counter = counter + 1; }".to_string()
                    }
                    BodyOp::TimeStore => "last = now;".to_string(),
                    BodyOp::LocalArith => format!("uint {local_tmp} = {param_amt} + 1;"),
                };
                out.push_str(indent);
                out.push_str(&line);
                out.push('\n');
            }
            // the root calls everything else, so code never becomes
            // unreachable merely by being private
            if i == 0 {
                for j in 1..self.functions.len() {
                    out.push_str(indent);
                    out.push_str(&format!("{}({param_addr}, {param_amt});\n", fn_name(j)));
                }
                if extra_call && !self.functions.is_empty() {
                    let j = self.functions.len() - 1;
                    out.push_str(indent);
                    out.push_str(&format!("{}({param_addr}, {param_amt});\n", fn_name(j)));
                }
            }
            if wrap {
                out.push_str("        }\n");
            }
            out.push_str("    }\n");
        }
        out.push_str("}\n");
        out
    }
}

pub fn synth_contract_strategy() -> impl Strategy<Value = SynthContract> {
    let op = prop_oneof![
        Just(BodyOp::SendToParam),
        Just(BodyOp::SendToCaller),
        Just(BodyOp::SendToOwner),
        Just(BodyOp::LowLevelCall),
        Just(BodyOp::StateWrite),
        Just(BodyOp::EmitEvent),
        Just(BodyOp::TimeCheckWide),
        Just(BodyOp::TimeStore),
        Just(BodyOp::LocalArith),
    ];
    let guard = prop_oneof![
        Just(GuardStyle::None),
        Just(GuardStyle::Modifier),
        Just(GuardStyle::RequireEq),
        Just(GuardStyle::IfNeqRevert),
        Just(GuardStyle::IfWrap),
    ];
    let func = (any::<bool>(), guard, prop::collection::vec(op, 1..5));
    prop::collection::vec(func, 1..4).prop_map(|fns| {
        let functions = fns
            .into_iter()
            .enumerate()
            .map(|(i, (vis, guard, ops))| SynthFn {
                vis_public: i == 0 || vis,
                guard,
                ops,
            })
            .collect();
        SynthContract { functions }
    })
}

// ---------------------------------------------------------------------------
// Brute-force path oracle for the terminal-call patterns
// ---------------------------------------------------------------------------

/// The oracle handles structured control flow only.
pub fn oracle_supported(body: &[Stmt]) -> bool {
    let mut ok = true;
    solsift::ast::walk_stmts(body, &mut |s| {
        if matches!(
            s.kind,
            StmtKind::Break | StmtKind::Continue | StmtKind::Opaque | StmtKind::Placeholder
        ) {
            ok = false;
        }
    });
    ok
}

/// Spans of every CFG-countable statement: leaves plus control headers,
/// plus for-loop init/post.
pub fn all_statement_spans(body: &[Stmt]) -> Vec<Span> {
    let mut out = Vec::new();
    collect_spans(body, &mut out);
    out
}

fn collect_spans(stmts: &[Stmt], out: &mut Vec<Span>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Block(inner) => collect_spans(inner, out),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                out.push(s.span);
                collect_spans(then_branch, out);
                if let Some(eb) = else_branch {
                    collect_spans(eb, out);
                }
            }
            StmtKind::While { body, .. } => {
                out.push(s.span);
                collect_spans(body, out);
            }
            StmtKind::For {
                init, post, body, ..
            } => {
                out.push(s.span);
                if let Some(i) = init {
                    out.push(i.span);
                }
                if let Some(p) = post {
                    out.push(p.span);
                }
                collect_spans(body, out);
            }
            _ => out.push(s.span),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TraceStep {
    span: Span,
    writes_state: bool,
    calls_out: bool,
}

/// Independent per-statement effect judgement, straight off the AST.
fn step_of(s: &Stmt, model: &ContractModel) -> TraceStep {
    let mut writes_state = false;
    let mut calls_out = false;
    match &s.kind {
        StmtKind::Assign { lhs, .. } => {
            if let Some(root) = lhs.lvalue_root() {
                if model.state_vars.contains_key(root) {
                    writes_state = true;
                }
            }
        }
        StmtKind::ExprStmt(e) => {
            if let ExprKind::Unary { operand, .. } = &e.kind {
                if let Some(root) = operand.lvalue_root() {
                    if model.state_vars.contains_key(root) {
                        writes_state = true;
                    }
                }
            }
        }
        _ => {}
    }
    stmt_exprs(s, &mut |e| {
        if let ExprKind::Call { callee, .. } = &e.kind {
            if let ExprKind::Member { base, name } = &callee.kind {
                if base.ident() == Some("this") {
                    return;
                }
                let contract_cast = matches!(&base.kind, ExprKind::Call { callee: inner, .. }
                    if inner.ident().is_some_and(|n| model.contract_type_names.contains(n)));
                let contract_var = base.ident().is_some_and(|n| {
                    model
                        .state_vars
                        .get(n)
                        .is_some_and(|v| model.contract_type_names.contains(&v.type_name))
                });
                if contract_cast
                    || contract_var
                    || matches!(
                        name.as_str(),
                        "call" | "send" | "transfer" | "delegatecall" | "callcode"
                    )
                {
                    calls_out = true;
                }
                if matches!(name.as_str(), "push" | "pop") {
                    if let Some(root) = base.lvalue_root() {
                        if model.state_vars.contains_key(root) {
                            writes_state = true;
                        }
                    }
                }
            }
        }
    });
    TraceStep {
        span: s.span,
        writes_state,
        calls_out,
    }
}

type Trace = Vec<TraceStep>;

/// All execution traces of a statement list, loops unrolled at most twice.
/// The bool is whether control falls through the end.
fn seq_traces(stmts: &[Stmt], model: &ContractModel) -> Vec<(Trace, bool)> {
    let mut acc: Vec<(Trace, bool)> = vec![(Vec::new(), true)];
    for s in stmts {
        let mut next = Vec::new();
        for (trace, alive) in acc {
            if !alive {
                next.push((trace, false));
                continue;
            }
            for (ext, alive2) in stmt_traces(s, model) {
                let mut t = trace.clone();
                t.extend(ext);
                next.push((t, alive2));
            }
        }
        acc = next;
    }
    acc
}

fn stmt_traces(s: &Stmt, model: &ContractModel) -> Vec<(Trace, bool)> {
    let step = step_of(s, model);
    match &s.kind {
        StmtKind::Block(inner) => seq_traces(inner, model),
        StmtKind::If {
            then_branch,
            else_branch,
            ..
        } => {
            let mut out = Vec::new();
            for (t, alive) in seq_traces(then_branch, model) {
                let mut trace = vec![step];
                trace.extend(t);
                out.push((trace, alive));
            }
            match else_branch {
                Some(eb) => {
                    for (t, alive) in seq_traces(eb, model) {
                        let mut trace = vec![step];
                        trace.extend(t);
                        out.push((trace, alive));
                    }
                }
                None => out.push((vec![step], true)),
            }
            out
        }
        StmtKind::While { body, .. } => loop_traces(step, None, body, model),
        StmtKind::For {
            init, post, body, ..
        } => {
            let init_step = init.as_ref().map(|i| step_of(i, model));
            let post_step = post.as_ref().map(|p| step_of(p, model));
            let mut out = Vec::new();
            for (mut t, alive) in loop_traces(step, post_step, body, model) {
                if let Some(i) = init_step {
                    t.insert(0, i);
                }
                out.push((t, alive));
            }
            out
        }
        StmtKind::Return(_) | StmtKind::Revert(_) | StmtKind::Throw => vec![(vec![step], false)],
        _ => vec![(vec![step], true)],
    }
}

/// 0, 1, or 2 iterations; `post` runs after each completed iteration.
fn loop_traces(
    header: TraceStep,
    post: Option<TraceStep>,
    body: &[Stmt],
    model: &ContractModel,
) -> Vec<(Trace, bool)> {
    let body_traces = seq_traces(body, model);
    let mut out: Vec<(Trace, bool)> = vec![(vec![header], true)]; // zero iterations
    for (b1, alive1) in &body_traces {
        let mut one = vec![header];
        one.extend(b1.iter().copied());
        if !alive1 {
            out.push((one, false));
            continue;
        }
        if let Some(p) = post {
            one.push(p);
        }
        one.push(header);
        out.push((one.clone(), true));
        for (b2, alive2) in &body_traces {
            let mut two = one.clone();
            two.extend(b2.iter().copied());
            if !alive2 {
                out.push((two, false));
                continue;
            }
            if let Some(p) = post {
                two.push(p);
            }
            two.push(header);
            out.push((two, true));
        }
    }
    out
}

/// (URV5, REE5) oracle bits for a site: URV5 holds when no trace has a
/// state write or external call after the site, REE5 when no trace has a
/// state write after it.
pub fn oracle_terminal(body: &[Stmt], site: Span, model: &ContractModel) -> (bool, bool) {
    let mut harmful_urv = false;
    let mut harmful_ree = false;
    for (trace, _) in seq_traces(body, model) {
        for (i, step) in trace.iter().enumerate() {
            if step.span != site {
                continue;
            }
            for later in &trace[i + 1..] {
                if later.writes_state {
                    harmful_urv = true;
                    harmful_ree = true;
                }
                if later.calls_out {
                    harmful_urv = true;
                }
            }
        }
    }
    (!harmful_urv, !harmful_ree)
}

// ---------------------------------------------------------------------------
// Random assignment graphs for the taint closure oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Var(usize),
    Now,
}

#[derive(Debug, Clone)]
pub struct AssignmentGraph {
    pub n_vars: usize,
    /// (target, sources): `v_t = v_a + v_b;` or with `now` mixed in.
    pub assigns: Vec<(usize, Vec<Source>)>,
}

impl AssignmentGraph {
    pub fn render(&self) -> String {
        let mut out = String::from("contract G {\n    function f() public {\n");
        for v in 0..self.n_vars {
            out.push_str(&format!("        uint v{v} = 1;\n"));
        }
        for (target, sources) in &self.assigns {
            let rhs: Vec<String> = sources
                .iter()
                .map(|s| match s {
                    Source::Var(v) => format!("v{v}"),
                    Source::Now => "now".to_string(),
                })
                .collect();
            out.push_str(&format!("        v{target} = {};\n", rhs.join(" + ")));
        }
        out.push_str("    }\n}\n");
        out
    }

    /// Brute-force transitive closure over the assignment edges.
    pub fn closure(&self) -> BTreeSet<String> {
        let mut tainted: BTreeSet<usize> = BTreeSet::new();
        loop {
            let mut changed = false;
            for (target, sources) in &self.assigns {
                let src_tainted = sources.iter().any(|s| match s {
                    Source::Now => true,
                    Source::Var(v) => tainted.contains(v),
                });
                if src_tainted && tainted.insert(*target) {
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        tainted.into_iter().map(|v| format!("v{v}")).collect()
    }
}

pub fn assignment_graph_strategy() -> impl Strategy<Value = AssignmentGraph> {
    (3usize..=8).prop_flat_map(|n| {
        let source = prop_oneof![
            3 => (0..n).prop_map(Source::Var),
            1 => Just(Source::Now),
        ];
        let assign = (0..n, prop::collection::vec(source, 1..=2));
        prop::collection::vec(assign, 0..=12)
            .prop_map(move |assigns| AssignmentGraph { n_vars: n, assigns })
    })
}
