//! Per-function control flow graph with per-statement side-effect
//! summaries. The central query is [`statements_after`]: the union of
//! side effects of everything reachable strictly after a statement, with
//! loop back-edges included — code inside a loop counts as "after" itself.

use crate::ast::*;
use crate::span::Span;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// What one statement does, as far as the filters care.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Effect {
    StateWrite(String),
    ExternalCall,
    EventEmit,
    LocalOnly,
}

#[derive(Debug, Clone)]
pub struct CfgNode {
    pub span: Span,
    pub effects: BTreeSet<Effect>,
}

#[derive(Debug, Clone, Default)]
pub struct BasicBlock {
    pub nodes: Vec<usize>,
    pub succs: BTreeSet<usize>,
    /// Cannot reach the exit node (e.g. `while (true)` with no break).
    pub loop_trapped: bool,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub nodes: Vec<CfgNode>,
    pub blocks: Vec<BasicBlock>,
    pub exit: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("statement at {0} not found in control flow graph")]
    SiteNotFound(Span),
}

/// Name sets the side-effect summarizer needs to resolve what a call is.
#[derive(Debug, Clone, Default)]
pub struct EffectCtx {
    pub state_vars: BTreeSet<String>,
    /// State variable name -> declared type name.
    pub state_var_types: BTreeMap<String, String>,
    pub events: BTreeSet<String>,
    pub fn_names: BTreeSet<String>,
    pub contract_type_names: BTreeSet<String>,
    pub locals: BTreeMap<String, String>,
}

impl EffectCtx {
    /// Base expression resolves to another contract: a `C(x)` cast or a
    /// local/state variable declared with a contract type.
    pub fn base_is_contract_typed(&self, base: &Expr) -> bool {
        match &base.kind {
            ExprKind::Call { callee, .. } => callee
                .ident()
                .is_some_and(|n| self.contract_type_names.contains(n)),
            ExprKind::Ident(name) => {
                let ty = self
                    .locals
                    .get(name)
                    .or_else(|| self.state_var_types.get(name));
                ty.is_some_and(|t| self.contract_type_names.contains(t.as_str()))
            }
            _ => false,
        }
    }

    /// Classify a call expression: external, event emission, or neither.
    pub fn call_effect(&self, callee: &Expr) -> Option<Effect> {
        match &callee.kind {
            ExprKind::Member { base, name } => {
                if base.ident() == Some("this") {
                    return None; // own function through `this`
                }
                if self.base_is_contract_typed(base) {
                    return Some(Effect::ExternalCall);
                }
                match name.as_str() {
                    "call" | "send" | "transfer" | "delegatecall" | "callcode" => {
                        Some(Effect::ExternalCall)
                    }
                    // writes through array state
                    "push" | "pop" => base
                        .lvalue_root()
                        .filter(|r| self.state_vars.contains(*r))
                        .map(|r| Effect::StateWrite(r.to_string())),
                    _ => None,
                }
            }
            ExprKind::Ident(name) => {
                if self.events.contains(name) {
                    Some(Effect::EventEmit)
                } else {
                    None // own function, builtin, or cast
                }
            }
            _ => None,
        }
    }

    /// Side effects of a single statement (not descending into nested
    /// statements — control statements carry their condition's effects).
    pub fn stmt_effects(&self, stmt: &Stmt) -> BTreeSet<Effect> {
        let mut effects = BTreeSet::new();
        match &stmt.kind {
            StmtKind::Assign { lhs, .. } => {
                if let Some(root) = lhs.lvalue_root() {
                    if self.state_vars.contains(root) {
                        effects.insert(Effect::StateWrite(root.to_string()));
                    }
                }
                if let ExprKind::Tuple(items) = &lhs.kind {
                    for item in items.iter().flatten() {
                        if let Some(root) = item.lvalue_root() {
                            if self.state_vars.contains(root) {
                                effects.insert(Effect::StateWrite(root.to_string()));
                            }
                        }
                    }
                }
            }
            StmtKind::Emit { .. } => {
                effects.insert(Effect::EventEmit);
            }
            StmtKind::ExprStmt(e) => {
                // `E(...)` in 0.4 code where E is a declared event
                if let ExprKind::Call { callee, .. } = &e.kind {
                    if let Some(name) = callee.ident() {
                        if self.events.contains(name) {
                            effects.insert(Effect::EventEmit);
                        }
                    }
                }
                // ++/--/delete on state
                if let ExprKind::Unary { operand, .. } = &e.kind {
                    if let Some(root) = operand.lvalue_root() {
                        if self.state_vars.contains(root) {
                            effects.insert(Effect::StateWrite(root.to_string()));
                        }
                    }
                }
            }
            _ => {}
        }
        stmt_exprs(stmt, &mut |e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                if let Some(eff) = self.call_effect(callee) {
                    effects.insert(eff);
                }
            }
        });
        if effects.is_empty() {
            effects.insert(Effect::LocalOnly);
        }
        effects
    }
}

struct Builder<'a> {
    cfg: Cfg,
    ctx: &'a EffectCtx,
    /// (header block, after block) for break/continue.
    loops: Vec<(usize, usize)>,
}

/// Build the statement-level CFG for a function body.
pub fn build_cfg(body: &[Stmt], ctx: &EffectCtx) -> Cfg {
    let mut b = Builder {
        cfg: Cfg {
            nodes: Vec::new(),
            blocks: Vec::new(),
            exit: 0,
        },
        ctx,
        loops: Vec::new(),
    };
    let entry = b.new_block();
    let exit = b.new_block();
    b.cfg.exit = exit;
    if let Some(open) = b.lower_stmts(body, entry) {
        b.edge(open, exit);
    }
    // every block reaches exit or is loop-trapped
    let reaches_exit = reverse_reachable(&b.cfg, exit);
    for (i, block) in b.cfg.blocks.iter_mut().enumerate() {
        if !reaches_exit.contains(&i) {
            block.loop_trapped = true;
        }
    }
    b.cfg
}

fn reverse_reachable(cfg: &Cfg, from: usize) -> BTreeSet<usize> {
    let mut preds: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, b) in cfg.blocks.iter().enumerate() {
        for s in &b.succs {
            preds.entry(*s).or_default().push(i);
        }
    }
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(b) = queue.pop_front() {
        for p in preds.get(&b).into_iter().flatten() {
            if seen.insert(*p) {
                queue.push_back(*p);
            }
        }
    }
    seen
}

impl<'a> Builder<'a> {
    fn new_block(&mut self) -> usize {
        self.cfg.blocks.push(BasicBlock::default());
        self.cfg.blocks.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize) {
        self.cfg.blocks[from].succs.insert(to);
    }

    fn push_node(&mut self, block: usize, stmt: &Stmt) -> usize {
        let id = self.cfg.nodes.len();
        self.cfg.nodes.push(CfgNode {
            span: stmt.span,
            effects: self.ctx.stmt_effects(stmt),
        });
        self.cfg.blocks[block].nodes.push(id);
        id
    }

    /// Lower a statement list into the graph starting at `cur`; returns the
    /// open block at the end, or None when control never falls through.
    fn lower_stmts(&mut self, stmts: &[Stmt], mut cur: usize) -> Option<usize> {
        for s in stmts {
            cur = self.lower_stmt(s, cur)?;
        }
        Some(cur)
    }

    fn lower_stmt(&mut self, s: &Stmt, cur: usize) -> Option<usize> {
        match &s.kind {
            StmtKind::Block(inner) => self.lower_stmts(inner, cur),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                self.push_node(cur, s); // condition evaluation
                let join = self.new_block();
                let then_entry = self.new_block();
                self.edge(cur, then_entry);
                if let Some(t_end) = self.lower_stmts(then_branch, then_entry) {
                    self.edge(t_end, join);
                }
                match else_branch {
                    Some(eb) => {
                        let else_entry = self.new_block();
                        self.edge(cur, else_entry);
                        if let Some(e_end) = self.lower_stmts(eb, else_entry) {
                            self.edge(e_end, join);
                        }
                    }
                    None => self.edge(cur, join),
                }
                Some(join)
            }
            StmtKind::While { body, .. } => {
                let header = self.new_block();
                self.edge(cur, header);
                self.push_node(header, s); // condition evaluation
                let after = self.new_block();
                self.edge(header, after);
                let body_entry = self.new_block();
                self.edge(header, body_entry);
                self.loops.push((header, after));
                if let Some(b_end) = self.lower_stmts(body, body_entry) {
                    self.edge(b_end, header);
                }
                self.loops.pop();
                Some(after)
            }
            StmtKind::For {
                init, post, body, ..
            } => {
                if let Some(init) = init {
                    self.push_node(cur, init);
                }
                let header = self.new_block();
                self.edge(cur, header);
                self.push_node(header, s); // condition evaluation
                let after = self.new_block();
                self.edge(header, after);
                let body_entry = self.new_block();
                self.edge(header, body_entry);
                // `continue` must still run the post statement
                let post_block = self.new_block();
                if let Some(post) = post {
                    self.push_node(post_block, post);
                }
                self.edge(post_block, header);
                self.loops.push((post_block, after));
                if let Some(b_end) = self.lower_stmts(body, body_entry) {
                    self.edge(b_end, post_block);
                }
                self.loops.pop();
                Some(after)
            }
            StmtKind::Return(_) | StmtKind::Revert(_) | StmtKind::Throw => {
                self.push_node(cur, s);
                let exit = self.cfg.exit;
                self.edge(cur, exit);
                None
            }
            StmtKind::Break => {
                self.push_node(cur, s);
                if let Some((_, after)) = self.loops.last().copied() {
                    self.edge(cur, after);
                }
                None
            }
            StmtKind::Continue => {
                self.push_node(cur, s);
                if let Some((header, _)) = self.loops.last().copied() {
                    self.edge(cur, header);
                }
                None
            }
            _ => {
                self.push_node(cur, s);
                Some(cur)
            }
        }
    }
}

/// Count the statements the CFG is expected to carry: every leaf statement
/// plus one node per control header, excluding block wrappers.
pub fn countable_statements(stmts: &[Stmt]) -> usize {
    let mut n = 0;
    for s in stmts {
        match &s.kind {
            StmtKind::Block(inner) => n += countable_statements(inner),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                n += 1;
                n += countable_statements(then_branch);
                if let Some(eb) = else_branch {
                    n += countable_statements(eb);
                }
            }
            StmtKind::While { body, .. } => {
                n += 1;
                n += countable_statements(body);
            }
            StmtKind::For {
                init, post, body, ..
            } => {
                n += 1;
                if init.is_some() {
                    n += 1;
                }
                if post.is_some() {
                    n += 1;
                }
                n += countable_statements(body);
            }
            _ => n += 1,
        }
    }
    n
}

/// Union of side-effect summaries of every statement reachable strictly
/// after `site` on any path. With a back-edge the site's own loop body —
/// including the site itself — is reachable "after".
pub fn statements_after(cfg: &Cfg, site: Span) -> Result<BTreeSet<Effect>, CfgError> {
    // locate the node
    let mut found: Option<(usize, usize, usize)> = None; // block, idx in block, node id
    'outer: for (bi, block) in cfg.blocks.iter().enumerate() {
        for (i, node_id) in block.nodes.iter().enumerate() {
            if cfg.nodes[*node_id].span == site {
                found = Some((bi, i, *node_id));
                break 'outer;
            }
        }
    }
    let Some((block_id, idx, _)) = found else {
        return Err(CfgError::SiteNotFound(site));
    };

    let mut effects = BTreeSet::new();
    // rest of the site's own block
    for node_id in &cfg.blocks[block_id].nodes[idx + 1..] {
        effects.extend(cfg.nodes[*node_id].effects.iter().cloned());
    }
    // all blocks reachable from its successors
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<usize> = cfg.blocks[block_id].succs.iter().copied().collect();
    while let Some(b) = queue.pop_front() {
        if !seen.insert(b) {
            continue;
        }
        for node_id in &cfg.blocks[b].nodes {
            effects.extend(cfg.nodes[*node_id].effects.iter().cloned());
        }
        for s in &cfg.blocks[b].succs {
            queue.push_back(*s);
        }
    }
    effects.remove(&Effect::LocalOnly);
    Ok(effects)
}

/// Convenience for the filters: any state write among the after-effects?
pub fn writes_state_after(effects: &BTreeSet<Effect>) -> bool {
    effects.iter().any(|e| matches!(e, Effect::StateWrite(_)))
}

/// Any external call among the after-effects?
pub fn calls_out_after(effects: &BTreeSet<Effect>) -> bool {
    effects.contains(&Effect::ExternalCall)
}
