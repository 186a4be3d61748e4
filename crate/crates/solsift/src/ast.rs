//! AST for the supported Solidity subset (0.4.x through 0.8.x).
//!
//! Equality on `Expr` and `Stmt` ignores spans: two nodes are equal when
//! they have the same shape and payload, wherever they came from. This is
//! what lets golden tests re-parse a span's slice and compare nodes.

use crate::span::Span;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
    pub severity: Severity,
}

/// One parsed `.sol` file.
#[derive(Debug, Clone, Default)]
pub struct SourceUnit {
    pub pragma_versions: Vec<String>,
    pub contracts: Vec<ContractDef>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContractKind {
    Contract,
    Interface,
    Library,
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractKind::Contract => write!(f, "contract"),
            ContractKind::Interface => write!(f, "interface"),
            ContractKind::Library => write!(f, "library"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractDef {
    pub name: String,
    pub kind: ContractKind,
    pub bases: Vec<String>,
    pub state_vars: Vec<StateVarDecl>,
    pub functions: Vec<FunctionDef>,
    pub modifiers: Vec<ModifierDef>,
    pub events: Vec<String>,
    pub span: Span,
    /// True when a fatal parse error forced per-contract recovery; the
    /// members above are whatever parsed before the failure.
    pub unparsed: bool,
}

#[derive(Debug, Clone)]
pub struct StateVarDecl {
    pub name: String,
    pub type_name: String,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionKind {
    /// Named via `constructor()` or by sharing the contract name (0.4).
    Constructor,
    Fallback,
    Receive,
    Named(String),
}

impl FunctionKind {
    pub fn display_name(&self) -> &str {
        match self {
            FunctionKind::Constructor => "(constructor)",
            FunctionKind::Fallback => "(fallback)",
            FunctionKind::Receive => "(receive)",
            FunctionKind::Named(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Visibility {
    Public,
    External,
    Internal,
    Private,
    Unspecified,
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub kind: FunctionKind,
    pub visibility: Visibility,
    pub is_payable: bool,
    pub params: Vec<Param>,
    pub modifiers_applied: Vec<ModifierInvocation>,
    pub body: Option<Vec<Stmt>>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Option<String>,
    pub type_name: String,
}

#[derive(Debug, Clone)]
pub struct ModifierInvocation {
    pub name: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ModifierDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// One slot of a (possibly tuple) variable declaration. `None` is an empty
/// tuple component as in `(bool ok, ) = ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeclSlot {
    pub type_name: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    ExprStmt(Expr),
    VarDecl {
        slots: Vec<Option<DeclSlot>>,
        init: Option<Expr>,
    },
    Assign {
        lhs: Expr,
        op: AssignOp,
        rhs: Expr,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        post: Option<Box<Stmt>>,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Require(Vec<Expr>),
    Assert(Vec<Expr>),
    Revert(Vec<Expr>),
    Emit {
        event: String,
        args: Vec<Expr>,
    },
    Block(Vec<Stmt>),
    Break,
    Continue,
    /// 0.4-era `throw;`
    Throw,
    /// `_;` inside a modifier body.
    Placeholder,
    /// Something the parser skipped (assembly block, unsupported syntax).
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Or,
    And,
    Xor,
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

pub const SECONDS_PER_MINUTE: u128 = 60;
pub const SECONDS_PER_HOUR: u128 = 3_600;
pub const SECONDS_PER_DAY: u128 = 86_400;
pub const SECONDS_PER_WEEK: u128 = 604_800;
pub const SECONDS_PER_YEAR: u128 = 31_536_000;

/// Denomination suffix on a number literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Wei,
    Gwei,
    Szabo,
    Finney,
    Ether,
    Seconds,
    Minutes,
    Hours,
    Days,
    Weeks,
    Years,
}

impl Unit {
    pub fn from_name(s: &str) -> Option<Unit> {
        Some(match s {
            "wei" => Unit::Wei,
            "gwei" => Unit::Gwei,
            "szabo" => Unit::Szabo,
            "finney" => Unit::Finney,
            "ether" => Unit::Ether,
            "seconds" => Unit::Seconds,
            "minutes" => Unit::Minutes,
            "hours" => Unit::Hours,
            "days" => Unit::Days,
            "weeks" => Unit::Weeks,
            "years" => Unit::Years,
            _ => return None,
        })
    }

    /// Multiplier for time units, in seconds. Value units return 1 for the
    /// purposes of comparison-width math (wei-level scaling is irrelevant
    /// to timestamp analysis).
    pub fn seconds_multiplier(self) -> u128 {
        match self {
            Unit::Seconds => 1,
            Unit::Minutes => SECONDS_PER_MINUTE,
            Unit::Hours => SECONDS_PER_HOUR,
            Unit::Days => SECONDS_PER_DAY,
            Unit::Weeks => SECONDS_PER_WEEK,
            Unit::Years => SECONDS_PER_YEAR,
            _ => 1,
        }
    }

    pub fn is_time(self) -> bool {
        matches!(
            self,
            Unit::Seconds | Unit::Minutes | Unit::Hours | Unit::Days | Unit::Weeks | Unit::Years
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Member {
        base: Box<Expr>,
        name: String,
    },
    Index {
        base: Box<Expr>,
        key: Box<Expr>,
    },
    /// A call with its `.value(x)` / `{value: x}` / `.gas(g)` options
    /// already folded in, so both the 0.4 and 0.8 spellings normalize to
    /// the same node.
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
        value: Option<Box<Expr>>,
        gas: Option<Box<Expr>>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Conditional {
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
    },
    /// 40-hex-digit literal: an address baked into the source.
    AddressLit(String),
    NumberLit {
        lexeme: String,
        unit: Option<Unit>,
        /// Literal value with any time unit normalized to seconds;
        /// `None` when it does not fit u128 or is fractional.
        value: Option<u128>,
    },
    BoolLit(bool),
    StringLit(String),
    Tuple(Vec<Option<Expr>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Pow,
    Shl,
    Shr,
    BitAnd,
    BitOr,
    BitXor,
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem | BinOp::Pow
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
    BitNot,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
    Delete,
}

impl Expr {
    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    /// `block.timestamp` or its alias `now`.
    pub fn is_timestamp(&self) -> bool {
        match &self.kind {
            ExprKind::Ident(s) => s == "now",
            ExprKind::Member { base, name } => name == "timestamp" && base.ident() == Some("block"),
            _ => false,
        }
    }

    /// Strip `payable(...)` / `address(...)` casts and parenthesized
    /// one-element tuples down to the underlying expression.
    pub fn peel_casts(&self) -> &Expr {
        match &self.kind {
            ExprKind::Call { callee, args, .. } if args.len() == 1 => match callee.ident() {
                Some("payable") | Some("address") => args[0].peel_casts(),
                _ => self,
            },
            ExprKind::Tuple(items) if items.len() == 1 => match &items[0] {
                Some(e) => e.peel_casts(),
                None => self,
            },
            _ => self,
        }
    }

    /// `msg.sender`, or the OpenZeppelin-style `_msgSender()` wrapper, or
    /// either one under a `payable`/`address` cast.
    pub fn is_caller(&self) -> bool {
        let e = self.peel_casts();
        match &e.kind {
            ExprKind::Member { base, name } => name == "sender" && base.ident() == Some("msg"),
            ExprKind::Call { callee, args, .. } => {
                args.is_empty() && callee.ident() == Some("_msgSender")
            }
            _ => false,
        }
    }

    /// `msg.value`, possibly under a cast.
    pub fn is_msg_value(&self) -> bool {
        let e = self.peel_casts();
        match &e.kind {
            ExprKind::Member { base, name } => name == "value" && base.ident() == Some("msg"),
            _ => false,
        }
    }

    /// Root identifier of an lvalue: `a` for `a`, `a[k]`, `a.f`, `a[k].f`.
    pub fn lvalue_root(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(s) => Some(s),
            ExprKind::Index { base, .. } => base.lvalue_root(),
            ExprKind::Member { base, .. } => base.lvalue_root(),
            _ => None,
        }
    }

    /// Render a compact single-line form for reports.
    pub fn display(&self) -> String {
        match &self.kind {
            ExprKind::Ident(s) => s.clone(),
            ExprKind::Member { base, name } => format!("{}.{}", base.display(), name),
            ExprKind::Index { base, key } => format!("{}[{}]", base.display(), key.display()),
            ExprKind::Call {
                callee,
                args,
                value,
                gas,
            } => {
                let mut s = callee.display();
                if value.is_some() || gas.is_some() {
                    s.push('{');
                    if let Some(v) = value {
                        s.push_str(&format!("value: {}", v.display()));
                    }
                    if let Some(g) = gas {
                        if value.is_some() {
                            s.push_str(", ");
                        }
                        s.push_str(&format!("gas: {}", g.display()));
                    }
                    s.push('}');
                }
                s.push('(');
                s.push_str(
                    &args
                        .iter()
                        .map(|a| a.display())
                        .collect::<Vec<_>>()
                        .join(", "),
                );
                s.push(')');
                s
            }
            ExprKind::Binary { op, lhs, rhs } => {
                format!("{} {} {}", lhs.display(), bin_op_str(*op), rhs.display())
            }
            ExprKind::Unary { op, operand } => match op {
                UnOp::Not => format!("!{}", operand.display()),
                UnOp::Neg => format!("-{}", operand.display()),
                UnOp::BitNot => format!("~{}", operand.display()),
                UnOp::PreInc => format!("++{}", operand.display()),
                UnOp::PreDec => format!("--{}", operand.display()),
                UnOp::PostInc => format!("{}++", operand.display()),
                UnOp::PostDec => format!("{}--", operand.display()),
                UnOp::Delete => format!("delete {}", operand.display()),
            },
            ExprKind::Conditional {
                cond,
                then_expr,
                else_expr,
            } => format!(
                "{} ? {} : {}",
                cond.display(),
                then_expr.display(),
                else_expr.display()
            ),
            ExprKind::AddressLit(s) => s.clone(),
            ExprKind::NumberLit { lexeme, unit, .. } => match unit {
                Some(u) => format!("{} {}", lexeme, unit_str(*u)),
                None => lexeme.clone(),
            },
            ExprKind::BoolLit(b) => b.to_string(),
            ExprKind::StringLit(s) => format!("\"{}\"", s),
            ExprKind::Tuple(items) => {
                let inner = items
                    .iter()
                    .map(|i| i.as_ref().map(|e| e.display()).unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(", ");
                format!("({})", inner)
            }
        }
    }
}

fn bin_op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Rem => "%",
        BinOp::Pow => "**",
        BinOp::Shl => "<<",
        BinOp::Shr => ">>",
        BinOp::BitAnd => "&",
        BinOp::BitOr => "|",
        BinOp::BitXor => "^",
        BinOp::And => "&&",
        BinOp::Or => "||",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Gt => ">",
        BinOp::Le => "<=",
        BinOp::Ge => ">=",
    }
}

fn unit_str(u: Unit) -> &'static str {
    match u {
        Unit::Wei => "wei",
        Unit::Gwei => "gwei",
        Unit::Szabo => "szabo",
        Unit::Finney => "finney",
        Unit::Ether => "ether",
        Unit::Seconds => "seconds",
        Unit::Minutes => "minutes",
        Unit::Hours => "hours",
        Unit::Days => "days",
        Unit::Weeks => "weeks",
        Unit::Years => "years",
    }
}

/// Walk every statement in a list, depth first, including nested blocks.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match &s.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                walk_stmts(then_branch, f);
                if let Some(e) = else_branch {
                    walk_stmts(e, f);
                }
            }
            StmtKind::While { body, .. } => walk_stmts(body, f),
            StmtKind::For {
                init, post, body, ..
            } => {
                if let Some(i) = init {
                    f(i);
                }
                if let Some(p) = post {
                    f(p);
                }
                walk_stmts(body, f);
            }
            StmtKind::Block(b) => walk_stmts(b, f),
            _ => {}
        }
    }
}

/// Walk every expression contained in one statement (not descending into
/// nested statements).
pub fn stmt_exprs<'a>(stmt: &'a Stmt, f: &mut dyn FnMut(&'a Expr)) {
    match &stmt.kind {
        StmtKind::ExprStmt(e) => walk_expr(e, f),
        StmtKind::VarDecl { init: Some(e), .. } => walk_expr(e, f),
        StmtKind::Assign { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        StmtKind::If { cond, .. } => walk_expr(cond, f),
        StmtKind::While { cond, .. } => walk_expr(cond, f),
        StmtKind::For { cond: Some(c), .. } => walk_expr(c, f),
        StmtKind::Return(Some(e)) => walk_expr(e, f),
        StmtKind::Require(args) | StmtKind::Assert(args) | StmtKind::Revert(args) => {
            for a in args {
                walk_expr(a, f);
            }
        }
        StmtKind::Emit { args, .. } => {
            for a in args {
                walk_expr(a, f);
            }
        }
        _ => {}
    }
}

/// Walk an expression tree, parents before children.
pub fn walk_expr<'a>(expr: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    f(expr);
    match &expr.kind {
        ExprKind::Member { base, .. } => walk_expr(base, f),
        ExprKind::Index { base, key } => {
            walk_expr(base, f);
            walk_expr(key, f);
        }
        ExprKind::Call {
            callee,
            args,
            value,
            gas,
        } => {
            walk_expr(callee, f);
            for a in args {
                walk_expr(a, f);
            }
            if let Some(v) = value {
                walk_expr(v, f);
            }
            if let Some(g) = gas {
                walk_expr(g, f);
            }
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        ExprKind::Unary { operand, .. } => walk_expr(operand, f),
        ExprKind::Conditional {
            cond,
            then_expr,
            else_expr,
        } => {
            walk_expr(cond, f);
            walk_expr(then_expr, f);
            walk_expr(else_expr, f);
        }
        ExprKind::Tuple(items) => {
            for i in items.iter().flatten() {
                walk_expr(i, f);
            }
        }
        _ => {}
    }
}
