//! Recursive-descent parser covering the contract constructs the checks
//! need: pragma, contract/interface/library, state vars, functions,
//! modifiers, events, the usual statements, and member/index/call
//! expressions with 0.4- and 0.8-style call options.
//!
//! Error handling is layered so partial results survive:
//! - a broken statement becomes an `Opaque` node plus a diagnostic and the
//!   enclosing function keeps parsing;
//! - a broken contract member is skipped to the next member boundary;
//! - a broken contract header skips ahead to the next top-level keyword and
//!   the contract is recorded as unparsed.
//!
//! `parse` therefore always returns a `SourceUnit`, for any input.

use crate::ast::*;
use crate::lexer::{tokenize, Kw, Punct, Token, TokenKind};
use crate::span::Span;

/// Parse one source file.
pub fn parse(text: &str) -> SourceUnit {
    let mut p = Parser::new(text);
    p.source_unit();
    SourceUnit {
        pragma_versions: p.pragmas,
        contracts: p.contracts,
        diagnostics: p.diags,
    }
}

/// Parse a single expression; `None` unless the whole input is consumed.
/// Test and tooling entry point.
pub fn parse_expr_str(text: &str) -> Option<Expr> {
    let mut p = Parser::new(text);
    let e = p.expr().ok()?;
    p.at_eof().then_some(e)
}

/// Parse a single statement; `None` unless the whole input is consumed.
pub fn parse_stmt_str(text: &str) -> Option<Stmt> {
    let mut p = Parser::new(text);
    let s = p.stmt().ok()?;
    p.at_eof().then_some(s)
}

/// Internal unwinding marker; the diagnostic was already recorded.
struct PErr;

type PResult<T> = Result<T, PErr>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    prev_span: Span,
    pragmas: Vec<String>,
    contracts: Vec<ContractDef>,
    diags: Vec<Diagnostic>,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            toks: tokenize(src),
            pos: 0,
            prev_span: Span::DUMMY,
            pragmas: Vec::new(),
            contracts: Vec::new(),
            diags: Vec::new(),
            src,
        }
    }

    // -- token plumbing ------------------------------------------------

    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        self.prev_span = t.span;
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Eof)
    }

    fn at_punct(&self, p: Punct) -> bool {
        self.peek().is_punct(p)
    }

    fn at_kw(&self, k: Kw) -> bool {
        self.peek().is_kw(k)
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        if self.at_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&mut self, msg: impl Into<String>) -> PErr {
        let span = self.peek().span;
        self.diags.push(Diagnostic {
            span,
            message: msg.into(),
            severity: Severity::Error,
        });
        PErr
    }

    fn warn(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic {
            span,
            message: msg.into(),
            severity: Severity::Warning,
        });
    }

    fn expect_punct(&mut self, p: Punct, what: &str) -> PResult<Span> {
        if self.at_punct(p) {
            Ok(self.bump().span)
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        if matches!(self.peek().kind, TokenKind::Ident(_)) {
            let t = self.bump();
            match t.kind {
                TokenKind::Ident(s) => Ok((s, t.span)),
                _ => unreachable!(),
            }
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    /// Consume an identifier token if present.
    fn eat_ident(&mut self) -> Option<String> {
        if matches!(self.peek().kind, TokenKind::Ident(_)) {
            match self.bump().kind {
                TokenKind::Ident(s) => Some(s),
                _ => unreachable!(),
            }
        } else {
            None
        }
    }

    fn save(&self) -> usize {
        self.pos
    }

    fn restore(&mut self, pos: usize) {
        self.pos = pos;
        if pos > 0 {
            self.prev_span = self.toks[pos - 1].span;
        }
    }

    // -- top level -----------------------------------------------------

    fn source_unit(&mut self) {
        let mut reported_garbage = false;
        while !self.at_eof() {
            if self.at_kw(Kw::Pragma) {
                self.pragma();
            } else if self.at_kw(Kw::Import) || self.at_kw(Kw::Using) {
                self.bump();
                self.skip_to_semi();
            } else if self.at_kw(Kw::Abstract)
                || self.at_kw(Kw::Contract)
                || self.at_kw(Kw::Interface)
                || self.at_kw(Kw::Library)
            {
                self.eat_kw(Kw::Abstract);
                let start = self.peek().span;
                match self.contract() {
                    Ok(c) => {
                        if self.contracts.iter().any(|prev| prev.name == c.name) {
                            self.warn(c.span, format!("duplicate contract name `{}`", c.name));
                        }
                        self.contracts.push(c);
                        reported_garbage = false;
                    }
                    Err(_) => {
                        // per-contract recovery: skip to the next top-level keyword
                        let span = self.skip_to_top_level(start);
                        self.contracts.push(ContractDef {
                            name: String::new(),
                            kind: ContractKind::Contract,
                            bases: Vec::new(),
                            state_vars: Vec::new(),
                            functions: Vec::new(),
                            modifiers: Vec::new(),
                            events: Vec::new(),
                            span,
                            unparsed: true,
                        });
                    }
                }
            } else {
                if !reported_garbage {
                    let span = self.peek().span;
                    self.warn(span, "unexpected content at top level");
                    reported_garbage = true;
                }
                self.bump();
            }
        }
    }

    fn pragma(&mut self) {
        self.bump(); // pragma
        let mut parts = Vec::new();
        while !self.at_eof() && !self.at_punct(Punct::Semi) {
            let t = self.bump();
            parts.push(self.src[t.span.byte_start..t.span.byte_end].to_string());
        }
        self.eat_punct(Punct::Semi);
        if parts.first().map(String::as_str) == Some("solidity") {
            self.pragmas.push(parts[1..].join(""));
        }
    }

    fn skip_to_semi(&mut self) {
        while !self.at_eof() && !self.at_punct(Punct::Semi) {
            self.bump();
        }
        self.eat_punct(Punct::Semi);
    }

    fn skip_to_top_level(&mut self, start: Span) -> Span {
        while !self.at_eof()
            && !self.at_kw(Kw::Contract)
            && !self.at_kw(Kw::Interface)
            && !self.at_kw(Kw::Library)
            && !self.at_kw(Kw::Pragma)
            && !self.at_kw(Kw::Abstract)
        {
            self.bump();
        }
        start.to(self.prev_span)
    }

    fn skip_balanced_braces(&mut self) -> PResult<()> {
        self.expect_punct(Punct::LBrace, "`{`")?;
        let mut depth = 1usize;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error("unexpected end of file inside braces"));
            }
            if self.at_punct(Punct::LBrace) {
                depth += 1;
            } else if self.at_punct(Punct::RBrace) {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    // -- contracts -----------------------------------------------------

    fn contract(&mut self) -> PResult<ContractDef> {
        let start = self.peek().span;
        let kind = if self.eat_kw(Kw::Contract) {
            ContractKind::Contract
        } else if self.eat_kw(Kw::Interface) {
            ContractKind::Interface
        } else {
            self.bump(); // library
            ContractKind::Library
        };
        let (name, _) = self.expect_ident("contract name")?;
        let mut bases = Vec::new();
        if self.eat_kw(Kw::Is) {
            loop {
                let (base, _) = self.expect_ident("base contract name")?;
                bases.push(base);
                if self.at_punct(Punct::LParen) {
                    self.skip_balanced_parens()?;
                }
                if !self.eat_punct(Punct::Comma) {
                    break;
                }
            }
        }
        self.expect_punct(Punct::LBrace, "`{` after contract header")?;

        let mut c = ContractDef {
            name,
            kind,
            bases,
            state_vars: Vec::new(),
            functions: Vec::new(),
            modifiers: Vec::new(),
            events: Vec::new(),
            span: start,
            unparsed: false,
        };
        while !self.at_punct(Punct::RBrace) {
            if self.at_eof() {
                self.error("unexpected end of file inside contract");
                c.span = start.to(self.prev_span);
                c.unparsed = true;
                return Ok(c);
            }
            let member_start = self.peek().span;
            if self.member(&mut c).is_err() {
                self.recover_member();
                self.warn(
                    member_start.to(self.prev_span),
                    "skipped unparseable contract member",
                );
            }
        }
        self.bump(); // `}`
        c.span = start.to(self.prev_span);
        Ok(c)
    }

    fn skip_balanced_parens(&mut self) -> PResult<()> {
        self.expect_punct(Punct::LParen, "`(`")?;
        let mut depth = 1usize;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error("unexpected end of file inside parentheses"));
            }
            if self.at_punct(Punct::LParen) {
                depth += 1;
            } else if self.at_punct(Punct::RParen) {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    /// Skip to the next plausible member boundary (`;` or a balanced `}`).
    fn recover_member(&mut self) {
        let mut depth = 0usize;
        loop {
            if self.at_eof() {
                return;
            }
            if self.at_punct(Punct::Semi) && depth == 0 {
                self.bump();
                return;
            }
            if self.at_punct(Punct::LBrace) {
                depth += 1;
            } else if self.at_punct(Punct::RBrace) {
                if depth == 0 {
                    return;
                }
                depth -= 1;
                if depth == 0 {
                    self.bump();
                    return;
                }
            }
            self.bump();
        }
    }

    fn member(&mut self, c: &mut ContractDef) -> PResult<()> {
        if self.at_kw(Kw::Function) {
            let f = self.function(&c.name)?;
            c.functions.push(f);
        } else if self.at_kw(Kw::Constructor) {
            let f = self.function_like(FunctionKind::Constructor)?;
            c.functions.push(f);
        } else if self.at_kw(Kw::Fallback) && self.peek_at(1).is_punct(Punct::LParen) {
            let f = self.function_like(FunctionKind::Fallback)?;
            c.functions.push(f);
        } else if self.at_kw(Kw::Receive) && self.peek_at(1).is_punct(Punct::LParen) {
            let f = self.function_like(FunctionKind::Receive)?;
            c.functions.push(f);
        } else if self.at_kw(Kw::Modifier) {
            let m = self.modifier_def()?;
            c.modifiers.push(m);
        } else if self.at_kw(Kw::Event) {
            self.bump();
            let (name, _) = self.expect_ident("event name")?;
            if self.at_punct(Punct::LParen) {
                self.skip_balanced_parens()?;
            }
            self.eat_kw(Kw::Anonymous);
            self.expect_punct(Punct::Semi, "`;` after event declaration")?;
            c.events.push(name);
        } else if self.at_kw(Kw::Struct) || self.at_kw(Kw::Enum) {
            self.bump();
            self.expect_ident("name")?;
            self.skip_balanced_braces()?;
        } else if self.at_kw(Kw::Using) || self.at_kw(Kw::Import) {
            self.bump();
            self.skip_to_semi();
        } else {
            let sv = self.state_var()?;
            c.state_vars.push(sv);
        }
        Ok(())
    }

    fn state_var(&mut self) -> PResult<StateVarDecl> {
        let start = self.peek().span;
        let type_name = self.type_name()?;
        loop {
            if self.eat_kw(Kw::Public)
                || self.eat_kw(Kw::Private)
                || self.eat_kw(Kw::Internal)
                || self.eat_kw(Kw::Constant)
                || self.eat_kw(Kw::Immutable)
                || self.eat_kw(Kw::Override)
            {
                continue;
            }
            break;
        }
        let (name, _) = self.expect_ident("state variable name")?;
        let init = if self.eat_punct(Punct::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect_punct(Punct::Semi, "`;` after state variable")?;
        Ok(StateVarDecl {
            name,
            type_name,
            init,
            span: start.to(self.prev_span),
        })
    }

    fn type_name(&mut self) -> PResult<String> {
        if self.at_kw(Kw::Mapping) {
            self.bump();
            self.expect_punct(Punct::LParen, "`(` after mapping")?;
            let key = self.type_name()?;
            self.expect_punct(Punct::Arrow, "`=>` in mapping type")?;
            let val = self.type_name()?;
            self.expect_punct(Punct::RParen, "`)` closing mapping type")?;
            return Ok(format!("mapping({key} => {val})"));
        }
        let (mut name, _) = self.expect_ident("type name")?;
        if name == "address" && self.at_kw(Kw::Payable) {
            self.bump();
            name.push_str(" payable");
        }
        // qualified names like Lib.Struct
        while self.at_punct(Punct::Dot) && self.peek_at(1).ident().is_some() {
            self.bump();
            let (seg, _) = self.expect_ident("type segment")?;
            name.push('.');
            name.push_str(&seg);
        }
        // array suffixes: `[]` or `[<number>]`
        loop {
            if self.at_punct(Punct::LBracket) {
                if self.peek_at(1).is_punct(Punct::RBracket) {
                    self.bump();
                    self.bump();
                    name.push_str("[]");
                    continue;
                }
                if matches!(self.peek_at(1).kind, TokenKind::Number(_))
                    && self.peek_at(2).is_punct(Punct::RBracket)
                {
                    self.bump();
                    let n = self.bump();
                    self.bump();
                    name.push('[');
                    name.push_str(&self.src[n.span.byte_start..n.span.byte_end]);
                    name.push(']');
                    continue;
                }
            }
            break;
        }
        Ok(name)
    }

    fn function(&mut self, contract_name: &str) -> PResult<FunctionDef> {
        let start = self.peek().span;
        self.bump(); // function
        let kind = if self.at_punct(Punct::LParen) {
            FunctionKind::Fallback // 0.4-style `function() ...`
        } else if self.at_kw(Kw::Fallback) {
            self.bump();
            FunctionKind::Fallback
        } else if self.at_kw(Kw::Receive) {
            self.bump();
            FunctionKind::Receive
        } else {
            let (name, _) = self.expect_ident("function name")?;
            if name == contract_name {
                FunctionKind::Constructor // 0.4-style constructor
            } else {
                FunctionKind::Named(name)
            }
        };
        self.function_rest(kind, start)
    }

    fn function_like(&mut self, kind: FunctionKind) -> PResult<FunctionDef> {
        let start = self.peek().span;
        self.bump(); // constructor / fallback / receive
        self.function_rest(kind, start)
    }

    fn function_rest(&mut self, kind: FunctionKind, start: Span) -> PResult<FunctionDef> {
        let params = self.param_list()?;
        let mut visibility = Visibility::Unspecified;
        let mut is_payable = false;
        let mut modifiers_applied = Vec::new();
        loop {
            if self.at_kw(Kw::Public) {
                self.bump();
                visibility = Visibility::Public;
            } else if self.at_kw(Kw::Private) {
                self.bump();
                visibility = Visibility::Private;
            } else if self.at_kw(Kw::Internal) {
                self.bump();
                visibility = Visibility::Internal;
            } else if self.at_kw(Kw::External) {
                self.bump();
                visibility = Visibility::External;
            } else if self.at_kw(Kw::Payable) {
                self.bump();
                is_payable = true;
            } else if self.at_kw(Kw::Pure)
                || self.at_kw(Kw::View)
                || self.at_kw(Kw::Constant)
                || self.at_kw(Kw::Virtual)
            {
                self.bump();
            } else if self.at_kw(Kw::Override) {
                self.bump();
                if self.at_punct(Punct::LParen) {
                    self.skip_balanced_parens()?;
                }
            } else if self.at_kw(Kw::Returns) {
                self.bump();
                self.param_list()?;
            } else if matches!(self.peek().kind, TokenKind::Ident(_)) {
                let mspan = self.peek().span;
                let name = self.eat_ident().unwrap();
                let args = if self.at_punct(Punct::LParen) {
                    self.call_args()?
                } else {
                    Vec::new()
                };
                modifiers_applied.push(ModifierInvocation {
                    name,
                    args,
                    span: mspan.to(self.prev_span),
                });
            } else {
                break;
            }
        }
        let body = if self.eat_punct(Punct::Semi) {
            None
        } else {
            Some(self.block()?)
        };
        Ok(FunctionDef {
            kind,
            visibility,
            is_payable,
            params,
            modifiers_applied,
            body,
            span: start.to(self.prev_span),
        })
    }

    fn param_list(&mut self) -> PResult<Vec<Param>> {
        self.expect_punct(Punct::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.eat_punct(Punct::RParen) {
            return Ok(params);
        }
        loop {
            let type_name = self.type_name()?;
            while self.eat_kw(Kw::Memory)
                || self.eat_kw(Kw::Storage)
                || self.eat_kw(Kw::Calldata)
                || self.eat_kw(Kw::Indexed)
            {}
            let name = self.eat_ident();
            params.push(Param { name, type_name });
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        self.expect_punct(Punct::RParen, "`)` closing parameter list")?;
        Ok(params)
    }

    fn modifier_def(&mut self) -> PResult<ModifierDef> {
        let start = self.peek().span;
        self.bump(); // modifier
        let (name, _) = self.expect_ident("modifier name")?;
        let params = if self.at_punct(Punct::LParen) {
            self.param_list()?
        } else {
            Vec::new()
        };
        while self.eat_kw(Kw::Virtual) || self.eat_kw(Kw::Override) {}
        let body = self.block()?;
        Ok(ModifierDef {
            name,
            params,
            body,
            span: start.to(self.prev_span),
        })
    }

    // -- statements ----------------------------------------------------

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct(Punct::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.at_punct(Punct::RBrace) {
            if self.at_eof() {
                return Err(self.error("unexpected end of file inside block"));
            }
            let start = self.peek().span;
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(_) => {
                    self.recover_stmt();
                    stmts.push(Stmt {
                        kind: StmtKind::Opaque,
                        span: start.to(self.prev_span),
                    });
                }
            }
        }
        self.bump(); // `}`
        Ok(stmts)
    }

    fn recover_stmt(&mut self) {
        let mut depth = 0usize;
        loop {
            if self.at_eof() {
                return;
            }
            if self.at_punct(Punct::Semi) && depth == 0 {
                self.bump();
                return;
            }
            if self.at_punct(Punct::LBrace) {
                depth += 1;
            } else if self.at_punct(Punct::RBrace) {
                if depth == 0 {
                    return;
                }
                depth -= 1;
                if depth == 0 {
                    self.bump();
                    return;
                }
            }
            self.bump();
        }
    }

    fn stmt_or_single(&mut self) -> PResult<Vec<Stmt>> {
        if self.at_punct(Punct::LBrace) {
            self.block()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span;
        let kind = match self.peek().kind.clone() {
            TokenKind::Punct(Punct::LBrace) => StmtKind::Block(self.block()?),
            TokenKind::Keyword(Kw::Unchecked) => {
                self.bump();
                StmtKind::Block(self.block()?)
            }
            TokenKind::Keyword(Kw::If) => {
                self.bump();
                self.expect_punct(Punct::LParen, "`(` after if")?;
                let cond = self.expr()?;
                self.expect_punct(Punct::RParen, "`)` closing if condition")?;
                let then_branch = self.stmt_or_single()?;
                let else_branch = if self.eat_kw(Kw::Else) {
                    Some(self.stmt_or_single()?)
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            TokenKind::Keyword(Kw::While) => {
                self.bump();
                self.expect_punct(Punct::LParen, "`(` after while")?;
                let cond = self.expr()?;
                self.expect_punct(Punct::RParen, "`)` closing while condition")?;
                let body = self.stmt_or_single()?;
                StmtKind::While { cond, body }
            }
            TokenKind::Keyword(Kw::Do) => {
                // treated as a plain loop; per-iteration analysis is the same
                self.bump();
                let body = self.stmt_or_single()?;
                if !self.eat_kw(Kw::While) {
                    return Err(self.error("expected `while` after do body"));
                }
                self.expect_punct(Punct::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect_punct(Punct::RParen, "`)`")?;
                self.expect_punct(Punct::Semi, "`;`")?;
                StmtKind::While { cond, body }
            }
            TokenKind::Keyword(Kw::For) => {
                self.bump();
                self.expect_punct(Punct::LParen, "`(` after for")?;
                let init = if self.at_punct(Punct::Semi) {
                    self.bump();
                    None
                } else {
                    let s = self.simple_stmt(true)?;
                    self.expect_punct(Punct::Semi, "`;` after for initializer")?;
                    Some(Box::new(s))
                };
                let cond = if self.at_punct(Punct::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(Punct::Semi, "`;` in for header")?;
                let post = if self.at_punct(Punct::RParen) {
                    None
                } else {
                    Some(Box::new(self.simple_stmt(false)?))
                };
                self.expect_punct(Punct::RParen, "`)` closing for header")?;
                let body = self.stmt_or_single()?;
                StmtKind::For {
                    init,
                    cond,
                    post,
                    body,
                }
            }
            TokenKind::Keyword(Kw::Return) => {
                self.bump();
                let value = if self.at_punct(Punct::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(Punct::Semi, "`;` after return")?;
                StmtKind::Return(value)
            }
            TokenKind::Keyword(Kw::Require) => {
                self.bump();
                let args = self.call_args()?;
                self.expect_punct(Punct::Semi, "`;` after require")?;
                StmtKind::Require(args)
            }
            TokenKind::Keyword(Kw::Assert) => {
                self.bump();
                let args = self.call_args()?;
                self.expect_punct(Punct::Semi, "`;` after assert")?;
                StmtKind::Assert(args)
            }
            TokenKind::Keyword(Kw::Revert) => {
                self.bump();
                // plain revert(...), or a 0.8.4 custom error: revert E(...)
                if let TokenKind::Ident(_) = self.peek().kind {
                    self.bump();
                }
                let args = if self.at_punct(Punct::LParen) {
                    self.call_args()?
                } else {
                    Vec::new()
                };
                self.expect_punct(Punct::Semi, "`;` after revert")?;
                StmtKind::Revert(args)
            }
            TokenKind::Keyword(Kw::Throw) => {
                self.bump();
                self.expect_punct(Punct::Semi, "`;` after throw")?;
                StmtKind::Throw
            }
            TokenKind::Keyword(Kw::Break) => {
                self.bump();
                self.expect_punct(Punct::Semi, "`;` after break")?;
                StmtKind::Break
            }
            TokenKind::Keyword(Kw::Continue) => {
                self.bump();
                self.expect_punct(Punct::Semi, "`;` after continue")?;
                StmtKind::Continue
            }
            TokenKind::Keyword(Kw::Emit) => {
                self.bump();
                let (mut event, _) = self.expect_ident("event name")?;
                while self.at_punct(Punct::Dot) {
                    self.bump();
                    let (seg, _) = self.expect_ident("event name segment")?;
                    event = seg;
                }
                let args = self.call_args()?;
                self.expect_punct(Punct::Semi, "`;` after emit")?;
                StmtKind::Emit { event, args }
            }
            TokenKind::Keyword(Kw::Assembly) => {
                self.bump();
                if let TokenKind::Str(_) = self.peek().kind {
                    self.bump();
                }
                if self.at_punct(Punct::LParen) {
                    self.skip_balanced_parens()?;
                }
                self.skip_balanced_braces()?;
                self.warn(start.to(self.prev_span), "assembly block not analyzed");
                StmtKind::Opaque
            }
            TokenKind::Ident(name)
                if name.as_str() == "_" && self.peek_at(1).is_punct(Punct::Semi) =>
            {
                self.bump();
                self.bump();
                StmtKind::Placeholder
            }
            _ => {
                let s = self.simple_stmt(true)?;
                self.expect_punct(Punct::Semi, "`;` after statement")?;
                return Ok(Stmt {
                    kind: s.kind,
                    span: start.to(self.prev_span),
                });
            }
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span),
        })
    }

    /// Declaration, assignment, or expression — without the trailing `;`
    /// (shared between statement position and for-loop headers).
    /// `allow_decl` is false in the for-loop post position.
    fn simple_stmt(&mut self, allow_decl: bool) -> PResult<Stmt> {
        let start = self.peek().span;
        if allow_decl {
            if self.at_punct(Punct::LParen) {
                if let Some(kind) = self.try_tuple_stmt()? {
                    return Ok(Stmt {
                        kind,
                        span: start.to(self.prev_span),
                    });
                }
            }
            if let Some(kind) = self.try_var_decl()? {
                return Ok(Stmt {
                    kind,
                    span: start.to(self.prev_span),
                });
            }
        }
        let lhs = self.expr()?;
        let op = match self.peek().kind {
            TokenKind::Punct(Punct::Assign) => Some(AssignOp::Assign),
            TokenKind::Punct(Punct::PlusAssign) => Some(AssignOp::Add),
            TokenKind::Punct(Punct::MinusAssign) => Some(AssignOp::Sub),
            TokenKind::Punct(Punct::StarAssign) => Some(AssignOp::Mul),
            TokenKind::Punct(Punct::SlashAssign) => Some(AssignOp::Div),
            TokenKind::Punct(Punct::PercentAssign) => Some(AssignOp::Rem),
            TokenKind::Punct(Punct::OrAssign) => Some(AssignOp::Or),
            TokenKind::Punct(Punct::AndAssign) => Some(AssignOp::And),
            TokenKind::Punct(Punct::XorAssign) => Some(AssignOp::Xor),
            _ => None,
        };
        let kind = match op {
            Some(op) => {
                self.bump();
                let rhs = self.expr()?;
                StmtKind::Assign { lhs, op, rhs }
            }
            None => StmtKind::ExprStmt(lhs),
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span),
        })
    }

    /// `uint x = e` / `address payable a` / `var y = e` / `Token t = Token(a)`.
    fn try_var_decl(&mut self) -> PResult<Option<StmtKind>> {
        if self.at_kw(Kw::Var) {
            self.bump();
            if self.at_punct(Punct::LParen) {
                // `var (a, b) = f();`
                let save = self.save();
                if let Some(kind) = self.try_tuple_stmt()? {
                    return Ok(Some(kind));
                }
                self.restore(save);
                return Err(self.error("expected tuple after `var`"));
            }
            let (name, _) = self.expect_ident("variable name")?;
            let init = if self.eat_punct(Punct::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            return Ok(Some(StmtKind::VarDecl {
                slots: vec![Some(DeclSlot {
                    type_name: None,
                    name,
                })],
                init,
            }));
        }
        // lookahead: a type followed by a fresh name means a declaration
        let looks_like_type = matches!(self.peek().kind, TokenKind::Ident(_))
            || self.at_kw(Kw::Mapping)
            || self.at_kw(Kw::Function);
        if !looks_like_type {
            return Ok(None);
        }
        let save = self.save();
        let type_name = match self.type_name() {
            Ok(t) => t,
            Err(_) => {
                self.restore(save);
                return Ok(None);
            }
        };
        while self.eat_kw(Kw::Memory) || self.eat_kw(Kw::Storage) || self.eat_kw(Kw::Calldata) {}
        let Some(name) = self.eat_ident() else {
            self.restore(save);
            return Ok(None);
        };
        let init = if self.eat_punct(Punct::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        Ok(Some(StmtKind::VarDecl {
            slots: vec![Some(DeclSlot {
                type_name: Some(type_name),
                name,
            })],
            init,
        }))
    }

    /// Tuple forms: `(bool ok, ) = e` (declaration) and `(a, b) = (b, a)`
    /// (assignment to existing names). Returns None and rewinds when the
    /// parenthesis turns out to start a plain expression.
    fn try_tuple_stmt(&mut self) -> PResult<Option<StmtKind>> {
        let save = self.save();
        let start = self.peek().span;
        self.bump(); // `(`
        let mut slots: Vec<Option<DeclSlot>> = Vec::new();
        let mut any_type = false;
        let mut ok = true;
        loop {
            if self.at_punct(Punct::RParen) {
                slots.push(None);
                break;
            }
            if self.at_punct(Punct::Comma) {
                slots.push(None);
                self.bump();
                continue;
            }
            let slot_save = self.save();
            let type_name = if self.at_kw(Kw::Mapping) || self.at_kw(Kw::Var) {
                self.restore(slot_save);
                None
            } else if matches!(self.peek().kind, TokenKind::Ident(_)) {
                match self.type_name() {
                    Ok(t) => Some(t),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            } else {
                ok = false;
                break;
            };
            while self.eat_kw(Kw::Memory) || self.eat_kw(Kw::Storage) || self.eat_kw(Kw::Calldata) {
            }
            let slot = if matches!(self.peek().kind, TokenKind::Ident(_)) {
                let name = self.eat_ident().unwrap();
                any_type = true;
                match type_name {
                    Some(t) => DeclSlot {
                        type_name: Some(t),
                        name,
                    },
                    None => {
                        ok = false;
                        break;
                    }
                }
            } else {
                // a bare name: the "type" we parsed was actually the name
                match type_name {
                    Some(t) if !t.contains(['[', '(', ' ']) && !t.contains('.') => DeclSlot {
                        type_name: None,
                        name: t,
                    },
                    _ => {
                        ok = false;
                        break;
                    }
                }
            };
            slots.push(Some(slot));
            if self.at_punct(Punct::Comma) {
                self.bump();
                continue;
            }
            break;
        }
        if !ok || !self.at_punct(Punct::RParen) {
            self.restore(save);
            return Ok(None);
        }
        self.bump(); // `)`
        if !self.at_punct(Punct::Assign) {
            self.restore(save);
            return Ok(None);
        }
        self.bump(); // `=`
        let init = self.expr()?;
        if any_type {
            Ok(Some(StmtKind::VarDecl {
                slots,
                init: Some(init),
            }))
        } else {
            let items = slots
                .iter()
                .map(|s| {
                    s.as_ref().map(|slot| Expr {
                        kind: ExprKind::Ident(slot.name.clone()),
                        span: start,
                    })
                })
                .collect();
            Ok(Some(StmtKind::Assign {
                lhs: Expr {
                    kind: ExprKind::Tuple(items),
                    span: start.to(self.prev_span),
                },
                op: AssignOp::Assign,
                rhs: init,
            }))
        }
    }

    // -- expressions ---------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        self.conditional()
    }

    fn conditional(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat_punct(Punct::Question) {
            let then_expr = self.expr()?;
            self.expect_punct(Punct::Colon, "`:` in conditional")?;
            let else_expr = self.expr()?;
            let span = cond.span.to(else_expr.span);
            return Ok(Expr {
                kind: ExprKind::Conditional {
                    cond: Box::new(cond),
                    then_expr: Box::new(then_expr),
                    else_expr: Box::new(else_expr),
                },
                span,
            });
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.peek_bin_op() {
            if prec < min_prec {
                break;
            }
            self.bump();
            // all supported binary operators are left-associative except **
            let next_min = if op == BinOp::Pow { prec } else { prec + 1 };
            let rhs = self.binary(next_min)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            };
        }
        Ok(lhs)
    }

    fn peek_bin_op(&self) -> Option<(BinOp, u8)> {
        let p = match self.peek().kind {
            TokenKind::Punct(p) => p,
            _ => return None,
        };
        Some(match p {
            Punct::OrOr => (BinOp::Or, 1),
            Punct::AndAnd => (BinOp::And, 2),
            Punct::Eq => (BinOp::Eq, 3),
            Punct::Ne => (BinOp::Ne, 3),
            Punct::Lt => (BinOp::Lt, 4),
            Punct::Gt => (BinOp::Gt, 4),
            Punct::Le => (BinOp::Le, 4),
            Punct::Ge => (BinOp::Ge, 4),
            Punct::Pipe => (BinOp::BitOr, 5),
            Punct::Caret => (BinOp::BitXor, 6),
            Punct::Amp => (BinOp::BitAnd, 7),
            Punct::Shl => (BinOp::Shl, 8),
            Punct::Shr => (BinOp::Shr, 8),
            Punct::Plus => (BinOp::Add, 9),
            Punct::Minus => (BinOp::Sub, 9),
            Punct::Star => (BinOp::Mul, 10),
            Punct::Slash => (BinOp::Div, 10),
            Punct::Percent => (BinOp::Rem, 10),
            Punct::StarStar => (BinOp::Pow, 11),
            _ => return None,
        })
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        let op = match self.peek().kind {
            TokenKind::Punct(Punct::Not) => Some(UnOp::Not),
            TokenKind::Punct(Punct::Minus) => Some(UnOp::Neg),
            TokenKind::Punct(Punct::Tilde) => Some(UnOp::BitNot),
            TokenKind::Punct(Punct::PlusPlus) => Some(UnOp::PreInc),
            TokenKind::Punct(Punct::MinusMinus) => Some(UnOp::PreDec),
            TokenKind::Keyword(Kw::Delete) => Some(UnOp::Delete),
            TokenKind::Punct(Punct::Plus) => {
                // unary plus: parse and drop
                None
            }
            _ => None,
        };
        if self.at_punct(Punct::Plus) && op.is_none() {
            self.bump();
            return self.unary();
        }
        if let Some(op) = op {
            self.bump();
            let operand = self.unary()?;
            let span = start.to(operand.span);
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                span,
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while let TokenKind::Punct(next_punct) = self.peek().kind {
            match next_punct {
                Punct::Dot => {
                    let name = match &self.peek_at(1).kind {
                        TokenKind::Ident(s) => s.clone(),
                        // member positions may use soft keywords
                        TokenKind::Keyword(Kw::Payable) => "payable".into(),
                        _ => break,
                    };
                    self.bump();
                    self.bump();
                    let span = e.span.to(self.prev_span);
                    e = Expr {
                        kind: ExprKind::Member {
                            base: Box::new(e),
                            name,
                        },
                        span,
                    };
                }
                Punct::LBracket => {
                    self.bump();
                    let key = self.expr()?;
                    self.expect_punct(Punct::RBracket, "`]`")?;
                    let span = e.span.to(self.prev_span);
                    e = Expr {
                        kind: ExprKind::Index {
                            base: Box::new(e),
                            key: Box::new(key),
                        },
                        span,
                    };
                }
                Punct::LParen => {
                    let args = self.call_args()?;
                    let span = e.span.to(self.prev_span);
                    e = make_call(e, args, None, None, span);
                }
                Punct::LBrace => {
                    // try `{value: v, gas: g}(...)` call options
                    let save = self.save();
                    match self.call_options() {
                        Ok(Some((value, gas))) if self.at_punct(Punct::LParen) => {
                            let args = self.call_args()?;
                            let span = e.span.to(self.prev_span);
                            e = make_call(e, args, value, gas, span);
                        }
                        _ => {
                            self.restore(save);
                            break;
                        }
                    }
                }
                Punct::PlusPlus => {
                    self.bump();
                    let span = e.span.to(self.prev_span);
                    e = Expr {
                        kind: ExprKind::Unary {
                            op: UnOp::PostInc,
                            operand: Box::new(e),
                        },
                        span,
                    };
                }
                Punct::MinusMinus => {
                    self.bump();
                    let span = e.span.to(self.prev_span);
                    e = Expr {
                        kind: ExprKind::Unary {
                            op: UnOp::PostDec,
                            operand: Box::new(e),
                        },
                        span,
                    };
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct(Punct::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat_punct(Punct::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        self.expect_punct(Punct::RParen, "`)` closing arguments")?;
        Ok(args)
    }

    #[allow(clippy::type_complexity)]
    fn call_options(&mut self) -> PResult<Option<(Option<Box<Expr>>, Option<Box<Expr>>)>> {
        self.expect_punct(Punct::LBrace, "`{`")?;
        let mut value = None;
        let mut gas = None;
        loop {
            let name = match &self.peek().kind {
                TokenKind::Ident(s) => s.clone(),
                _ => return Ok(None),
            };
            self.bump();
            if !self.eat_punct(Punct::Colon) {
                return Ok(None);
            }
            let e = self.expr()?;
            match name.as_str() {
                "value" => value = Some(Box::new(e)),
                "gas" => gas = Some(Box::new(e)),
                _ => {} // salt and friends: irrelevant here
            }
            if self.eat_punct(Punct::Comma) {
                continue;
            }
            break;
        }
        if !self.eat_punct(Punct::RBrace) {
            return Ok(None);
        }
        Ok(Some((value, gas)))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.peek().span;
        match self.peek().kind.clone() {
            TokenKind::Punct(Punct::LParen) => {
                self.bump();
                let mut items: Vec<Option<Expr>> = Vec::new();
                loop {
                    if self.at_punct(Punct::RParen) {
                        if !items.is_empty() {
                            items.push(None);
                        }
                        break;
                    }
                    if self.at_punct(Punct::Comma) {
                        items.push(None);
                        self.bump();
                        continue;
                    }
                    items.push(Some(self.expr()?));
                    if self.eat_punct(Punct::Comma) {
                        continue;
                    }
                    break;
                }
                self.expect_punct(Punct::RParen, "`)`")?;
                let span = start.to(self.prev_span);
                if items.len() == 1 {
                    return match items.pop().unwrap() {
                        // parenthesized expression keeps the wider span
                        Some(inner) => Ok(Expr {
                            kind: inner.kind,
                            span,
                        }),
                        None => Ok(Expr {
                            kind: ExprKind::Tuple(vec![None]),
                            span,
                        }),
                    };
                }
                Ok(Expr {
                    kind: ExprKind::Tuple(items),
                    span,
                })
            }
            TokenKind::Number(lexeme) => {
                self.bump();
                if let Some(addr) = as_address_literal(&lexeme) {
                    return Ok(Expr {
                        kind: ExprKind::AddressLit(addr),
                        span: start,
                    });
                }
                let mut unit = None;
                if let TokenKind::Ident(next) = &self.peek().kind {
                    if let Some(u) = Unit::from_name(next) {
                        unit = Some(u);
                        self.bump();
                    }
                }
                let value = parse_number(&lexeme)
                    .and_then(|v| v.checked_mul(unit.map_or(1, |u| u.seconds_multiplier())));
                Ok(Expr {
                    kind: ExprKind::NumberLit {
                        lexeme,
                        unit,
                        value,
                    },
                    span: start.to(self.prev_span),
                })
            }
            TokenKind::Str(s) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::StringLit(s),
                    span: start,
                })
            }
            TokenKind::Keyword(Kw::True) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::BoolLit(true),
                    span: start,
                })
            }
            TokenKind::Keyword(Kw::False) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::BoolLit(false),
                    span: start,
                })
            }
            TokenKind::Keyword(Kw::New) => {
                // `new C(...)`: the contract cast shape is what matters
                self.bump();
                self.postfix()
            }
            TokenKind::Keyword(Kw::Payable) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Ident("payable".into()),
                    span: start,
                })
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Ident(name),
                    span: start,
                })
            }
            _ => Err(self.error("expected expression")),
        }
    }
}

/// `0x` + exactly 40 hex digits: an address literal.
fn as_address_literal(lexeme: &str) -> Option<String> {
    let hex = lexeme
        .strip_prefix("0x")
        .or_else(|| lexeme.strip_prefix("0X"))?;
    if hex.len() == 40 && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        Some(format!("0x{}", hex.to_ascii_lowercase()))
    } else {
        None
    }
}

fn parse_number(lexeme: &str) -> Option<u128> {
    let clean: String = lexeme.chars().filter(|c| *c != '_').collect();
    if let Some(hex) = clean
        .strip_prefix("0x")
        .or_else(|| clean.strip_prefix("0X"))
    {
        return u128::from_str_radix(hex, 16).ok();
    }
    if let Some(epos) = clean.find(['e', 'E']) {
        let mantissa: u128 = clean[..epos].parse().ok()?;
        let exp: u32 = clean[epos + 1..].parse().ok()?;
        return mantissa.checked_mul(10u128.checked_pow(exp)?);
    }
    if clean.contains('.') {
        return None;
    }
    clean.parse().ok()
}

/// Build a call node, folding 0.4-style `.value(v)` / `.gas(g)` chains into
/// call options so both spellings normalize identically.
fn make_call(
    callee: Expr,
    args: Vec<Expr>,
    mut value: Option<Box<Expr>>,
    mut gas: Option<Box<Expr>>,
    span: Span,
) -> Expr {
    let mut head = callee;
    let mut absorbed: Vec<(String, Expr)> = Vec::new();
    loop {
        let is_fold = match &head.kind {
            ExprKind::Call {
                callee: inner,
                args: inner_args,
                value: None,
                gas: None,
            } => matches!(
                &inner.kind,
                ExprKind::Member { name, .. }
                    if (name == "value" || name == "gas") && inner_args.len() == 1
            ),
            _ => false,
        };
        if !is_fold {
            break;
        }
        let ExprKind::Call {
            callee: inner,
            args: mut inner_args,
            ..
        } = head.kind
        else {
            unreachable!()
        };
        let ExprKind::Member { base, name } = inner.kind else {
            unreachable!()
        };
        absorbed.push((name, inner_args.remove(0)));
        head = *base;
    }
    let is_low_level_head = matches!(
        &head.kind,
        ExprKind::Member { name, .. }
            if matches!(name.as_str(), "call" | "send" | "callcode" | "delegatecall" | "transfer")
    );
    if absorbed.is_empty() || is_low_level_head {
        for (name, expr) in absorbed {
            if name == "value" && value.is_none() {
                value = Some(Box::new(expr));
            } else if name == "gas" && gas.is_none() {
                gas = Some(Box::new(expr));
            }
        }
        Expr {
            kind: ExprKind::Call {
                callee: Box::new(head),
                args,
                value,
                gas,
            },
            span,
        }
    } else {
        // not a low-level call chain: rebuild untouched
        let mut rebuilt = head;
        for (name, expr) in absorbed.into_iter().rev() {
            let mspan = rebuilt.span;
            rebuilt = Expr {
                kind: ExprKind::Member {
                    base: Box::new(rebuilt),
                    name,
                },
                span: mspan,
            };
            rebuilt = Expr {
                kind: ExprKind::Call {
                    callee: Box::new(rebuilt),
                    args: vec![expr],
                    value: None,
                    gas: None,
                },
                span: mspan,
            };
        }
        Expr {
            kind: ExprKind::Call {
                callee: Box::new(rebuilt),
                args,
                value,
                gas,
            },
            span,
        }
    }
}
