//! Tokenizer for the supported Solidity subset.
//!
//! Whitespace and comments are skipped as trivia but every token keeps its
//! exact byte span, so the original text is always recoverable from the
//! token stream plus the gaps between spans. Illegal characters become
//! `Error` tokens and lexing continues.

use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Kw),
    /// Decimal or hex literal, raw lexeme kept verbatim.
    Number(String),
    /// String literal with quotes stripped (escapes left as written).
    Str(String),
    Punct(Punct),
    /// Something the lexer could not recognize.
    Error(char),
    Eof,
}

/// Structural keywords only. Names like `now`, `timestamp`, `send` or the
/// elementary type names stay ordinary identifiers so that 0.4-era contracts
/// that use them as variable names keep parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Pragma,
    Import,
    Using,
    Contract,
    Interface,
    Library,
    Is,
    Function,
    Modifier,
    Event,
    Struct,
    Enum,
    Mapping,
    Public,
    Private,
    Internal,
    External,
    Pure,
    View,
    Payable,
    Constant,
    Memory,
    Storage,
    Calldata,
    Returns,
    Return,
    If,
    Else,
    While,
    For,
    Do,
    Break,
    Continue,
    Throw,
    Emit,
    Require,
    Assert,
    Revert,
    New,
    Delete,
    Var,
    Constructor,
    Fallback,
    Receive,
    Override,
    Virtual,
    Immutable,
    Abstract,
    Unchecked,
    Assembly,
    Anonymous,
    Indexed,
    True,
    False,
}

fn keyword(s: &str) -> Option<Kw> {
    use Kw::*;
    Some(match s {
        "pragma" => Pragma,
        "import" => Import,
        "using" => Using,
        "contract" => Contract,
        "interface" => Interface,
        "library" => Library,
        "is" => Is,
        "function" => Function,
        "modifier" => Modifier,
        "event" => Event,
        "struct" => Struct,
        "enum" => Enum,
        "mapping" => Mapping,
        "public" => Public,
        "private" => Private,
        "internal" => Internal,
        "external" => External,
        "pure" => Pure,
        "view" => View,
        "payable" => Payable,
        "constant" => Constant,
        "memory" => Memory,
        "storage" => Storage,
        "calldata" => Calldata,
        "returns" => Returns,
        "return" => Return,
        "if" => If,
        "else" => Else,
        "while" => While,
        "for" => For,
        "do" => Do,
        "break" => Break,
        "continue" => Continue,
        "throw" => Throw,
        "emit" => Emit,
        "require" => Require,
        "assert" => Assert,
        "revert" => Revert,
        "new" => New,
        "delete" => Delete,
        "var" => Var,
        "constructor" => Constructor,
        "fallback" => Fallback,
        "receive" => Receive,
        "override" => Override,
        "virtual" => Virtual,
        "immutable" => Immutable,
        "abstract" => Abstract,
        "unchecked" => Unchecked,
        "assembly" => Assembly,
        "anonymous" => Anonymous,
        "indexed" => Indexed,
        "true" => True,
        "false" => False,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Punct {
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Question,
    Colon,
    Arrow, // =>
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    PercentAssign,
    OrAssign,
    AndAssign,
    XorAssign,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    AndAnd,
    OrOr,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    StarStar,
    PlusPlus,
    MinusMinus,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Shl,
    Shr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn is_punct(&self, p: Punct) -> bool {
        self.kind == TokenKind::Punct(p)
    }

    pub fn is_kw(&self, k: Kw) -> bool {
        self.kind == TokenKind::Keyword(k)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.bytes.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if b & 0xC0 != 0x80 {
            // count UTF-8 scalar starts, not continuation bytes
            self.col += 1;
        }
        Some(b)
    }
}

/// Lex the whole input. Always succeeds; unrecognized bytes come back as
/// `Error` tokens. The final token is always `Eof`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut cur = Cursor {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut cur);
        let (line, col, start) = (cur.line, cur.col, cur.pos);
        let Some(b) = cur.peek() else {
            out.push(Token {
                kind: TokenKind::Eof,
                span: Span::new(line, col, line, col, start, start),
            });
            return out;
        };
        let kind = match b {
            b'a'..=b'z' | b'A'..=b'Z' | b'_' | b'$' => {
                while matches!(
                    cur.peek(),
                    Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_' | b'$')
                ) {
                    cur.bump();
                }
                let s = &cur.src[start..cur.pos];
                match keyword(s) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(s.to_string()),
                }
            }
            b'0'..=b'9' => {
                lex_number(&mut cur);
                TokenKind::Number(cur.src[start..cur.pos].to_string())
            }
            b'"' | b'\'' => {
                let quote = b;
                cur.bump();
                let content_start = cur.pos;
                let mut content_end = None;
                while let Some(c) = cur.peek() {
                    if c == b'\\' {
                        cur.bump();
                        cur.bump();
                        continue;
                    }
                    if c == quote || c == b'\n' {
                        content_end = Some(cur.pos);
                        if c == quote {
                            cur.bump();
                        }
                        break;
                    }
                    cur.bump();
                }
                let end = content_end.unwrap_or(cur.pos);
                TokenKind::Str(cur.src[content_start..end].to_string())
            }
            _ => match lex_punct(&mut cur) {
                Some(p) => TokenKind::Punct(p),
                None => {
                    // skip one UTF-8 scalar so we make progress
                    let ch = cur.src[cur.pos..].chars().next().unwrap_or('\u{fffd}');
                    for _ in 0..ch.len_utf8() {
                        cur.bump();
                    }
                    TokenKind::Error(ch)
                }
            },
        };
        out.push(Token {
            kind,
            span: Span::new(line, col, cur.line, cur.col, start, cur.pos),
        });
    }
}

fn skip_trivia(cur: &mut Cursor) {
    loop {
        match cur.peek() {
            Some(b' ' | b'\t' | b'\r' | b'\n') => {
                cur.bump();
            }
            Some(b'/') if cur.peek2() == Some(b'/') => {
                while let Some(c) = cur.peek() {
                    if c == b'\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            Some(b'/') if cur.peek2() == Some(b'*') => {
                cur.bump();
                cur.bump();
                loop {
                    match (cur.peek(), cur.peek2()) {
                        (Some(b'*'), Some(b'/')) => {
                            cur.bump();
                            cur.bump();
                            break;
                        }
                        (Some(_), _) => {
                            cur.bump();
                        }
                        (None, _) => break, // unterminated comment: trivia to EOF
                    }
                }
            }
            _ => return,
        }
    }
}

fn lex_number(cur: &mut Cursor) {
    if cur.peek() == Some(b'0') && matches!(cur.peek2(), Some(b'x' | b'X')) {
        cur.bump();
        cur.bump();
        while matches!(
            cur.peek(),
            Some(b'0'..=b'9' | b'a'..=b'f' | b'A'..=b'F' | b'_')
        ) {
            cur.bump();
        }
        return;
    }
    while matches!(cur.peek(), Some(b'0'..=b'9' | b'_')) {
        cur.bump();
    }
    if cur.peek() == Some(b'.') && matches!(cur.peek2(), Some(b'0'..=b'9')) {
        cur.bump();
        while matches!(cur.peek(), Some(b'0'..=b'9' | b'_')) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some(b'e' | b'E')) && matches!(cur.peek2(), Some(b'0'..=b'9')) {
        cur.bump();
        while matches!(cur.peek(), Some(b'0'..=b'9')) {
            cur.bump();
        }
    }
}

fn lex_punct(cur: &mut Cursor) -> Option<Punct> {
    use Punct::*;
    let b = cur.peek()?;
    let b2 = cur.peek2();
    let (p, len) = match (b, b2) {
        (b'=', Some(b'=')) => (Eq, 2),
        (b'=', Some(b'>')) => (Arrow, 2),
        (b'=', _) => (Assign, 1),
        (b'!', Some(b'=')) => (Ne, 2),
        (b'!', _) => (Not, 1),
        (b'<', Some(b'=')) => (Le, 2),
        (b'<', Some(b'<')) => (Shl, 2),
        (b'<', _) => (Lt, 1),
        (b'>', Some(b'=')) => (Ge, 2),
        (b'>', Some(b'>')) => (Shr, 2),
        (b'>', _) => (Gt, 1),
        (b'&', Some(b'&')) => (AndAnd, 2),
        (b'&', Some(b'=')) => (AndAssign, 2),
        (b'&', _) => (Amp, 1),
        (b'|', Some(b'|')) => (OrOr, 2),
        (b'|', Some(b'=')) => (OrAssign, 2),
        (b'|', _) => (Pipe, 1),
        (b'+', Some(b'+')) => (PlusPlus, 2),
        (b'+', Some(b'=')) => (PlusAssign, 2),
        (b'+', _) => (Plus, 1),
        (b'-', Some(b'-')) => (MinusMinus, 2),
        (b'-', Some(b'=')) => (MinusAssign, 2),
        (b'-', _) => (Minus, 1),
        (b'*', Some(b'*')) => (StarStar, 2),
        (b'*', Some(b'=')) => (StarAssign, 2),
        (b'*', _) => (Star, 1),
        (b'/', Some(b'=')) => (SlashAssign, 2),
        (b'/', _) => (Slash, 1),
        (b'%', Some(b'=')) => (PercentAssign, 2),
        (b'%', _) => (Percent, 1),
        (b'^', Some(b'=')) => (XorAssign, 2),
        (b'^', _) => (Caret, 1),
        (b'~', _) => (Tilde, 1),
        (b'(', _) => (LParen, 1),
        (b')', _) => (RParen, 1),
        (b'{', _) => (LBrace, 1),
        (b'}', _) => (RBrace, 1),
        (b'[', _) => (LBracket, 1),
        (b']', _) => (RBracket, 1),
        (b';', _) => (Semi, 1),
        (b',', _) => (Comma, 1),
        (b'.', _) => (Dot, 1),
        (b'?', _) => (Question, 1),
        (b':', _) => (Colon, 1),
        _ => return None,
    };
    for _ in 0..len {
        cur.bump();
    }
    Some(p)
}
