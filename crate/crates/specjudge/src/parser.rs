//! Recursive-descent parser for the supported Dafny fragment.
//!
//! The grammar subset is deliberate and documented; anything outside it is
//! diagnosed with a construct name and source location instead of guessed at.
//!
//! ```text
//! type      := int | bool | string | array<int> | seq<int>
//! signature := "method" ident "(" params ")" "returns" "(" params ")"
//! specfile  := (helper | method)*
//! helper    := ("function"|"predicate") ["method"] ident "(" params ")"
//!              [":" type] clause* "{" expr "}"
//! method    := signature clause* [body]           -- body tokens are skipped
//! clause    := ("ensures"|"requires") expr
//!            | ("reads"|"modifies"|"decreases") frame
//! expr      := iff-level expression grammar with: literals, variables,
//!              + - * / % (Euclidean), == != < <= > >= (with Dafny chaining),
//!              in !in, && || ! ==> <== <==>, a[i], a.Length, |s|,
//!              a[..e] a[lo..hi] a[lo..] a[..], seq displays [e, ...],
//!              helper calls f(e, ...), forall/exists vars :: body,
//!              if c then a else b
//! snippet   := ("var" ident ":=" literal ";")*
//!              "var" idents ":=" ident "(" args ")" ";"
//!              "assert" equality ("&&" equality)* ";"
//! literal   := int | -int | true | false | string | [ints]
//!            | "new int[]" "[" ints "]" | "new int[0]"
//! ```
//!
//! Unsupported Dafny (old(), set/map displays and comprehensions, ghost
//! declarations, lemmas, classes, 2D arrays, non-int collections, `.foo`
//! member access other than `.Length`) fails loudly. Nested cardinality
//! needs parentheses: `|(|a|)|`.

use crate::ast::{
    BinOp, Expr, ExprKind, MethodSignature, Param, QuantKind, Span, SpecClause, UnOp,
};
use crate::lexer::{tokenize, Token, TokenKind};
use crate::value::{ConcreteValue, ValueType};
use num_bigint::BigInt;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnsupportedType,
    UnsupportedConstruct,
    Duplicate,
    MissingReturns,
    Unresolved,
    Type,
    Snippet,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnsupportedType => "unsupported type",
            ParseErrorKind::UnsupportedConstruct => "unsupported construct",
            ParseErrorKind::Duplicate => "duplicate name",
            ParseErrorKind::MissingReturns => "missing returns clause",
            ParseErrorKind::Unresolved => "unresolved identifier",
            ParseErrorKind::Type => "type error",
            ParseErrorKind::Snippet => "test snippet error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {msg} (line {line}, column {col})")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub msg: String,
    pub line: u32,
    pub col: u32,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, msg: impl Into<String>, span: Span) -> Self {
        ParseError {
            kind,
            msg: msg.into(),
            line: span.line,
            col: span.col,
        }
    }
}

impl From<crate::lexer::LexError> for ParseError {
    fn from(e: crate::lexer::LexError) -> Self {
        ParseError {
            kind: ParseErrorKind::Syntax,
            msg: e.msg,
            line: e.line,
            col: e.col,
        }
    }
}

/// A helper definition before resolution/typechecking.
#[derive(Debug, Clone)]
pub struct RawHelper {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: ValueType,
    pub body: Expr,
    pub source: String,
    pub span: Span,
}

/// A method declaration before resolution/typechecking; bodies are skipped.
#[derive(Debug, Clone)]
pub struct RawMethod {
    pub signature: MethodSignature,
    pub ensures: Vec<SpecClause>,
    pub requires: Vec<SpecClause>,
    pub span: Span,
}

/// A parsed spec source file.
#[derive(Debug, Clone)]
pub struct SpecFile {
    pub helpers: Vec<RawHelper>,
    pub methods: Vec<RawMethod>,
}

/// A parsed test snippet: inputs and expected outputs in signature order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnippetCase {
    pub inputs: Vec<ConcreteValue>,
    pub expected: Vec<ConcreteValue>,
}

pub struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> PResult<Self> {
        Ok(Parser {
            src,
            tokens: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek_kind(), TokenKind::Eof)
    }

    fn err<T>(&self, kind: ParseErrorKind, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::new(kind, msg, self.peek().span))
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.peek_kind() == &kind {
            Ok(self.advance())
        } else {
            self.err(
                ParseErrorKind::Syntax,
                format!("expected {}, found {}", kind, self.peek_kind()),
            )
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek_kind(), TokenKind::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.is_kw(kw) {
            Ok(self.advance())
        } else {
            self.err(
                ParseErrorKind::Syntax,
                format!("expected `{kw}`, found {}", self.peek_kind()),
            )
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        match self.peek_kind().clone() {
            TokenKind::Ident(s) => {
                let t = self.advance();
                Ok((s, t.span))
            }
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected identifier, found {other}"),
            ),
        }
    }

    // -- types ---------------------------------------------------------------

    fn parse_type(&mut self) -> PResult<ValueType> {
        let (name, span) = self.expect_ident()?;
        match name.as_str() {
            "int" => Ok(ValueType::Int),
            "bool" => Ok(ValueType::Bool),
            "string" => Ok(ValueType::Str),
            "array" | "seq" => {
                self.expect(TokenKind::Lt)?;
                let (elem, espan) = self.expect_ident()?;
                self.expect(TokenKind::Gt)?;
                if elem != "int" {
                    return Err(ParseError::new(
                        ParseErrorKind::UnsupportedType,
                        format!("{name}<{elem}>"),
                        espan,
                    ));
                }
                Ok(if name == "array" {
                    ValueType::ArrayInt
                } else {
                    ValueType::SeqInt
                })
            }
            other => {
                let rendered = self.render_unsupported_type(other)?;
                Err(ParseError::new(
                    ParseErrorKind::UnsupportedType,
                    rendered,
                    span,
                ))
            }
        }
    }

    /// Consumes an optional `<...>` argument list after an unsupported type
    /// head so the diagnostic shows the full spelling (e.g. `array2<int>`).
    fn render_unsupported_type(&mut self, head: &str) -> PResult<String> {
        let mut s = head.to_string();
        if self.peek_kind() == &TokenKind::Lt {
            s.push('<');
            self.advance();
            let mut depth = 1;
            while depth > 0 {
                match self.peek_kind() {
                    TokenKind::Lt => {
                        depth += 1;
                        s.push('<');
                        self.advance();
                    }
                    TokenKind::Gt => {
                        depth -= 1;
                        if depth > 0 {
                            s.push('>');
                        }
                        self.advance();
                    }
                    TokenKind::Ident(t) => {
                        s.push_str(t);
                        self.advance();
                    }
                    TokenKind::Comma => {
                        s.push_str(", ");
                        self.advance();
                    }
                    TokenKind::Eof => {
                        return self.err(ParseErrorKind::Syntax, "unterminated type arguments")
                    }
                    _ => {
                        self.advance();
                    }
                }
            }
            s.push('>');
        }
        Ok(s)
    }

    fn parse_params(&mut self) -> PResult<Vec<Param>> {
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if self.peek_kind() != &TokenKind::RParen {
            loop {
                if self.is_kw("ghost") {
                    return self.err(ParseErrorKind::UnsupportedConstruct, "ghost parameter");
                }
                let (name, _) = self.expect_ident()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.parse_type()?;
                params.push(Param { name, ty });
                if self.peek_kind() == &TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(params)
    }

    // -- expressions ----------------------------------------------------------

    pub fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_iff()
    }

    fn parse_iff(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_implication()?;
        while self.peek_kind() == &TokenKind::Iff {
            self.advance();
            let rhs = self.parse_implication()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr::new(ExprKind::Binary(BinOp::Iff, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_implication(&mut self) -> PResult<Expr> {
        let first = self.parse_or()?;
        let mut items = vec![first];
        let mut ops: Vec<BinOp> = Vec::new();
        loop {
            let op = match self.peek_kind() {
                TokenKind::Implies => BinOp::Implies,
                TokenKind::Explies => BinOp::Explies,
                _ => break,
            };
            self.advance();
            ops.push(op);
            items.push(self.parse_or()?);
        }
        if ops.is_empty() {
            return Ok(items.pop().unwrap());
        }
        if ops.iter().any(|o| *o != ops[0]) {
            return self.err(
                ParseErrorKind::Syntax,
                "mixing ==> and <== requires parentheses",
            );
        }
        if ops[0] == BinOp::Implies {
            // right-associative
            let mut rhs = items.pop().unwrap();
            while let Some(lhs) = items.pop() {
                let span = lhs.span.merge(rhs.span);
                rhs = Expr::new(
                    ExprKind::Binary(BinOp::Implies, Box::new(lhs), Box::new(rhs)),
                    span,
                );
            }
            Ok(rhs)
        } else {
            // <== is left-associative
            let mut iter = items.into_iter();
            let mut lhs = iter.next().unwrap();
            for rhs in iter {
                let span = lhs.span.merge(rhs.span);
                lhs = Expr::new(
                    ExprKind::Binary(BinOp::Explies, Box::new(lhs), Box::new(rhs)),
                    span,
                );
            }
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and()?;
        while self.peek_kind() == &TokenKind::OrOr {
            self.advance();
            let rhs = self.parse_and()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr::new(ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_relational()?;
        while self.peek_kind() == &TokenKind::AndAnd {
            self.advance();
            let rhs = self.parse_relational()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr::new(ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    /// Comparisons with Dafny chaining: `0 <= i < j < n` means
    /// `0 <= i && i < j && j < n`. Chains must not mix directions, and
    /// `!=`/`in`/`!in` do not chain.
    fn parse_relational(&mut self) -> PResult<Expr> {
        let first = self.parse_additive()?;
        let mut operands = vec![first];
        let mut ops: Vec<BinOp> = Vec::new();
        loop {
            let op = match self.peek_kind() {
                TokenKind::Eq => BinOp::Eq,
                TokenKind::Neq => BinOp::Neq,
                TokenKind::Lt => BinOp::Lt,
                TokenKind::Le => BinOp::Le,
                TokenKind::Gt => BinOp::Gt,
                TokenKind::Ge => BinOp::Ge,
                TokenKind::Ident(s) if s == "in" => BinOp::In,
                TokenKind::NotIn => BinOp::NotIn,
                _ => break,
            };
            self.advance();
            ops.push(op);
            operands.push(self.parse_additive()?);
        }
        if ops.is_empty() {
            return Ok(operands.pop().unwrap());
        }
        if ops.len() == 1 {
            let rhs = operands.pop().unwrap();
            let lhs = operands.pop().unwrap();
            let span = lhs.span.merge(rhs.span);
            return Ok(Expr::new(
                ExprKind::Binary(ops[0], Box::new(lhs), Box::new(rhs)),
                span,
            ));
        }
        let ascending = ops.iter().all(|o| matches!(o, BinOp::Lt | BinOp::Le | BinOp::Eq));
        let descending = ops.iter().all(|o| matches!(o, BinOp::Gt | BinOp::Ge | BinOp::Eq));
        if !ascending && !descending {
            return self.err(
                ParseErrorKind::Syntax,
                "comparison chain must not mix directions (and != / in do not chain)",
            );
        }
        let mut conj: Option<Expr> = None;
        for (i, op) in ops.iter().enumerate() {
            let lhs = operands[i].clone();
            let rhs = operands[i + 1].clone();
            let span = lhs.span.merge(rhs.span);
            let link = Expr::new(ExprKind::Binary(*op, Box::new(lhs), Box::new(rhs)), span);
            conj = Some(match conj {
                None => link,
                Some(acc) => {
                    let span = acc.span.merge(link.span);
                    Expr::new(ExprKind::Binary(BinOp::And, Box::new(acc), Box::new(link)), span)
                }
            });
        }
        Ok(conj.unwrap())
    }

    fn parse_additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_multiplicative()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                TokenKind::Percent => BinOp::Mod,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_unary()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        match self.peek_kind() {
            TokenKind::Not => {
                let t = self.advance();
                let inner = self.parse_unary()?;
                let span = t.span.merge(inner.span);
                Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(inner)), span))
            }
            TokenKind::Minus => {
                let t = self.advance();
                let inner = self.parse_unary()?;
                let span = t.span.merge(inner.span);
                Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(inner)), span))
            }
            _ => self.parse_postfix(),
        }
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.parse_atom()?;
        loop {
            match self.peek_kind() {
                TokenKind::LBracket => {
                    let open = self.advance();
                    if self.peek_kind() == &TokenKind::DotDot {
                        self.advance();
                        let hi = if self.peek_kind() == &TokenKind::RBracket {
                            None
                        } else {
                            Some(Box::new(self.parse_expr()?))
                        };
                        let close = self.expect(TokenKind::RBracket)?;
                        let span = expr.span.merge(close.span);
                        expr = Expr::new(
                            ExprKind::Slice {
                                target: Box::new(expr),
                                lo: None,
                                hi,
                            },
                            span,
                        );
                    } else {
                        let first = self.parse_expr()?;
                        if self.peek_kind() == &TokenKind::DotDot {
                            self.advance();
                            let hi = if self.peek_kind() == &TokenKind::RBracket {
                                None
                            } else {
                                Some(Box::new(self.parse_expr()?))
                            };
                            let close = self.expect(TokenKind::RBracket)?;
                            let span = expr.span.merge(close.span);
                            expr = Expr::new(
                                ExprKind::Slice {
                                    target: Box::new(expr),
                                    lo: Some(Box::new(first)),
                                    hi,
                                },
                                span,
                            );
                        } else {
                            let close = self.expect(TokenKind::RBracket)?;
                            let span = expr.span.merge(close.span);
                            expr = Expr::new(
                                ExprKind::Index(Box::new(expr), Box::new(first)),
                                span,
                            );
                        }
                    }
                    let _ = open;
                }
                TokenKind::Dot => {
                    self.advance();
                    let (member, mspan) = self.expect_ident()?;
                    if member != "Length" {
                        return Err(ParseError::new(
                            ParseErrorKind::UnsupportedConstruct,
                            format!("member access `.{member}` (only `.Length` is supported)"),
                            mspan,
                        ));
                    }
                    let span = expr.span.merge(mspan);
                    expr = Expr::new(ExprKind::Length(Box::new(expr)), span);
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    fn parse_atom(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::Int(n) => {
                self.advance();
                Ok(Expr::new(ExprKind::IntLit(n.clone()), t.span))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::new(ExprKind::StrLit(s.clone()), t.span))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.parse_expr()?;
                let close = self.expect(TokenKind::RParen)?;
                Ok(Expr::new(inner.kind, t.span.merge(close.span)))
            }
            TokenKind::LBracket => {
                self.advance();
                let mut elems = Vec::new();
                if self.peek_kind() != &TokenKind::RBracket {
                    loop {
                        elems.push(self.parse_expr()?);
                        if self.peek_kind() == &TokenKind::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                let close = self.expect(TokenKind::RBracket)?;
                Ok(Expr::new(ExprKind::SeqLit(elems), t.span.merge(close.span)))
            }
            TokenKind::Pipe => {
                self.advance();
                let inner = self.parse_expr()?;
                let close = self.expect(TokenKind::Pipe)?;
                Ok(Expr::new(
                    ExprKind::Cardinality(Box::new(inner)),
                    t.span.merge(close.span),
                ))
            }
            TokenKind::LBrace => self.err(
                ParseErrorKind::UnsupportedConstruct,
                "set display/comprehension",
            ),
            TokenKind::Ident(name) => match name.as_str() {
                "true" | "false" => {
                    self.advance();
                    Ok(Expr::new(ExprKind::BoolLit(name == "true"), t.span))
                }
                "forall" | "exists" => self.parse_quantifier(),
                "if" => self.parse_ite(),
                "old" | "fresh" | "unchanged" | "allocated" => Err(ParseError::new(
                    ParseErrorKind::UnsupportedConstruct,
                    format!("`{name}(...)` two-state/heap expression"),
                    t.span,
                )),
                "set" | "iset" | "map" | "imap" | "multiset" => Err(ParseError::new(
                    ParseErrorKind::UnsupportedConstruct,
                    format!("`{name}` display/comprehension"),
                    t.span,
                )),
                "seq" if self.peek_at(1) == &TokenKind::LParen => Err(ParseError::new(
                    ParseErrorKind::UnsupportedConstruct,
                    "`seq(...)` constructor",
                    t.span,
                )),
                _ => {
                    self.advance();
                    if self.peek_kind() == &TokenKind::LParen {
                        self.advance();
                        let mut args = Vec::new();
                        if self.peek_kind() != &TokenKind::RParen {
                            loop {
                                args.push(self.parse_expr()?);
                                if self.peek_kind() == &TokenKind::Comma {
                                    self.advance();
                                } else {
                                    break;
                                }
                            }
                        }
                        let close = self.expect(TokenKind::RParen)?;
                        Ok(Expr::new(
                            ExprKind::Call(name.clone(), args),
                            t.span.merge(close.span),
                        ))
                    } else {
                        Ok(Expr::new(ExprKind::Var(name.clone()), t.span))
                    }
                }
            },
            other => self.err(
                ParseErrorKind::Syntax,
                format!("expected expression, found {other}"),
            ),
        }
    }

    fn parse_quantifier(&mut self) -> PResult<Expr> {
        let kw = self.advance();
        let kind = if matches!(&kw.kind, TokenKind::Ident(s) if s == "forall") {
            QuantKind::Forall
        } else {
            QuantKind::Exists
        };
        let mut vars = Vec::new();
        loop {
            let (name, vspan) = self.expect_ident()?;
            if vars.contains(&name) {
                return Err(ParseError::new(
                    ParseErrorKind::Duplicate,
                    format!("quantifier variable `{name}`"),
                    vspan,
                ));
            }
            vars.push(name);
            if self.peek_kind() == &TokenKind::Colon {
                self.advance();
                let (ty, tspan) = self.expect_ident()?;
                if ty != "int" {
                    return Err(ParseError::new(
                        ParseErrorKind::UnsupportedConstruct,
                        format!("quantified variable of type `{ty}` (only int is supported)"),
                        tspan,
                    ));
                }
            }
            if self.peek_kind() == &TokenKind::Comma {
                self.advance();
            } else {
                break;
            }
        }
        if self.peek_kind() == &TokenKind::LBrace {
            return self.err(ParseErrorKind::UnsupportedConstruct, "quantifier attribute");
        }
        self.expect(TokenKind::ColonColon)?;
        let body = self.parse_expr()?;
        let span = kw.span.merge(body.span);
        Ok(Expr::new(
            ExprKind::Quantifier {
                kind,
                vars,
                body: Box::new(body),
            },
            span,
        ))
    }

    fn parse_ite(&mut self) -> PResult<Expr> {
        let kw = self.expect_kw("if")?;
        let cond = self.parse_expr()?;
        self.expect_kw("then")?;
        let then_branch = self.parse_expr()?;
        self.expect_kw("else")?;
        let else_branch = self.parse_expr()?;
        let span = kw.span.merge(else_branch.span);
        Ok(Expr::new(
            ExprKind::Ite {
                cond: Box::new(cond),
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
            },
            span,
        ))
    }

    // -- declarations ----------------------------------------------------------

    fn parse_method_header(&mut self) -> PResult<MethodSignature> {
        self.expect_kw("method")?;
        if self.peek_kind() == &TokenKind::LBrace {
            return self.err(ParseErrorKind::UnsupportedConstruct, "method attribute");
        }
        let (name, _) = self.expect_ident()?;
        let inputs = self.parse_params()?;
        if !self.is_kw("returns") {
            return self.err(
                ParseErrorKind::MissingReturns,
                format!("method `{name}` has no returns clause"),
            );
        }
        self.advance();
        let outputs_span = self.peek().span;
        let outputs = self.parse_params()?;
        if outputs.is_empty() {
            return Err(ParseError::new(
                ParseErrorKind::MissingReturns,
                format!("method `{name}` declares no output parameter"),
                outputs_span,
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in inputs.iter().chain(outputs.iter()) {
            if !seen.insert(p.name.clone()) {
                return self.err(
                    ParseErrorKind::Duplicate,
                    format!("parameter `{}`", p.name),
                );
            }
        }
        Ok(MethodSignature {
            name,
            inputs,
            outputs,
        })
    }

    fn clause_source(&self, expr: &Expr) -> String {
        self.src[expr.span.start..expr.span.end].to_string()
    }

    /// Parses and discards a frame/decreases clause (comma-separated
    /// expressions, `*` allowed).
    fn skip_frame_clause(&mut self) -> PResult<()> {
        loop {
            if self.peek_kind() == &TokenKind::Star {
                self.advance();
            } else {
                let _ = self.parse_expr()?;
            }
            if self.peek_kind() == &TokenKind::Comma {
                self.advance();
            } else {
                return Ok(());
            }
        }
    }

    fn skip_balanced_body(&mut self) -> PResult<()> {
        self.expect(TokenKind::LBrace)?;
        let mut depth = 1usize;
        while depth > 0 {
            match self.peek_kind() {
                TokenKind::LBrace => {
                    depth += 1;
                    self.advance();
                }
                TokenKind::RBrace => {
                    depth -= 1;
                    self.advance();
                }
                TokenKind::Eof => {
                    return self.err(ParseErrorKind::Syntax, "unbalanced braces in method body")
                }
                _ => {
                    self.advance();
                }
            }
        }
        Ok(())
    }

    fn parse_helper(&mut self) -> PResult<RawHelper> {
        let start = self.peek().span;
        let is_predicate = self.is_kw("predicate");
        self.advance(); // function | predicate
        self.eat_kw("method");
        if self.peek_kind() == &TokenKind::LBrace {
            return self.err(ParseErrorKind::UnsupportedConstruct, "function attribute");
        }
        let (name, _) = self.expect_ident()?;
        let params = self.parse_params()?;
        let return_type = if is_predicate {
            ValueType::Bool
        } else {
            self.expect(TokenKind::Colon)?;
            self.parse_type()?
        };
        // requires/ensures/decreases/reads on helpers are parsed and dropped;
        // the evaluator enforces termination dynamically.
        loop {
            if self.is_kw("reads") || self.is_kw("modifies") || self.is_kw("decreases") {
                self.advance();
                self.skip_frame_clause()?;
            } else if self.is_kw("requires") || self.is_kw("ensures") {
                self.advance();
                let _ = self.parse_expr()?;
            } else {
                break;
            }
        }
        self.expect(TokenKind::LBrace)?;
        let body = self.parse_expr()?;
        let close = self.expect(TokenKind::RBrace)?;
        let span = start.merge(close.span);
        Ok(RawHelper {
            name,
            params,
            return_type,
            body,
            source: self.src[span.start..span.end].to_string(),
            span,
        })
    }

    fn parse_method_decl(&mut self) -> PResult<RawMethod> {
        let start = self.peek().span;
        let signature = self.parse_method_header()?;
        let mut ensures = Vec::new();
        let mut requires = Vec::new();
        loop {
            if self.is_kw("ensures") {
                self.advance();
                let expr = self.parse_expr()?;
                let source = self.clause_source(&expr);
                ensures.push(SpecClause { expr, source });
            } else if self.is_kw("requires") {
                self.advance();
                let expr = self.parse_expr()?;
                let source = self.clause_source(&expr);
                requires.push(SpecClause { expr, source });
            } else if self.is_kw("reads") || self.is_kw("modifies") || self.is_kw("decreases") {
                self.advance();
                self.skip_frame_clause()?;
            } else {
                break;
            }
        }
        let mut span = start;
        if self.peek_kind() == &TokenKind::LBrace {
            self.skip_balanced_body()?;
            span = start.merge(self.tokens[self.pos.saturating_sub(1)].span);
        }
        Ok(RawMethod {
            signature,
            ensures,
            requires,
            span,
        })
    }

    pub fn parse_spec_file(&mut self) -> PResult<SpecFile> {
        let mut helpers = Vec::new();
        let mut methods = Vec::new();
        while !self.at_eof() {
            if self.is_kw("function") || self.is_kw("predicate") {
                helpers.push(self.parse_helper()?);
            } else if self.is_kw("method") {
                methods.push(self.parse_method_decl()?);
            } else if self.is_kw("ghost") {
                return self.err(ParseErrorKind::UnsupportedConstruct, "ghost declaration");
            } else if self.is_kw("lemma") {
                return self.err(ParseErrorKind::UnsupportedConstruct, "lemma");
            } else if let TokenKind::Ident(other) = self.peek_kind() {
                let msg = format!("declaration `{other}`");
                return self.err(ParseErrorKind::UnsupportedConstruct, msg);
            } else {
                return self.err(
                    ParseErrorKind::Syntax,
                    format!("expected declaration, found {}", self.peek_kind()),
                );
            }
        }
        Ok(SpecFile { helpers, methods })
    }

    // -- test snippets and literals ---------------------------------------------

    fn parse_snippet_literal(&mut self) -> PResult<ConcreteValue> {
        match self.peek_kind().clone() {
            TokenKind::Int(n) => {
                self.advance();
                Ok(ConcreteValue::Int(n))
            }
            TokenKind::Minus => {
                self.advance();
                match self.peek_kind().clone() {
                    TokenKind::Int(n) => {
                        self.advance();
                        Ok(ConcreteValue::Int(-n))
                    }
                    _ => self.err(ParseErrorKind::Snippet, "expected integer after `-`"),
                }
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(ConcreteValue::Str(s))
            }
            TokenKind::Ident(s) if s == "true" || s == "false" => {
                self.advance();
                Ok(ConcreteValue::Bool(s == "true"))
            }
            TokenKind::LBracket => Ok(ConcreteValue::SeqInt(self.parse_int_display()?)),
            TokenKind::Ident(s) if s == "new" => {
                self.advance();
                self.expect_kw("int")?;
                self.expect(TokenKind::LBracket)?;
                // `new int[0]` (sized empty) or `new int[] [elems]`
                if let TokenKind::Int(n) = self.peek_kind().clone() {
                    self.advance();
                    self.expect(TokenKind::RBracket)?;
                    if n != BigInt::from(0) {
                        return self.err(
                            ParseErrorKind::Snippet,
                            "sized array allocation without elements is not a literal",
                        );
                    }
                    return Ok(ConcreteValue::ArrayInt(Vec::new()));
                }
                self.expect(TokenKind::RBracket)?;
                Ok(ConcreteValue::ArrayInt(self.parse_int_display()?))
            }
            other => self.err(
                ParseErrorKind::Snippet,
                format!("expected literal, found {other}"),
            ),
        }
    }

    fn parse_int_display(&mut self) -> PResult<Vec<BigInt>> {
        self.expect(TokenKind::LBracket)?;
        let mut elems = Vec::new();
        if self.peek_kind() != &TokenKind::RBracket {
            loop {
                let neg = if self.peek_kind() == &TokenKind::Minus {
                    self.advance();
                    true
                } else {
                    false
                };
                match self.peek_kind().clone() {
                    TokenKind::Int(n) => {
                        self.advance();
                        elems.push(if neg { -n } else { n });
                    }
                    other => {
                        return self.err(
                            ParseErrorKind::Snippet,
                            format!("expected integer element, found {other}"),
                        )
                    }
                }
                if self.peek_kind() == &TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBracket)?;
        Ok(elems)
    }
}

/// Parses a single Dafny method header.
pub fn parse_signature(text: &str) -> Result<MethodSignature, ParseError> {
    let mut p = Parser::new(text)?;
    let sig = p.parse_method_header()?;
    if !p.at_eof() {
        return p.err(
            ParseErrorKind::Syntax,
            format!("unexpected {} after signature", p.peek_kind()),
        );
    }
    Ok(sig)
}

/// Parses a whole spec source file (helpers plus method declarations;
/// method bodies are skipped).
pub fn parse_spec_source(source: &str) -> Result<SpecFile, ParseError> {
    Parser::new(source)?.parse_spec_file()
}

/// Parses a standalone expression (exposed for tests and tools).
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.parse_expr()?;
    if !p.at_eof() {
        return p.err(
            ParseErrorKind::Syntax,
            format!("unexpected {} after expression", p.peek_kind()),
        );
    }
    Ok(e)
}

/// Parses a Dafny literal (the forms `render_dafny_literal` produces).
pub fn parse_literal(text: &str) -> Result<ConcreteValue, ParseError> {
    let mut p = Parser::new(text)?;
    let v = p.parse_snippet_literal()?;
    if !p.at_eof() {
        return p.err(
            ParseErrorKind::Syntax,
            format!("unexpected {} after literal", p.peek_kind()),
        );
    }
    Ok(v)
}

/// Parses a test snippet against the dataset signature: var-bound literals,
/// exactly one call to the task method, and one equality assertion relating
/// the call result(s) to expected literal(s).
pub fn parse_test_snippet(text: &str, sig: &MethodSignature) -> Result<SnippetCase, ParseError> {
    let mut p = Parser::new(text)?;
    let mut bindings: Vec<(String, ConcreteValue)> = Vec::new();
    let mut call: Option<(Vec<ConcreteValue>, Vec<String>)> = None;
    let mut assertion: Option<Vec<ConcreteValue>> = None;

    let lookup = |bindings: &[(String, ConcreteValue)], name: &str| -> Option<ConcreteValue> {
        bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
    };

    while !p.at_eof() {
        if p.eat_kw("var") {
            let mut names = vec![p.expect_ident()?.0];
            while p.peek_kind() == &TokenKind::Comma {
                p.advance();
                names.push(p.expect_ident()?.0);
            }
            p.expect(TokenKind::Assign)?;
            // a call statement or a literal binding
            let is_call = matches!(p.peek_kind(), TokenKind::Ident(s)
                if s != "new" && s != "true" && s != "false")
                && p.peek_at(1) == &TokenKind::LParen;
            if is_call {
                let (callee, cspan) = p.expect_ident()?;
                if call.is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::Snippet,
                        "multiple calls in test snippet",
                        cspan,
                    ));
                }
                if !callee.eq_ignore_ascii_case(&sig.name) {
                    return Err(ParseError::new(
                        ParseErrorKind::Snippet,
                        format!("call to `{callee}` does not match method `{}`", sig.name),
                        cspan,
                    ));
                }
                p.expect(TokenKind::LParen)?;
                let mut args = Vec::new();
                if p.peek_kind() != &TokenKind::RParen {
                    loop {
                        match p.peek_kind().clone() {
                            TokenKind::Ident(a)
                                if a != "new" && a != "true" && a != "false" =>
                            {
                                let (name, aspan) = p.expect_ident()?;
                                match lookup(&bindings, &name) {
                                    Some(v) => args.push(v),
                                    None => {
                                        return Err(ParseError::new(
                                            ParseErrorKind::Snippet,
                                            format!("call argument `{name}` is not bound"),
                                            aspan,
                                        ))
                                    }
                                }
                            }
                            _ => args.push(p.parse_snippet_literal()?),
                        }
                        if p.peek_kind() == &TokenKind::Comma {
                            p.advance();
                        } else {
                            break;
                        }
                    }
                }
                p.expect(TokenKind::RParen)?;
                if args.len() != sig.inputs.len() {
                    return Err(ParseError::new(
                        ParseErrorKind::Snippet,
                        format!(
                            "call passes {} argument(s), signature declares {}",
                            args.len(),
                            sig.inputs.len()
                        ),
                        cspan,
                    ));
                }
                if names.len() != sig.outputs.len() {
                    return Err(ParseError::new(
                        ParseErrorKind::Snippet,
                        format!(
                            "call binds {} result(s), signature declares {}",
                            names.len(),
                            sig.outputs.len()
                        ),
                        cspan,
                    ));
                }
                call = Some((args, names));
            } else {
                if names.len() != 1 {
                    return p.err(
                        ParseErrorKind::Snippet,
                        "only the method call may bind multiple variables",
                    );
                }
                let value = p.parse_snippet_literal()?;
                bindings.push((names.pop().unwrap(), value));
            }
            p.expect(TokenKind::Semi)?;
        } else if p.is_kw("assert") {
            let aspan = p.peek().span;
            p.advance();
            if assertion.is_some() {
                return Err(ParseError::new(
                    ParseErrorKind::Snippet,
                    "multiple assertions in test snippet",
                    aspan,
                ));
            }
            let (_, result_names) = match &call {
                Some(c) => c.clone(),
                None => {
                    return Err(ParseError::new(
                        ParseErrorKind::Snippet,
                        "assertion before the method call",
                        aspan,
                    ))
                }
            };
            let mut expected: Vec<Option<ConcreteValue>> = vec![None; result_names.len()];
            loop {
                // one equality: `res == e`, `e == res`, or `eq(res, e)` style
                let (res_idx, value) = parse_snippet_equality(&mut p, &bindings, &result_names)?;
                if expected[res_idx].is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::Snippet,
                        format!("result `{}` asserted twice", result_names[res_idx]),
                        aspan,
                    ));
                }
                expected[res_idx] = Some(value);
                if p.peek_kind() == &TokenKind::AndAnd {
                    p.advance();
                } else {
                    break;
                }
            }
            p.expect(TokenKind::Semi)?;
            if expected.iter().any(|e| e.is_none()) {
                return Err(ParseError::new(
                    ParseErrorKind::Snippet,
                    "assertion does not cover every result",
                    aspan,
                ));
            }
            assertion = Some(expected.into_iter().map(|e| e.unwrap()).collect());
        } else {
            return p.err(
                ParseErrorKind::Snippet,
                format!("unexpected statement starting with {}", p.peek_kind()),
            );
        }
    }

    let (args, _) = match call {
        Some(c) => c,
        None => {
            return Err(ParseError::new(
                ParseErrorKind::Snippet,
                "no call to the task method",
                Span::default(),
            ))
        }
    };
    let expected = match assertion {
        Some(e) => e,
        None => {
            return Err(ParseError::new(
                ParseErrorKind::Snippet,
                "no assertion relating results to expected values",
                Span::default(),
            ))
        }
    };

    // check/coerce against the declared signature types
    let inputs = coerce_positionally(args, &sig.inputs, "input")?;
    let expected = coerce_positionally(expected, &sig.outputs, "expected output")?;
    Ok(SnippetCase { inputs, expected })
}

fn coerce_positionally(
    values: Vec<ConcreteValue>,
    params: &[Param],
    what: &str,
) -> Result<Vec<ConcreteValue>, ParseError> {
    values
        .into_iter()
        .zip(params)
        .map(|(v, p)| {
            v.coerce_to(p.ty).ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::Type,
                    format!(
                        "{what} for `{}` has type {}, declared {}",
                        p.name,
                        v.value_type(),
                        p.ty
                    ),
                    Span::default(),
                )
            })
        })
        .collect()
}

/// One equality conjunct in a snippet assertion. Returns which result
/// variable it constrains and the expected value.
fn parse_snippet_equality(
    p: &mut Parser,
    bindings: &[(String, ConcreteValue)],
    result_names: &[String],
) -> Result<(usize, ConcreteValue), ParseError> {
    let resolve = |name: &str| -> Option<ConcreteValue> {
        bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
    };
    let result_index = |name: &str| result_names.iter().position(|r| r == name);

    // helper-equality form: ident ( x , y )
    if matches!(p.peek_kind(), TokenKind::Ident(s) if s != "true" && s != "false" && s != "new")
        && p.peek_at(1) == &TokenKind::LParen
    {
        let (helper, hspan) = p.expect_ident()?;
        p.expect(TokenKind::LParen)?;
        let (a, aspan) = p.expect_ident()?;
        p.expect(TokenKind::Comma)?;
        let (b, _) = p.expect_ident()?;
        p.expect(TokenKind::RParen)?;
        let _ = helper; // any two-argument equality helper (e.g. arrayEquals)
        return match (result_index(&a), result_index(&b)) {
            (Some(i), None) => match resolve(&b) {
                Some(v) => Ok((i, v)),
                None => Err(ParseError::new(
                    ParseErrorKind::Snippet,
                    format!("expected value `{b}` is not bound"),
                    hspan,
                )),
            },
            (None, Some(i)) => match resolve(&a) {
                Some(v) => Ok((i, v)),
                None => Err(ParseError::new(
                    ParseErrorKind::Snippet,
                    format!("expected value `{a}` is not bound"),
                    aspan,
                )),
            },
            _ => Err(ParseError::new(
                ParseErrorKind::Snippet,
                "equality must relate one call result to one expected value",
                hspan,
            )),
        };
    }

    // `lhs == rhs` form
    let lhs_span = p.peek().span;
    let lhs_name = match p.peek_kind().clone() {
        TokenKind::Ident(s) if s != "true" && s != "false" && s != "new" => {
            p.advance();
            Some(s)
        }
        _ => None,
    };
    let lhs_value = match &lhs_name {
        Some(_) => None,
        None => Some(p.parse_snippet_literal()?),
    };
    p.expect(TokenKind::Eq)?;
    let rhs_span = p.peek().span;
    let rhs_name = match p.peek_kind().clone() {
        TokenKind::Ident(s) if s != "true" && s != "false" && s != "new" => {
            p.advance();
            Some(s)
        }
        _ => None,
    };
    let rhs_value = match &rhs_name {
        Some(_) => None,
        None => Some(p.parse_snippet_literal()?),
    };

    let side = |name: &Option<String>,
                value: &Option<ConcreteValue>,
                span: Span|
     -> Result<(Option<usize>, Option<ConcreteValue>), ParseError> {
        if let Some(n) = name {
            if let Some(i) = result_index(n) {
                return Ok((Some(i), None));
            }
            return match resolve(n) {
                Some(v) => Ok((None, Some(v))),
                None => Err(ParseError::new(
                    ParseErrorKind::Snippet,
                    format!("identifier `{n}` is not bound"),
                    span,
                )),
            };
        }
        Ok((None, value.clone()))
    };

    let (l_res, l_val) = side(&lhs_name, &lhs_value, lhs_span)?;
    let (r_res, r_val) = side(&rhs_name, &rhs_value, rhs_span)?;
    match (l_res, r_res) {
        (Some(i), None) => Ok((i, r_val.unwrap())),
        (None, Some(i)) => Ok((i, l_val.unwrap())),
        _ => Err(ParseError::new(
            ParseErrorKind::Snippet,
            "equality must relate one call result to one expected value",
            lhs_span,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::pretty;

    #[test]
    fn parses_task2_json_signature() {
        let sig = parse_signature(
            "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
        )
        .unwrap();
        assert_eq!(sig.name, "similarElements");
        assert_eq!(
            sig.inputs,
            vec![
                Param {
                    name: "arr1".into(),
                    ty: ValueType::ArrayInt
                },
                Param {
                    name: "arr2".into(),
                    ty: ValueType::ArrayInt
                },
            ]
        );
        assert_eq!(
            sig.outputs,
            vec![Param {
                name: "res".into(),
                ty: ValueType::ArrayInt
            }]
        );
    }

    #[test]
    fn parses_bool_signature() {
        let sig = parse_signature("method f (b:bool) returns (r:bool)").unwrap();
        assert_eq!(sig.name, "f");
        assert_eq!(sig.inputs[0].ty, ValueType::Bool);
        assert_eq!(sig.outputs[0].ty, ValueType::Bool);
    }

    #[test]
    fn rejects_2d_array_signature() {
        let err = parse_signature("method g (m:array2<int>) returns (r:int)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnsupportedType);
        assert!(err.msg.contains("array2<int>"), "{}", err.msg);
    }

    #[test]
    fn rejects_duplicate_parameter() {
        let err = parse_signature("method f (x:int) returns (x:int)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Duplicate);
    }

    #[test]
    fn rejects_missing_returns() {
        let err = parse_signature("method f (x:int)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingReturns);
    }

    #[test]
    fn parses_chained_comparison_as_conjunction() {
        let e = parse_expression("0 <= i < j < |result|").unwrap();
        let expected = parse_expression("0 <= i && i < j && j < |result|").unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn rejects_mixed_direction_chain() {
        assert!(parse_expression("0 <= i > j").is_err());
        assert!(parse_expression("a != b != c").is_err());
    }

    #[test]
    fn rejects_mixed_implication() {
        assert!(parse_expression("a ==> b <== c").is_err());
        assert!(parse_expression("a ==> b ==> c").is_ok());
    }

    #[test]
    fn implication_is_right_associative() {
        let e = parse_expression("a ==> b ==> c").unwrap();
        let expected = parse_expression("a ==> (b ==> c)").unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn quantifier_body_extends_right() {
        let e = parse_expression("forall x :: x in s ==> P(x) && Q(x)").unwrap();
        match &e.kind {
            ExprKind::Quantifier { body, .. } => {
                assert!(matches!(body.kind, ExprKind::Binary(BinOp::Implies, ..)));
            }
            other => panic!("expected quantifier, got {other:?}"),
        }
    }

    #[test]
    fn rejects_old_and_set_comprehension() {
        let err = parse_expression("old(x) == 1").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnsupportedConstruct);
        let err = parse_expression("x in set y | y > 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnsupportedConstruct);
    }

    #[test]
    fn parses_slices_and_length() {
        let e = parse_expression("a[..a.Length] == a1[..a1.Length]").unwrap();
        assert!(matches!(e.kind, ExprKind::Binary(BinOp::Eq, ..)));
        assert!(parse_expression("a[1..]").is_ok());
        assert!(parse_expression("a[..]").is_ok());
        assert!(parse_expression("a[1..2]").is_ok());
    }

    #[test]
    fn parses_shared_elements_spec_file() {
        let src = r#"
predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result ==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
{
  result := [];
}
"#;
        let file = parse_spec_source(src).unwrap();
        assert_eq!(file.helpers.len(), 1);
        assert_eq!(file.helpers[0].name, "InArray");
        assert_eq!(file.methods.len(), 1);
        assert_eq!(file.methods[0].ensures.len(), 2);
        assert!(file.methods[0].ensures[0]
            .source
            .starts_with("forall x :: x in result"));
    }

    #[test]
    fn spec_file_skips_bodies_with_nested_braces() {
        let src = r#"
method M(x: int) returns (y: int)
  ensures y == x
{
  if x > 0 { y := x; } else { y := x; }
  assert {:split_here} true;
}
"#;
        let file = parse_spec_source(src).unwrap();
        assert_eq!(file.methods[0].ensures.len(), 1);
    }

    #[test]
    fn parses_task2_test_snippet() {
        let sig = parse_signature(
            "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
        )
        .unwrap();
        let snippet = "var a1:= new int[] [3, 4, 5, 6];\nvar a2:= new int[] [5, 7, 4, 10];\nvar e1:= new int[] [4, 5];\nvar res1:=similarElements(a1,a2);\nassert arrayEquals(res1,e1);";
        let case = parse_test_snippet(snippet, &sig).unwrap();
        assert_eq!(
            case.inputs,
            vec![
                ConcreteValue::array_of(&[3, 4, 5, 6]),
                ConcreteValue::array_of(&[5, 7, 4, 10]),
            ]
        );
        assert_eq!(case.expected, vec![ConcreteValue::array_of(&[4, 5])]);
    }

    #[test]
    fn parses_third_task2_test_snippet() {
        let sig = parse_signature(
            "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
        )
        .unwrap();
        let snippet = "var a5:= new int[] [11, 12, 14, 13];\nvar a6:= new int[] [17, 15, 14, 13];\nvar e3:= new int[] [13, 14];\nvar res3:=similarElements(a5,a6);\nassert arrayEquals(res3,e3);";
        let case = parse_test_snippet(snippet, &sig).unwrap();
        assert_eq!(
            case.inputs,
            vec![
                ConcreteValue::array_of(&[11, 12, 14, 13]),
                ConcreteValue::array_of(&[17, 15, 14, 13]),
            ]
        );
        assert_eq!(case.expected, vec![ConcreteValue::array_of(&[13, 14])]);
    }

    #[test]
    fn snippet_with_two_calls_is_rejected() {
        let sig = parse_signature("method f (x:int) returns (r:int)").unwrap();
        let snippet = "var a:= 1;\nvar r1:=f(a);\nvar r2:=f(a);\nassert r1 == 1;";
        let err = parse_test_snippet(snippet, &sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Snippet);
        assert!(err.msg.contains("multiple calls"));
    }

    #[test]
    fn snippet_scalar_equality_and_inline_literals() {
        let sig = parse_signature("method cube (n:int) returns (c:int)").unwrap();
        let case = parse_test_snippet("var r:=cube(5);\nassert r == 125;", &sig).unwrap();
        assert_eq!(case.inputs, vec![ConcreteValue::int(5)]);
        assert_eq!(case.expected, vec![ConcreteValue::int(125)]);
        // expected on the left works too
        let case = parse_test_snippet("var r:=cube(5);\nassert 125 == r;", &sig).unwrap();
        assert_eq!(case.expected, vec![ConcreteValue::int(125)]);
    }

    #[test]
    fn literal_round_trip_all_types() {
        use crate::value::render_dafny_literal;
        let values = vec![
            ConcreteValue::Bool(true),
            ConcreteValue::Bool(false),
            ConcreteValue::int(-42),
            ConcreteValue::Str("a\"b\n".into()),
            ConcreteValue::array_of(&[3, -4, 5]),
            ConcreteValue::ArrayInt(vec![]),
            ConcreteValue::seq_of(&[4, 5]),
            ConcreteValue::SeqInt(vec![]),
        ];
        for v in values {
            let fresh = v.value_type() == ValueType::ArrayInt;
            let text = render_dafny_literal(&v, fresh);
            let back = parse_literal(&text).unwrap();
            // seq displays parse as SeqInt; arrays only via the fresh form
            let back = if v.value_type() == ValueType::ArrayInt && !fresh {
                back.coerce_to(ValueType::ArrayInt).unwrap()
            } else {
                back
            };
            assert_eq!(back, v, "round-trip of {text}");
        }
    }

    #[test]
    fn pretty_print_reparses_structurally() {
        for src in [
            "forall x :: x in result ==> (InArray(a, x) && InArray(b, x))",
            "forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]",
            "result <==> exists k :: 2 <= k < n && n % k == 0",
            "c == n * n * n",
            "a[..a.Length] == a1[..a1.Length]",
            "if n == 0 then 0 else countTo(a, n - 1) + (if a[n - 1] > 0 then 1 else 0)",
            "!(x != 3) || -y < |s| - 1",
            "x !in s && s[0] == 1",
        ] {
            let e = parse_expression(src).unwrap();
            let printed = pretty(&e);
            let reparsed = parse_expression(&printed)
                .unwrap_or_else(|err| panic!("reparse of `{printed}`: {err}"));
            assert_eq!(reparsed, e, "round-trip `{src}` -> `{printed}`");
        }
    }
}
