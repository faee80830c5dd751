//! Hand-written lexer for the supported Dafny fragment: identifiers and
//! keywords (kept textual), decimal integer literals (underscores allowed),
//! double-quoted strings, line and (nesting) block comments, and the
//! multi-character operators `:= :: .. == != <= >= && || ==> <== <==> !in`.

use crate::ast::Span;
use num_bigint::BigInt;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(BigInt),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    ColonColon,
    ColonBar, // :|
    Semi,
    Dot,
    DotDot,
    Pipe,
    Assign, // :=
    Eq,
    Neq,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Not,
    NotIn,
    AndAnd,
    OrOr,
    Implies, // ==>
    Explies, // <==
    Iff,     // <==>
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Int(n) => write!(f, "integer {n}"),
            TokenKind::Str(_) => write!(f, "string literal"),
            TokenKind::Eof => write!(f, "end of input"),
            other => {
                let sym = match other {
                    TokenKind::LParen => "(",
                    TokenKind::RParen => ")",
                    TokenKind::LBracket => "[",
                    TokenKind::RBracket => "]",
                    TokenKind::LBrace => "{",
                    TokenKind::RBrace => "}",
                    TokenKind::Comma => ",",
                    TokenKind::Colon => ":",
                    TokenKind::ColonColon => "::",
                    TokenKind::ColonBar => ":|",
                    TokenKind::Semi => ";",
                    TokenKind::Dot => ".",
                    TokenKind::DotDot => "..",
                    TokenKind::Pipe => "|",
                    TokenKind::Assign => ":=",
                    TokenKind::Eq => "==",
                    TokenKind::Neq => "!=",
                    TokenKind::Le => "<=",
                    TokenKind::Ge => ">=",
                    TokenKind::Lt => "<",
                    TokenKind::Gt => ">",
                    TokenKind::Plus => "+",
                    TokenKind::Minus => "-",
                    TokenKind::Star => "*",
                    TokenKind::Slash => "/",
                    TokenKind::Percent => "%",
                    TokenKind::Not => "!",
                    TokenKind::NotIn => "!in",
                    TokenKind::AndAnd => "&&",
                    TokenKind::OrOr => "||",
                    TokenKind::Implies => "==>",
                    TokenKind::Explies => "<==",
                    TokenKind::Iff => "<==>",
                    _ => unreachable!(),
                };
                write!(f, "`{sym}`")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at line {line}, column {col}")]
pub struct LexError {
    pub msg: String,
    pub line: u32,
    pub col: u32,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! err {
        ($l:expr, $c:expr, $($arg:tt)*) => {
            return Err(LexError { msg: format!($($arg)*), line: $l, col: $c })
        };
    }

    while i < bytes.len() {
        let start = i;
        let (sl, sc) = (line, col);
        let b = bytes[i];

        let bump = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if bytes[*i] == b'\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };

        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                bump(&mut i, &mut line, &mut col);
                continue;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    bump(&mut i, &mut line, &mut col);
                }
                continue;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                bump(&mut i, &mut line, &mut col);
                bump(&mut i, &mut line, &mut col);
                let mut depth = 1usize;
                while depth > 0 {
                    if i >= bytes.len() {
                        err!(sl, sc, "unterminated block comment");
                    }
                    if bytes[i] == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'*' {
                        depth += 1;
                        bump(&mut i, &mut line, &mut col);
                    } else if bytes[i] == b'*' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                        depth -= 1;
                        bump(&mut i, &mut line, &mut col);
                    }
                    bump(&mut i, &mut line, &mut col);
                }
                continue;
            }
            _ => {}
        }

        let mut push = |kind: TokenKind, i: usize, line: u32, col: u32| {
            tokens.push(Token {
                kind,
                span: Span {
                    start,
                    end: i,
                    line,
                    col,
                },
            });
        };

        if b.is_ascii_alphabetic() || b == b'_' || b == b'\'' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
                col += 1;
            }
            let text = &src[start..i];
            push(TokenKind::Ident(text.to_string()), i, sl, sc);
            continue;
        }

        if b.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
                col += 1;
            }
            let digits: String = src[start..i].chars().filter(|c| *c != '_').collect();
            let n: BigInt = digits
                .parse()
                .map_err(|_| LexError {
                    msg: format!("invalid integer literal `{}`", &src[start..i]),
                    line: sl,
                    col: sc,
                })?;
            push(TokenKind::Int(n), i, sl, sc);
            continue;
        }

        if b == b'"' {
            i += 1;
            col += 1;
            let mut out = String::new();
            loop {
                if i >= bytes.len() {
                    err!(sl, sc, "unterminated string literal");
                }
                match bytes[i] {
                    b'"' => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    b'\\' => {
                        if i + 1 >= bytes.len() {
                            err!(sl, sc, "unterminated string escape");
                        }
                        let esc = bytes[i + 1];
                        out.push(match esc {
                            b'"' => '"',
                            b'\\' => '\\',
                            b'n' => '\n',
                            b't' => '\t',
                            b'r' => '\r',
                            b'0' => '\0',
                            other => err!(line, col, "unsupported string escape `\\{}`", other as char),
                        });
                        i += 2;
                        col += 2;
                    }
                    b'\n' => err!(sl, sc, "newline in string literal"),
                    _ => {
                        // copy one UTF-8 scalar
                        let ch_len = utf8_len(bytes[i]);
                        out.push_str(&src[i..i + ch_len]);
                        i += ch_len;
                        col += 1;
                    }
                }
            }
            push(TokenKind::Str(out), i, sl, sc);
            continue;
        }

        // operators, longest match first
        let rest = &src[i..];
        let table: &[(&str, TokenKind)] = &[
            ("<==>", TokenKind::Iff),
            ("==>", TokenKind::Implies),
            ("<==", TokenKind::Explies),
            ("!in", TokenKind::NotIn),
            ("==", TokenKind::Eq),
            ("!=", TokenKind::Neq),
            ("<=", TokenKind::Le),
            (">=", TokenKind::Ge),
            ("&&", TokenKind::AndAnd),
            ("||", TokenKind::OrOr),
            (":=", TokenKind::Assign),
            ("::", TokenKind::ColonColon),
            (":|", TokenKind::ColonBar),
            ("..", TokenKind::DotDot),
            ("(", TokenKind::LParen),
            (")", TokenKind::RParen),
            ("[", TokenKind::LBracket),
            ("]", TokenKind::RBracket),
            ("{", TokenKind::LBrace),
            ("}", TokenKind::RBrace),
            (",", TokenKind::Comma),
            (":", TokenKind::Colon),
            (";", TokenKind::Semi),
            (".", TokenKind::Dot),
            ("|", TokenKind::Pipe),
            ("<", TokenKind::Lt),
            (">", TokenKind::Gt),
            ("+", TokenKind::Plus),
            ("-", TokenKind::Minus),
            ("*", TokenKind::Star),
            ("/", TokenKind::Slash),
            ("%", TokenKind::Percent),
            ("!", TokenKind::Not),
        ];
        let mut matched = false;
        for (sym, kind) in table {
            if rest.starts_with(sym) {
                i += sym.len();
                col += sym.len() as u32;
                push(kind.clone(), i, sl, sc);
                matched = true;
                break;
            }
        }
        if !matched {
            err!(sl, sc, "unexpected character `{}`", &src[i..i + utf8_len(b)]);
        }
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span {
            start: src.len(),
            end: src.len(),
            line,
            col,
        },
    });
    Ok(tokens)
}

fn utf8_len(b: u8) -> usize {
    if b < 0x80 {
        1
    } else if b >> 5 == 0b110 {
        2
    } else if b >> 4 == 0b1110 {
        3
    } else {
        4
    }
}
