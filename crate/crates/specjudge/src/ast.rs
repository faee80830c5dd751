//! Abstract syntax for the supported Dafny fragment, plus a precedence-aware
//! pretty printer whose output re-parses to a structurally equal tree.

use crate::value::ValueType;
use num_bigint::BigInt;
use std::fmt;

/// Byte range plus human position of a syntax node in its source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn merge(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            line: self.line,
            col: self.col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    And,
    Or,
    Implies,
    Explies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::In => "in",
            BinOp::NotIn => "!in",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Explies => "<==",
            BinOp::Iff => "<==>",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantKind {
    Forall,
    Exists,
}

impl QuantKind {
    pub fn keyword(self) -> &'static str {
        match self {
            QuantKind::Forall => "forall",
            QuantKind::Exists => "exists",
        }
    }
}

/// An expression node; equality is structural and ignores spans.
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

impl Eq for Expr {}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    IntLit(BigInt),
    BoolLit(bool),
    StrLit(String),
    /// Sequence display `[e1, ..., en]`.
    SeqLit(Vec<Expr>),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `a[i]`
    Index(Box<Expr>, Box<Expr>),
    /// `a[lo..hi]`, `a[..hi]`, `a[lo..]`, `a[..]`
    Slice {
        target: Box<Expr>,
        lo: Option<Box<Expr>>,
        hi: Option<Box<Expr>>,
    },
    /// `a.Length`
    Length(Box<Expr>),
    /// `|s|`
    Cardinality(Box<Expr>),
    /// Helper application `f(e1, ..., en)`.
    Call(String, Vec<Expr>),
    Quantifier {
        kind: QuantKind,
        vars: Vec<String>,
        body: Box<Expr>,
    },
    Ite {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
}

/// A named, typed parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: ValueType,
}

/// Parsed `method m(x...) returns (y...)` header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSignature {
    pub name: String,
    pub inputs: Vec<Param>,
    pub outputs: Vec<Param>,
}

impl MethodSignature {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .find(|p| p.name == name)
    }
}

/// A helper function/predicate definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: ValueType,
    pub body: Expr,
    pub is_recursive: bool,
    /// Verbatim source of the whole definition, for harness emission.
    pub source: String,
}

/// One `ensures`/`requires` clause: the parsed tree plus its verbatim source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecClause {
    pub expr: Expr,
    pub source: String,
}

/// The candidate specification: the conjunction of `ensures` clauses plus
/// the helper definitions they reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecUnit {
    pub ensures: Vec<SpecClause>,
    pub requires: Vec<SpecClause>,
    /// Helpers in source order (validated to admit a topological order with
    /// only self-recursion).
    pub helpers: Vec<FunctionDef>,
}

impl SpecUnit {
    pub fn helper(&self, name: &str) -> Option<&FunctionDef> {
        self.helpers.iter().find(|h| h.name == name)
    }
}

// ---------------------------------------------------------------------------
// Pretty printer
// ---------------------------------------------------------------------------

/// Operator precedence, loosest binding first. Implication-family operators
/// share a level but must not be mixed without parentheses.
fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Iff => 1,
        BinOp::Implies | BinOp::Explies => 2,
        BinOp::Or => 3,
        BinOp::And => 4,
        BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In
        | BinOp::NotIn => 5,
        BinOp::Add | BinOp::Sub => 6,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 7,
    }
}

enum Assoc {
    Left,
    Right,
    /// Comparisons: any nested comparison operand gets parentheses (the
    /// grammar treats unparenthesized nesting as chaining).
    None,
}

fn assoc(op: BinOp) -> Assoc {
    match op {
        BinOp::Implies => Assoc::Right,
        BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In
        | BinOp::NotIn => Assoc::None,
        _ => Assoc::Left,
    }
}

/// Renders an expression with minimal parentheses; reparsing the result
/// yields a structurally equal tree.
pub fn pretty(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    match &expr.kind {
        ExprKind::IntLit(n) => {
            if n.sign() == num_bigint::Sign::Minus {
                // negative literals print as unary minus
                let needs = min_prec > 8;
                if needs {
                    out.push('(');
                }
                out.push_str(&n.to_string());
                if needs {
                    out.push(')');
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        ExprKind::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::StrLit(s) => {
            out.push_str(&crate::value::render_dafny_literal(
                &crate::value::ConcreteValue::Str(s.clone()),
                false,
            ));
        }
        ExprKind::SeqLit(es) => {
            out.push('[');
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, e, 0);
            }
            out.push(']');
        }
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Unary(op, inner) => {
            let needs = min_prec > 8;
            if needs {
                out.push('(');
            }
            out.push(match op {
                UnOp::Not => '!',
                UnOp::Neg => '-',
            });
            write_expr(out, inner, 9);
            if needs {
                out.push(')');
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let prec = precedence(*op);
            let needs = prec < min_prec || (prec == min_prec && matches!(assoc(*op), Assoc::None));
            if needs {
                out.push('(');
            }
            let (lp, rp) = match assoc(*op) {
                Assoc::Left => (prec, prec + 1),
                Assoc::Right => (prec + 1, prec),
                Assoc::None => (prec + 1, prec + 1),
            };
            // Implication-family mixing always parenthesizes the child.
            let lp = bump_for_mixed(*op, lhs, lp);
            let rp = bump_for_mixed(*op, rhs, rp);
            write_expr(out, lhs, lp);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, rhs, rp);
            if needs {
                out.push(')');
            }
        }
        ExprKind::Index(target, idx) => {
            write_expr(out, target, 9);
            out.push('[');
            write_expr(out, idx, 0);
            out.push(']');
        }
        ExprKind::Slice { target, lo, hi } => {
            write_expr(out, target, 9);
            out.push('[');
            if let Some(lo) = lo {
                write_expr(out, lo, 0);
            }
            out.push_str("..");
            if let Some(hi) = hi {
                write_expr(out, hi, 0);
            }
            out.push(']');
        }
        ExprKind::Length(target) => {
            write_expr(out, target, 9);
            out.push_str(".Length");
        }
        ExprKind::Cardinality(inner) => {
            out.push('|');
            write_expr(out, inner, 0);
            out.push('|');
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        ExprKind::Quantifier { kind, vars, body } => {
            // The body extends maximally right, so a quantifier in any
            // operand position needs parentheses.
            let needs = min_prec > 0;
            if needs {
                out.push('(');
            }
            out.push_str(kind.keyword());
            out.push(' ');
            out.push_str(&vars.join(", "));
            out.push_str(" :: ");
            write_expr(out, body, 0);
            if needs {
                out.push(')');
            }
        }
        ExprKind::Ite {
            cond,
            then_branch,
            else_branch,
        } => {
            let needs = min_prec > 0;
            if needs {
                out.push('(');
            }
            out.push_str("if ");
            write_expr(out, cond, 1);
            out.push_str(" then ");
            write_expr(out, then_branch, 1);
            out.push_str(" else ");
            write_expr(out, else_branch, 0);
            if needs {
                out.push(')');
            }
        }
    }
}

/// `a ==> b <== c` style mixing is a parse error, so the printer forces
/// parentheses around an implication-family child of a different operator
/// at the same level (likewise comparison-in-comparison).
fn bump_for_mixed(parent: BinOp, child: &Expr, prec: u8) -> u8 {
    if let ExprKind::Binary(cop, ..) = &child.kind {
        if precedence(*cop) == precedence(parent) && *cop != parent {
            return prec.max(precedence(parent) + 1);
        }
        // `if-then-else`/quantifier handled by their own rules; chained
        // comparisons reparse as conjunctions, so equal-op comparisons
        // still need parens.
        if matches!(assoc(parent), Assoc::None) && precedence(*cop) == precedence(parent) {
            return prec.max(precedence(parent) + 1);
        }
    }
    prec
}

/// Substitutes variables by replacement expressions (used when asserting
/// requires clauses against concrete inputs in generated harnesses).
pub fn substitute(expr: &Expr, subst: &std::collections::HashMap<String, Expr>) -> Expr {
    let kind = match &expr.kind {
        ExprKind::Var(name) => {
            if let Some(rep) = subst.get(name) {
                return rep.clone();
            }
            ExprKind::Var(name.clone())
        }
        ExprKind::IntLit(n) => ExprKind::IntLit(n.clone()),
        ExprKind::BoolLit(b) => ExprKind::BoolLit(*b),
        ExprKind::StrLit(s) => ExprKind::StrLit(s.clone()),
        ExprKind::SeqLit(es) => ExprKind::SeqLit(es.iter().map(|e| substitute(e, subst)).collect()),
        ExprKind::Unary(op, inner) => ExprKind::Unary(*op, Box::new(substitute(inner, subst))),
        ExprKind::Binary(op, lhs, rhs) => ExprKind::Binary(
            *op,
            Box::new(substitute(lhs, subst)),
            Box::new(substitute(rhs, subst)),
        ),
        ExprKind::Index(t, i) => ExprKind::Index(
            Box::new(substitute(t, subst)),
            Box::new(substitute(i, subst)),
        ),
        ExprKind::Slice { target, lo, hi } => ExprKind::Slice {
            target: Box::new(substitute(target, subst)),
            lo: lo.as_ref().map(|e| Box::new(substitute(e, subst))),
            hi: hi.as_ref().map(|e| Box::new(substitute(e, subst))),
        },
        ExprKind::Length(t) => ExprKind::Length(Box::new(substitute(t, subst))),
        ExprKind::Cardinality(t) => ExprKind::Cardinality(Box::new(substitute(t, subst))),
        ExprKind::Call(name, args) => ExprKind::Call(
            name.clone(),
            args.iter().map(|a| substitute(a, subst)).collect(),
        ),
        ExprKind::Quantifier { kind, vars, body } => {
            // Bound variables shadow; inputs never collide with quantifier
            // variables after resolution, so plain filtering suffices.
            let mut inner = subst.clone();
            for v in vars {
                inner.remove(v);
            }
            ExprKind::Quantifier {
                kind: *kind,
                vars: vars.clone(),
                body: Box::new(substitute(body, &inner)),
            }
        }
        ExprKind::Ite {
            cond,
            then_branch,
            else_branch,
        } => ExprKind::Ite {
            cond: Box::new(substitute(cond, subst)),
            then_branch: Box::new(substitute(then_branch, subst)),
            else_branch: Box::new(substitute(else_branch, subst)),
        },
    };
    Expr::new(kind, expr.span)
}

/// Free variables of an expression (quantifier-bound names excluded);
/// helper call names are not included.
pub fn free_vars(expr: &Expr) -> std::collections::BTreeSet<String> {
    let mut out = std::collections::BTreeSet::new();
    collect_free(expr, &mut Vec::new(), &mut out);
    out
}

fn collect_free(
    expr: &Expr,
    bound: &mut Vec<String>,
    out: &mut std::collections::BTreeSet<String>,
) {
    match &expr.kind {
        ExprKind::Var(name) => {
            if !bound.iter().any(|b| b == name) {
                out.insert(name.clone());
            }
        }
        ExprKind::IntLit(_) | ExprKind::BoolLit(_) | ExprKind::StrLit(_) => {}
        ExprKind::SeqLit(es) => {
            for e in es {
                collect_free(e, bound, out);
            }
        }
        ExprKind::Unary(_, inner) => collect_free(inner, bound, out),
        ExprKind::Binary(_, lhs, rhs) => {
            collect_free(lhs, bound, out);
            collect_free(rhs, bound, out);
        }
        ExprKind::Index(t, i) => {
            collect_free(t, bound, out);
            collect_free(i, bound, out);
        }
        ExprKind::Slice { target, lo, hi } => {
            collect_free(target, bound, out);
            if let Some(lo) = lo {
                collect_free(lo, bound, out);
            }
            if let Some(hi) = hi {
                collect_free(hi, bound, out);
            }
        }
        ExprKind::Length(t) | ExprKind::Cardinality(t) => collect_free(t, bound, out),
        ExprKind::Call(_, args) => {
            for a in args {
                collect_free(a, bound, out);
            }
        }
        ExprKind::Quantifier { vars, body, .. } => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(n);
        }
        ExprKind::Ite {
            cond,
            then_branch,
            else_branch,
        } => {
            collect_free(cond, bound, out);
            collect_free(then_branch, bound, out);
            collect_free(else_branch, bound, out);
        }
    }
}
