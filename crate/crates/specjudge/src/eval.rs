//! Direct interpretation of specifications on fully concrete environments:
//! decides whether the ensures conjunction holds for bound inputs/outputs,
//! with bounded quantifier enumeration and depth-limited recursion.
//!
//! Semantics notes:
//! - `&&`, `||`, `==>` short-circuit left-to-right; `<==` evaluates its
//!   right operand first; `<==>` is strict boolean equality.
//! - Integer `/` and `%` follow Dafny's Euclidean convention: the remainder
//!   is non-negative and `a == b*(a/b) + a%b`.
//! - Out-of-range indexing, division by zero, exceeded limits, and
//!   underivable quantifier bounds are diagnosed errors carrying the source
//!   location; they are never silently turned into a boolean.
//! - Quantifiers evaluate every tuple of their finite domain (no early
//!   exit), so an evaluation error anywhere in the domain surfaces instead
//!   of being masked by a witness found earlier.

use crate::ast::{BinOp, Expr, ExprKind, FunctionDef, MethodSignature, Span, SpecUnit, UnOp};
use crate::value::ConcreteValue;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Concrete store binding every signature parameter to a value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Environment {
    bindings: BTreeMap<String, ConcreteValue>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, value: ConcreteValue) {
        self.bindings.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&ConcreteValue> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ConcreteValue)> {
        self.bindings.iter()
    }

    /// Binds all inputs and outputs of a signature, checking types.
    pub fn for_signature(
        sig: &MethodSignature,
        inputs: &[ConcreteValue],
        outputs: &[ConcreteValue],
    ) -> Result<Self, EvalError> {
        Self::from_params(
            sig.inputs.iter().chain(sig.outputs.iter()),
            inputs.iter().chain(outputs.iter()),
            sig.inputs.len() + sig.outputs.len(),
            inputs.len() + outputs.len(),
        )
    }

    /// Binds only the inputs of a signature (for requires checks).
    pub fn for_inputs(
        sig: &MethodSignature,
        inputs: &[ConcreteValue],
    ) -> Result<Self, EvalError> {
        Self::from_params(
            sig.inputs.iter(),
            inputs.iter(),
            sig.inputs.len(),
            inputs.len(),
        )
    }

    fn from_params<'a>(
        params: impl Iterator<Item = &'a crate::ast::Param>,
        values: impl Iterator<Item = &'a ConcreteValue>,
        n_params: usize,
        n_values: usize,
    ) -> Result<Self, EvalError> {
        if n_params != n_values {
            return Err(EvalError::TypeError {
                msg: format!("{n_params} parameter(s) but {n_values} value(s)"),
                span: Span::default(),
            });
        }
        let mut env = Environment::new();
        for (p, v) in params.zip(values) {
            if v.value_type() != p.ty {
                return Err(EvalError::TypeError {
                    msg: format!(
                        "parameter `{}` declared {}, bound {}",
                        p.name,
                        p.ty,
                        v.value_type()
                    ),
                    span: Span::default(),
                });
            }
            env.bind(p.name.clone(), v.clone());
        }
        Ok(env)
    }
}

/// Evaluation budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalLimits {
    pub max_recursion_depth: usize,
    /// Cap on the total number of enumerated quantifier tuples.
    pub max_quantifier_domain: usize,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits {
            max_recursion_depth: 10_000,
            max_quantifier_domain: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("index {index} out of range for length {length} ({span})")]
    IndexOutOfRange {
        index: BigInt,
        length: usize,
        span: Span,
    },
    #[error("division by zero ({span})")]
    DivisionByZero { span: Span },
    #[error("recursion limit exceeded ({span})")]
    RecursionLimit { span: Span },
    #[error("cannot derive finite bounds for quantified variable `{var}` ({span})")]
    UnboundedQuantifier { var: String, span: Span },
    #[error("quantifier domain of {size} tuples exceeds the limit of {limit} ({span})")]
    QuantifierDomainTooLarge {
        size: BigInt,
        limit: usize,
        span: Span,
    },
    #[error("{msg} ({span})")]
    TypeError { msg: String, span: Span },
    #[error("unbound identifier `{name}` ({span})")]
    Unbound { name: String, span: Span },
}

pub(crate) type Scope = Vec<(String, ConcreteValue)>;

pub(crate) struct Evaluator<'a> {
    pub(crate) helpers: &'a [FunctionDef],
    pub(crate) limits: &'a EvalLimits,
    pub(crate) depth: usize,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(helpers: &'a [FunctionDef], limits: &'a EvalLimits) -> Self {
        Evaluator {
            helpers,
            limits,
            depth: 0,
        }
    }

    pub(crate) fn eval(&mut self, expr: &Expr, scope: &mut Scope) -> Result<ConcreteValue, EvalError> {
        let span = expr.span;
        match &expr.kind {
            ExprKind::IntLit(n) => Ok(ConcreteValue::Int(n.clone())),
            ExprKind::BoolLit(b) => Ok(ConcreteValue::Bool(*b)),
            ExprKind::StrLit(s) => Ok(ConcreteValue::Str(s.clone())),
            ExprKind::SeqLit(es) => {
                let mut xs = Vec::with_capacity(es.len());
                for e in es {
                    xs.push(self.eval_int(e, scope)?);
                }
                Ok(ConcreteValue::SeqInt(xs))
            }
            ExprKind::Var(name) => scope
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| EvalError::Unbound {
                    name: name.clone(),
                    span,
                }),
            ExprKind::Unary(UnOp::Not, inner) => {
                let b = self.eval_bool(inner, scope)?;
                Ok(ConcreteValue::Bool(!b))
            }
            ExprKind::Unary(UnOp::Neg, inner) => {
                let n = self.eval_int(inner, scope)?;
                Ok(ConcreteValue::Int(-n))
            }
            ExprKind::Binary(op, lhs, rhs) => self.eval_binary(*op, lhs, rhs, span, scope),
            ExprKind::Index(target, idx) => {
                let xs = self.eval_collection(target, scope)?;
                let i = self.eval_int(idx, scope)?;
                let pos = index_in(&i, xs.len(), span)?;
                Ok(ConcreteValue::Int(xs[pos].clone()))
            }
            ExprKind::Slice { target, lo, hi } => {
                let xs = self.eval_collection(target, scope)?;
                let len = xs.len();
                let lo_v = match lo {
                    Some(e) => self.eval_int(e, scope)?,
                    None => BigInt::zero(),
                };
                let hi_v = match hi {
                    Some(e) => self.eval_int(e, scope)?,
                    None => BigInt::from(len),
                };
                let lo_u = bound_in(&lo_v, len, span)?;
                let hi_u = bound_in(&hi_v, len, span)?;
                if lo_u > hi_u {
                    return Err(EvalError::IndexOutOfRange {
                        index: lo_v,
                        length: hi_u,
                        span,
                    });
                }
                Ok(ConcreteValue::SeqInt(xs[lo_u..hi_u].to_vec()))
            }
            ExprKind::Length(target) => match self.eval(target, scope)? {
                ConcreteValue::ArrayInt(xs) => Ok(ConcreteValue::Int(BigInt::from(xs.len()))),
                other => Err(EvalError::TypeError {
                    msg: format!(".Length on {}", other.value_type()),
                    span,
                }),
            },
            ExprKind::Cardinality(target) => match self.eval(target, scope)? {
                ConcreteValue::SeqInt(xs) => Ok(ConcreteValue::Int(BigInt::from(xs.len()))),
                ConcreteValue::Str(s) => {
                    Ok(ConcreteValue::Int(BigInt::from(s.chars().count())))
                }
                other => Err(EvalError::TypeError {
                    msg: format!("|..| on {}", other.value_type()),
                    span,
                }),
            },
            ExprKind::Call(name, args) => {
                let def = self
                    .helpers
                    .iter()
                    .find(|h| &h.name == name)
                    .ok_or_else(|| EvalError::Unbound {
                        name: name.clone(),
                        span,
                    })?;
                if args.len() != def.params.len() {
                    return Err(EvalError::TypeError {
                        msg: format!(
                            "helper `{name}` takes {} argument(s), got {}",
                            def.params.len(),
                            args.len()
                        ),
                        span,
                    });
                }
                let mut frame: Scope = Vec::with_capacity(args.len());
                for (p, a) in def.params.iter().zip(args) {
                    frame.push((p.name.clone(), self.eval(a, scope)?));
                }
                if self.depth >= self.limits.max_recursion_depth {
                    return Err(EvalError::RecursionLimit { span });
                }
                self.depth += 1;
                // recursion depth is data-dependent (countTo-style helpers
                // unroll once per array element), so grow the stack instead
                // of crashing at a few hundred frames
                let r = stacker::maybe_grow(256 * 1024, 16 * 1024 * 1024, || {
                    self.eval(&def.body, &mut frame)
                });
                self.depth -= 1;
                r
            }
            ExprKind::Quantifier { kind, vars, body } => {
                crate::domain::eval_quantifier(self, *kind, vars, body, span, scope)
            }
            ExprKind::Ite {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.eval_bool(cond, scope)? {
                    self.eval(then_branch, scope)
                } else {
                    self.eval(else_branch, scope)
                }
            }
        }
    }

    fn eval_binary(
        &mut self,
        op: BinOp,
        lhs: &Expr,
        rhs: &Expr,
        span: Span,
        scope: &mut Scope,
    ) -> Result<ConcreteValue, EvalError> {
        match op {
            BinOp::And => {
                if !self.eval_bool(lhs, scope)? {
                    return Ok(ConcreteValue::Bool(false));
                }
                Ok(ConcreteValue::Bool(self.eval_bool(rhs, scope)?))
            }
            BinOp::Or => {
                if self.eval_bool(lhs, scope)? {
                    return Ok(ConcreteValue::Bool(true));
                }
                Ok(ConcreteValue::Bool(self.eval_bool(rhs, scope)?))
            }
            BinOp::Implies => {
                if !self.eval_bool(lhs, scope)? {
                    return Ok(ConcreteValue::Bool(true));
                }
                Ok(ConcreteValue::Bool(self.eval_bool(rhs, scope)?))
            }
            BinOp::Explies => {
                if !self.eval_bool(rhs, scope)? {
                    return Ok(ConcreteValue::Bool(true));
                }
                Ok(ConcreteValue::Bool(self.eval_bool(lhs, scope)?))
            }
            BinOp::Iff => {
                let l = self.eval_bool(lhs, scope)?;
                let r = self.eval_bool(rhs, scope)?;
                Ok(ConcreteValue::Bool(l == r))
            }
            BinOp::Eq | BinOp::Neq => {
                let l = self.eval(lhs, scope)?;
                let r = self.eval(rhs, scope)?;
                if l.value_type() != r.value_type() {
                    return Err(EvalError::TypeError {
                        msg: format!(
                            "equality between {} and {}",
                            l.value_type(),
                            r.value_type()
                        ),
                        span,
                    });
                }
                let eq = l == r;
                Ok(ConcreteValue::Bool(if op == BinOp::Eq { eq } else { !eq }))
            }
            BinOp::In | BinOp::NotIn => {
                let x = self.eval_int(lhs, scope)?;
                match self.eval(rhs, scope)? {
                    ConcreteValue::SeqInt(xs) => {
                        let found = xs.contains(&x);
                        Ok(ConcreteValue::Bool(if op == BinOp::In {
                            found
                        } else {
                            !found
                        }))
                    }
                    other => Err(EvalError::TypeError {
                        msg: format!("membership in {}", other.value_type()),
                        span,
                    }),
                }
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let l = self.eval_int(lhs, scope)?;
                let r = self.eval_int(rhs, scope)?;
                let b = match op {
                    BinOp::Lt => l < r,
                    BinOp::Le => l <= r,
                    BinOp::Gt => l > r,
                    BinOp::Ge => l >= r,
                    _ => unreachable!(),
                };
                Ok(ConcreteValue::Bool(b))
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul => {
                let l = self.eval_int(lhs, scope)?;
                let r = self.eval_int(rhs, scope)?;
                let v = match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    _ => unreachable!(),
                };
                Ok(ConcreteValue::Int(v))
            }
            BinOp::Div | BinOp::Mod => {
                let l = self.eval_int(lhs, scope)?;
                let r = self.eval_int(rhs, scope)?;
                let (q, m) = euclidean_divmod(&l, &r, span)?;
                Ok(ConcreteValue::Int(if op == BinOp::Div { q } else { m }))
            }
        }
    }

    pub(crate) fn eval_bool(&mut self, expr: &Expr, scope: &mut Scope) -> Result<bool, EvalError> {
        match self.eval(expr, scope)? {
            ConcreteValue::Bool(b) => Ok(b),
            other => Err(EvalError::TypeError {
                msg: format!("expected bool, got {}", other.value_type()),
                span: expr.span,
            }),
        }
    }

    pub(crate) fn eval_int(&mut self, expr: &Expr, scope: &mut Scope) -> Result<BigInt, EvalError> {
        match self.eval(expr, scope)? {
            ConcreteValue::Int(n) => Ok(n),
            other => Err(EvalError::TypeError {
                msg: format!("expected int, got {}", other.value_type()),
                span: expr.span,
            }),
        }
    }

    fn eval_collection(
        &mut self,
        expr: &Expr,
        scope: &mut Scope,
    ) -> Result<Vec<BigInt>, EvalError> {
        match self.eval(expr, scope)? {
            ConcreteValue::ArrayInt(xs) | ConcreteValue::SeqInt(xs) => Ok(xs),
            other => Err(EvalError::TypeError {
                msg: format!("expected array/seq, got {}", other.value_type()),
                span: expr.span,
            }),
        }
    }
}

/// Euclidean division: remainder in [0, |b|) and a == b*q + r.
pub fn euclidean_divmod(a: &BigInt, b: &BigInt, span: Span) -> Result<(BigInt, BigInt), EvalError> {
    if b.is_zero() {
        return Err(EvalError::DivisionByZero { span });
    }
    let r = a.mod_floor(&b.abs());
    let q = (a - &r) / b;
    Ok((q, r))
}

fn index_in(i: &BigInt, len: usize, span: Span) -> Result<usize, EvalError> {
    match i.to_usize() {
        Some(pos) if pos < len => Ok(pos),
        _ => Err(EvalError::IndexOutOfRange {
            index: i.clone(),
            length: len,
            span,
        }),
    }
}

fn bound_in(i: &BigInt, len: usize, span: Span) -> Result<usize, EvalError> {
    match i.to_usize() {
        Some(pos) if pos <= len => Ok(pos),
        _ => Err(EvalError::IndexOutOfRange {
            index: i.clone(),
            length: len,
            span,
        }),
    }
}

fn scope_from_env(env: &Environment) -> Scope {
    env.iter().map(|(n, v)| (n.clone(), v.clone())).collect()
}

/// Evaluates a single expression in the given environment.
pub fn eval_expr(
    expr: &Expr,
    env: &Environment,
    helpers: &[FunctionDef],
    limits: &EvalLimits,
) -> Result<ConcreteValue, EvalError> {
    let mut scope = scope_from_env(env);
    Evaluator::new(helpers, limits).eval(expr, &mut scope)
}

/// Decides the conjunction of the spec's ensures clauses on a complete
/// environment. A definite `false` from an earlier clause short-circuits;
/// any evaluation error propagates as a diagnosed error (the caller maps it
/// to an Unknown verdict, never to `false`).
pub fn eval_spec(
    spec: &SpecUnit,
    env: &Environment,
    limits: &EvalLimits,
) -> Result<bool, EvalError> {
    let mut scope = scope_from_env(env);
    let mut ev = Evaluator::new(&spec.helpers, limits);
    for clause in &spec.ensures {
        if !ev.eval_bool(&clause.expr, &mut scope)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A requires clause a test's inputs do not satisfy (or that failed to
/// evaluate); surfaced as a dataset diagnostic, not a correctness verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiresViolation {
    pub clause: String,
    pub detail: String,
}

/// Checks each requires clause against an inputs-only environment.
pub fn check_requires(
    spec: &SpecUnit,
    inputs_env: &Environment,
    limits: &EvalLimits,
) -> Vec<RequiresViolation> {
    let mut out = Vec::new();
    for clause in &spec.requires {
        let mut scope = scope_from_env(inputs_env);
        let mut ev = Evaluator::new(&spec.helpers, limits);
        match ev.eval_bool(&clause.expr, &mut scope) {
            Ok(true) => {}
            Ok(false) => out.push(RequiresViolation {
                clause: clause.source.clone(),
                detail: "inputs do not satisfy this precondition".to_string(),
            }),
            Err(e) => out.push(RequiresViolation {
                clause: clause.source.clone(),
                detail: e.to_string(),
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expression, parse_signature};
    use crate::typecheck::parse_spec;

    fn env(pairs: &[(&str, ConcreteValue)]) -> Environment {
        let mut e = Environment::new();
        for (n, v) in pairs {
            e.bind(*n, v.clone());
        }
        e
    }

    fn eval_str(src: &str, e: &Environment) -> Result<ConcreteValue, EvalError> {
        let expr = parse_expression(src).unwrap();
        eval_expr(&expr, e, &[], &EvalLimits::default())
    }

    const TASK2_SPEC: &str = r#"
predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result ==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;

    fn task2_env(result: &[i64]) -> (crate::ast::SpecUnit, Environment) {
        let json_sig = parse_signature(
            "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
        )
        .unwrap();
        let (sig, spec) = parse_spec(TASK2_SPEC, &json_sig).unwrap();
        let e = Environment::for_signature(
            &sig,
            &[
                ConcreteValue::array_of(&[3, 4, 5, 6]),
                ConcreteValue::array_of(&[5, 7, 4, 10]),
            ],
            &[ConcreteValue::seq_of(result)],
        )
        .unwrap();
        (spec, e)
    }

    #[test]
    fn task2_spec_holds_for_expected_output() {
        let (spec, e) = task2_env(&[4, 5]);
        assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(true));
    }

    #[test]
    fn task2_first_ensures_rejects_six() {
        let (spec, e) = task2_env(&[6]);
        assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(false));
    }

    #[test]
    fn task2_spec_still_holds_for_partial_outputs() {
        // the ==> form does not require all shared values to be present
        for r in [&[4][..], &[5][..]] {
            let (spec, e) = task2_env(r);
            assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(true));
        }
    }

    #[test]
    fn task2_second_ensures_rejects_duplicates() {
        let (spec, e) = task2_env(&[4, 4]);
        assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(false));
    }

    #[test]
    fn vacuous_spec_is_true() {
        let json_sig = parse_signature("method anyValue (x:int) returns (r:int)").unwrap();
        let (sig, spec) =
            parse_spec("method anyValue(x: int) returns (r: int)\n  ensures true\n", &json_sig)
                .unwrap();
        let e = Environment::for_signature(
            &sig,
            &[ConcreteValue::int(1)],
            &[ConcreteValue::int(99)],
        )
        .unwrap();
        assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(true));
    }

    #[test]
    fn cube_spec_catches_wrong_expected_value() {
        let json_sig = parse_signature("method cubeVolume (size:int) returns (volume:int)").unwrap();
        let (sig, spec) = parse_spec(
            "method cubeVolume(size: int) returns (volume: int)\n  ensures volume == size * size * size\n",
            &json_sig,
        )
        .unwrap();
        let bad = Environment::for_signature(
            &sig,
            &[ConcreteValue::int(5)],
            &[ConcreteValue::int(25)],
        )
        .unwrap();
        assert_eq!(eval_spec(&spec, &bad, &EvalLimits::default()), Ok(false));
        let good = Environment::for_signature(
            &sig,
            &[ConcreteValue::int(5)],
            &[ConcreteValue::int(125)],
        )
        .unwrap();
        assert_eq!(eval_spec(&spec, &good, &EvalLimits::default()), Ok(true));
    }

    #[test]
    fn euclidean_division_matches_convention() {
        let cases: &[(i64, i64, i64, i64)] = &[
            (7, 2, 3, 1),
            (-7, 2, -4, 1),
            (7, -2, -3, 1),
            (-7, -2, 4, 1),
            (6, 3, 2, 0),
        ];
        for &(a, b, q, r) in cases {
            let (qq, rr) =
                euclidean_divmod(&BigInt::from(a), &BigInt::from(b), Span::default()).unwrap();
            assert_eq!((qq, rr), (BigInt::from(q), BigInt::from(r)), "{a} /% {b}");
        }
    }

    #[test]
    fn division_by_zero_is_diagnosed() {
        let e = env(&[("x", ConcreteValue::int(1))]);
        assert!(matches!(
            eval_str("x / 0 == 1", &e),
            Err(EvalError::DivisionByZero { .. })
        ));
    }

    #[test]
    fn index_out_of_range_is_diagnosed() {
        let e = env(&[("s", ConcreteValue::seq_of(&[1, 2]))]);
        assert!(matches!(
            eval_str("s[5] == 1", &e),
            Err(EvalError::IndexOutOfRange { length: 2, .. })
        ));
    }

    #[test]
    fn short_circuit_protects_indexing() {
        let e = env(&[("s", ConcreteValue::seq_of(&[]))]);
        assert_eq!(
            eval_str("|s| > 0 && s[0] == 1", &e),
            Ok(ConcreteValue::Bool(false))
        );
        assert_eq!(
            eval_str("|s| == 0 || s[0] == 1", &e),
            Ok(ConcreteValue::Bool(true))
        );
        assert_eq!(
            eval_str("|s| > 0 ==> s[0] == 1", &e),
            Ok(ConcreteValue::Bool(true))
        );
        // <== evaluates its right operand first
        assert_eq!(
            eval_str("s[0] == 1 <== |s| > 0", &e),
            Ok(ConcreteValue::Bool(true))
        );
    }

    #[test]
    fn slices_views_arrays_as_sequences() {
        let e = env(&[("a", ConcreteValue::array_of(&[1, 2, 3, 4]))]);
        assert_eq!(
            eval_str("a[..a.Length] == [1, 2, 3, 4]", &e),
            Ok(ConcreteValue::Bool(true))
        );
        assert_eq!(
            eval_str("a[1..3] == [2, 3]", &e),
            Ok(ConcreteValue::Bool(true))
        );
        assert_eq!(
            eval_str("a[2..] == [3, 4]", &e),
            Ok(ConcreteValue::Bool(true))
        );
        assert!(matches!(
            eval_str("a[..5] == []", &e),
            Err(EvalError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn recursive_helper_counts_within_depth() {
        let json_sig =
            parse_signature("method countPositive (arr:array<int>) returns (count:int)").unwrap();
        let src = r#"
function countTo(a: array<int>, n: int): int
  reads a
  decreases n
{ if n == 0 then 0 else countTo(a, n - 1) + (if a[n - 1] > 0 then 1 else 0) }

method countPositive(a: array<int>) returns (count: int)
  ensures count == countTo(a, a.Length)
"#;
        let (sig, spec) = parse_spec(src, &json_sig).unwrap();
        let xs: Vec<i64> = (0..500).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let expected = xs.iter().filter(|&&v| v > 0).count() as i64;
        let e = Environment::for_signature(
            &sig,
            &[ConcreteValue::array_of(&xs)],
            &[ConcreteValue::int(expected)],
        )
        .unwrap();
        assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(true));
        let wrong = Environment::for_signature(
            &sig,
            &[ConcreteValue::array_of(&xs)],
            &[ConcreteValue::int(expected + 1)],
        )
        .unwrap();
        assert_eq!(eval_spec(&spec, &wrong, &EvalLimits::default()), Ok(false));
    }

    #[test]
    fn recursion_limit_is_diagnosed() {
        let json_sig = parse_signature("method f (n:int) returns (r:int)").unwrap();
        let src = r#"
function spin(n: int): int { if n == 0 then 0 else spin(n - 1) }
method f(n: int) returns (r: int)
  ensures r == spin(n)
"#;
        let (sig, spec) = parse_spec(src, &json_sig).unwrap();
        let e = Environment::for_signature(
            &sig,
            &[ConcreteValue::int(100)],
            &[ConcreteValue::int(0)],
        )
        .unwrap();
        let tight = EvalLimits {
            max_recursion_depth: 10,
            ..Default::default()
        };
        assert!(matches!(
            eval_spec(&spec, &e, &tight),
            Err(EvalError::RecursionLimit { .. })
        ));
        assert_eq!(eval_spec(&spec, &e, &EvalLimits::default()), Ok(true));
    }

    #[test]
    fn requires_violations_are_reported_not_verdicts() {
        let json_sig = parse_signature("method f (x:int) returns (r:int)").unwrap();
        let src = "method f(x: int) returns (r: int)\n  requires x > 0\n  ensures r == x\n";
        let (sig, spec) = parse_spec(src, &json_sig).unwrap();
        let bad = Environment::for_inputs(&sig, &[ConcreteValue::int(-1)]).unwrap();
        let violations = check_requires(&spec, &bad, &EvalLimits::default());
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].clause, "x > 0");
        let good = Environment::for_inputs(&sig, &[ConcreteValue::int(2)]).unwrap();
        assert!(check_requires(&spec, &good, &EvalLimits::default()).is_empty());
    }

    #[test]
    fn conjunction_splits_like_separate_specs() {
        // eval_spec(e1 && e2 as two clauses) == eval(e1) && eval(e2)
        let json_sig = parse_signature("method f (x:int) returns (r:int)").unwrap();
        let both = "method f(x: int) returns (r: int)\n  ensures r >= x\n  ensures r % 2 == 0\n";
        let first = "method f(x: int) returns (r: int)\n  ensures r >= x\n";
        let second = "method f(x: int) returns (r: int)\n  ensures r % 2 == 0\n";
        for (x, r) in [(1i64, 4i64), (1, 3), (5, 2), (5, 4)] {
            let envs: Vec<(bool, bool, bool)> = vec![];
            let _ = envs;
            let mk = |src: &str| {
                let (sig, spec) = parse_spec(src, &json_sig).unwrap();
                let e = Environment::for_signature(
                    &sig,
                    &[ConcreteValue::int(x)],
                    &[ConcreteValue::int(r)],
                )
                .unwrap();
                eval_spec(&spec, &e, &EvalLimits::default()).unwrap()
            };
            assert_eq!(mk(both), mk(first) && mk(second), "x={x} r={r}");
        }
    }
}
