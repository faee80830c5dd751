//! Resolution and type checking for parsed spec files: every free
//! identifier must be a signature parameter, a bound quantifier variable,
//! or a defined helper; expressions must be well-typed under the five
//! supported types (quantifier variables are integers).

use crate::ast::{
    BinOp, Expr, ExprKind, FunctionDef, MethodSignature, Param, SpecUnit, UnOp,
};
use crate::parser::{ParseError, ParseErrorKind, SpecFile};
use crate::value::ValueType;
use std::collections::{BTreeMap, BTreeSet};

struct TypeEnv<'a> {
    vars: Vec<(String, ValueType)>,
    helpers: &'a BTreeMap<String, (Vec<Param>, ValueType)>,
}

impl TypeEnv<'_> {
    fn lookup(&self, name: &str) -> Option<ValueType> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }
}

/// Selects the method declaration that carries the candidate spec, checks
/// it is positionally compatible with the dataset signature, resolves and
/// typechecks every clause and helper, and returns the effective
/// signature (the spec file's own vocabulary) plus the SpecUnit.
pub fn build_spec_unit(
    file: &SpecFile,
    dataset_sig: &MethodSignature,
) -> Result<(MethodSignature, SpecUnit), ParseError> {
    let method = select_method(file, dataset_sig)?;
    let sig = &method.signature;

    check_positional_compat(dataset_sig, sig, method.span)?;

    if method.ensures.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            format!("method `{}` has no ensures clause", sig.name),
            method.span,
        ));
    }

    // helper table, duplicate and recursion checks
    let mut table: BTreeMap<String, (Vec<Param>, ValueType)> = BTreeMap::new();
    for h in &file.helpers {
        if table
            .insert(h.name.clone(), (h.params.clone(), h.return_type))
            .is_some()
        {
            return Err(ParseError::new(
                ParseErrorKind::Duplicate,
                format!("helper `{}`", h.name),
                h.span,
            ));
        }
    }
    check_helper_recursion(file)?;

    let mut helpers = Vec::new();
    for h in &file.helpers {
        let mut env = TypeEnv {
            vars: h.params.iter().map(|p| (p.name.clone(), p.ty)).collect(),
            helpers: &table,
        };
        let got = check_expr(&h.body, &mut env)?;
        if got != h.return_type {
            return Err(ParseError::new(
                ParseErrorKind::Type,
                format!(
                    "helper `{}` body has type {got}, declared {}",
                    h.name, h.return_type
                ),
                h.body.span,
            ));
        }
        let callees = called_helpers(&h.body);
        helpers.push(FunctionDef {
            name: h.name.clone(),
            params: h.params.clone(),
            return_type: h.return_type,
            body: h.body.clone(),
            is_recursive: callees.contains(&h.name),
            source: h.source.clone(),
        });
    }

    let all_params: Vec<(String, ValueType)> = sig
        .inputs
        .iter()
        .chain(sig.outputs.iter())
        .map(|p| (p.name.clone(), p.ty))
        .collect();
    for clause in &method.ensures {
        let mut env = TypeEnv {
            vars: all_params.clone(),
            helpers: &table,
        };
        expect_bool(&clause.expr, &mut env, "ensures")?;
    }
    // requires may only mention inputs
    let input_params: Vec<(String, ValueType)> = sig
        .inputs
        .iter()
        .map(|p| (p.name.clone(), p.ty))
        .collect();
    for clause in &method.requires {
        let mut env = TypeEnv {
            vars: input_params.clone(),
            helpers: &table,
        };
        expect_bool(&clause.expr, &mut env, "requires")?;
    }

    Ok((
        sig.clone(),
        SpecUnit {
            ensures: method.ensures.clone(),
            requires: method.requires.clone(),
            helpers,
        },
    ))
}

fn select_method<'a>(
    file: &'a SpecFile,
    dataset_sig: &MethodSignature,
) -> Result<&'a crate::parser::RawMethod, ParseError> {
    if let Some(m) = file
        .methods
        .iter()
        .find(|m| m.signature.name.eq_ignore_ascii_case(&dataset_sig.name))
    {
        return Ok(m);
    }
    match file.methods.len() {
        0 => Err(ParseError::new(
            ParseErrorKind::Unresolved,
            format!("no method declaration found for `{}`", dataset_sig.name),
            Default::default(),
        )),
        1 => Ok(&file.methods[0]),
        n => Err(ParseError::new(
            ParseErrorKind::Unresolved,
            format!(
                "{n} methods in spec source and none named `{}`",
                dataset_sig.name
            ),
            Default::default(),
        )),
    }
}

/// The spec file may rename parameters and swap array<int>/seq<int>
/// relative to the dataset signature; arity and scalar types must agree.
fn check_positional_compat(
    dataset_sig: &MethodSignature,
    spec_sig: &MethodSignature,
    span: crate::ast::Span,
) -> Result<(), ParseError> {
    let compat = |a: ValueType, b: ValueType| a == b || (a.is_collection() && b.is_collection());
    if dataset_sig.inputs.len() != spec_sig.inputs.len()
        || dataset_sig.outputs.len() != spec_sig.outputs.len()
    {
        return Err(ParseError::new(
            ParseErrorKind::Type,
            format!(
                "signature arity mismatch: dataset {}({} in, {} out) vs spec {}({} in, {} out)",
                dataset_sig.name,
                dataset_sig.inputs.len(),
                dataset_sig.outputs.len(),
                spec_sig.name,
                spec_sig.inputs.len(),
                spec_sig.outputs.len()
            ),
            span,
        ));
    }
    for (d, s) in dataset_sig
        .inputs
        .iter()
        .zip(&spec_sig.inputs)
        .chain(dataset_sig.outputs.iter().zip(&spec_sig.outputs))
    {
        if !compat(d.ty, s.ty) {
            return Err(ParseError::new(
                ParseErrorKind::Type,
                format!(
                    "parameter `{}`: dataset type {} is incompatible with spec type {} (`{}`)",
                    d.name, d.ty, s.ty, s.name
                ),
                span,
            ));
        }
    }
    Ok(())
}

/// Helpers may be self-recursive; recursion through other helpers must be
/// acyclic (mutual recursion is rejected).
fn check_helper_recursion(file: &SpecFile) -> Result<(), ParseError> {
    let names: BTreeSet<&str> = file.helpers.iter().map(|h| h.name.as_str()).collect();
    let deps: BTreeMap<&str, BTreeSet<String>> = file
        .helpers
        .iter()
        .map(|h| {
            let calls: BTreeSet<String> = called_helpers(&h.body)
                .into_iter()
                .filter(|c| names.contains(c.as_str()) && c != &h.name)
                .collect();
            (h.name.as_str(), calls)
        })
        .collect();
    // Kahn's algorithm over the cross-helper edges
    let mut indegree: BTreeMap<&str, usize> = names.iter().map(|n| (*n, 0)).collect();
    for callees in deps.values() {
        for c in callees {
            *indegree.get_mut(c.as_str()).unwrap() += 1;
        }
    }
    let mut queue: Vec<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut seen = 0usize;
    while let Some(n) = queue.pop() {
        seen += 1;
        for c in &deps[n] {
            let d = indegree.get_mut(c.as_str()).unwrap();
            *d -= 1;
            if *d == 0 {
                queue.push(c.as_str());
            }
        }
    }
    if seen != names.len() {
        let cyclic: Vec<&str> = indegree
            .iter()
            .filter(|(_, d)| **d > 0)
            .map(|(n, _)| *n)
            .collect();
        let h = file
            .helpers
            .iter()
            .find(|h| cyclic.contains(&h.name.as_str()))
            .unwrap();
        return Err(ParseError::new(
            ParseErrorKind::UnsupportedConstruct,
            format!("mutual recursion between helpers ({})", cyclic.join(", ")),
            h.span,
        ));
    }
    Ok(())
}

fn called_helpers(expr: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(e: &Expr, out: &mut BTreeSet<String>) {
        match &e.kind {
            ExprKind::Call(name, args) => {
                out.insert(name.clone());
                for a in args {
                    walk(a, out);
                }
            }
            ExprKind::SeqLit(es) => es.iter().for_each(|e| walk(e, out)),
            ExprKind::Unary(_, e1) => walk(e1, out),
            ExprKind::Binary(_, a, b) => {
                walk(a, out);
                walk(b, out);
            }
            ExprKind::Index(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            ExprKind::Slice { target, lo, hi } => {
                walk(target, out);
                if let Some(lo) = lo {
                    walk(lo, out);
                }
                if let Some(hi) = hi {
                    walk(hi, out);
                }
            }
            ExprKind::Length(e1) | ExprKind::Cardinality(e1) => walk(e1, out),
            ExprKind::Quantifier { body, .. } => walk(body, out),
            ExprKind::Ite {
                cond,
                then_branch,
                else_branch,
            } => {
                walk(cond, out);
                walk(then_branch, out);
                walk(else_branch, out);
            }
            _ => {}
        }
    }
    walk(expr, &mut out);
    out
}

fn expect_bool(expr: &Expr, env: &mut TypeEnv, what: &str) -> Result<(), ParseError> {
    let got = check_expr(expr, env)?;
    if got != ValueType::Bool {
        return Err(ParseError::new(
            ParseErrorKind::Type,
            format!("{what} clause has type {got}, expected bool"),
            expr.span,
        ));
    }
    Ok(())
}

fn check_expr(expr: &Expr, env: &mut TypeEnv) -> Result<ValueType, ParseError> {
    let err = |kind, msg: String| Err(ParseError::new(kind, msg, expr.span));
    match &expr.kind {
        ExprKind::IntLit(_) => Ok(ValueType::Int),
        ExprKind::BoolLit(_) => Ok(ValueType::Bool),
        ExprKind::StrLit(_) => Ok(ValueType::Str),
        ExprKind::SeqLit(es) => {
            for e in es {
                let t = check_expr(e, env)?;
                if t != ValueType::Int {
                    return Err(ParseError::new(
                        ParseErrorKind::Type,
                        format!("sequence display element has type {t}, expected int"),
                        e.span,
                    ));
                }
            }
            Ok(ValueType::SeqInt)
        }
        ExprKind::Var(name) => match env.lookup(name) {
            Some(t) => Ok(t),
            None => {
                if env.helpers.contains_key(name) {
                    err(
                        ParseErrorKind::Type,
                        format!("helper `{name}` used as a value"),
                    )
                } else {
                    err(ParseErrorKind::Unresolved, format!("`{name}`"))
                }
            }
        },
        ExprKind::Unary(UnOp::Not, inner) => {
            let t = check_expr(inner, env)?;
            if t != ValueType::Bool {
                return err(ParseErrorKind::Type, format!("! applied to {t}"));
            }
            Ok(ValueType::Bool)
        }
        ExprKind::Unary(UnOp::Neg, inner) => {
            let t = check_expr(inner, env)?;
            if t != ValueType::Int {
                return err(ParseErrorKind::Type, format!("unary - applied to {t}"));
            }
            Ok(ValueType::Int)
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let lt = check_expr(lhs, env)?;
            let rt = check_expr(rhs, env)?;
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    if lt != ValueType::Int || rt != ValueType::Int {
                        return err(
                            ParseErrorKind::Type,
                            format!("arithmetic {} on {lt} and {rt}", op.symbol()),
                        );
                    }
                    Ok(ValueType::Int)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    if lt != ValueType::Int || rt != ValueType::Int {
                        return err(
                            ParseErrorKind::Type,
                            format!("comparison {} on {lt} and {rt}", op.symbol()),
                        );
                    }
                    Ok(ValueType::Bool)
                }
                BinOp::Eq | BinOp::Neq => {
                    if lt != rt {
                        return err(
                            ParseErrorKind::Type,
                            format!("equality between {lt} and {rt}"),
                        );
                    }
                    if lt == ValueType::ArrayInt {
                        return err(
                            ParseErrorKind::UnsupportedConstruct,
                            "array reference equality (compare slices, e.g. a[..] == b[..])"
                                .to_string(),
                        );
                    }
                    Ok(ValueType::Bool)
                }
                BinOp::In | BinOp::NotIn => {
                    if lt != ValueType::Int || rt != ValueType::SeqInt {
                        return err(
                            ParseErrorKind::Type,
                            format!(
                                "membership needs int in seq<int>, got {lt} in {rt}{}",
                                if rt == ValueType::ArrayInt {
                                    " (slice the array: x in a[..])"
                                } else {
                                    ""
                                }
                            ),
                        );
                    }
                    Ok(ValueType::Bool)
                }
                BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Explies | BinOp::Iff => {
                    if lt != ValueType::Bool || rt != ValueType::Bool {
                        return err(
                            ParseErrorKind::Type,
                            format!("connective {} on {lt} and {rt}", op.symbol()),
                        );
                    }
                    Ok(ValueType::Bool)
                }
            }
        }
        ExprKind::Index(target, idx) => {
            let tt = check_expr(target, env)?;
            let it = check_expr(idx, env)?;
            if it != ValueType::Int {
                return err(ParseErrorKind::Type, format!("index has type {it}"));
            }
            match tt {
                ValueType::ArrayInt | ValueType::SeqInt => Ok(ValueType::Int),
                ValueType::Str => err(
                    ParseErrorKind::UnsupportedConstruct,
                    "string indexing (no char type)".to_string(),
                ),
                other => err(ParseErrorKind::Type, format!("indexing into {other}")),
            }
        }
        ExprKind::Slice { target, lo, hi } => {
            let tt = check_expr(target, env)?;
            if !tt.is_collection() {
                return err(ParseErrorKind::Type, format!("slicing {tt}"));
            }
            for bound in [lo, hi].into_iter().flatten() {
                let bt = check_expr(bound, env)?;
                if bt != ValueType::Int {
                    return err(ParseErrorKind::Type, format!("slice bound has type {bt}"));
                }
            }
            Ok(ValueType::SeqInt)
        }
        ExprKind::Length(target) => {
            let tt = check_expr(target, env)?;
            if tt != ValueType::ArrayInt {
                return err(
                    ParseErrorKind::Type,
                    format!(".Length on {tt} (use |s| for sequences)"),
                );
            }
            Ok(ValueType::Int)
        }
        ExprKind::Cardinality(target) => {
            let tt = check_expr(target, env)?;
            match tt {
                ValueType::SeqInt | ValueType::Str => Ok(ValueType::Int),
                ValueType::ArrayInt => err(
                    ParseErrorKind::Type,
                    "|a| on array<int> (use a.Length)".to_string(),
                ),
                other => err(ParseErrorKind::Type, format!("|..| on {other}")),
            }
        }
        ExprKind::Call(name, args) => {
            let (params, ret) = match env.helpers.get(name) {
                Some(sig) => sig.clone(),
                None => {
                    return err(
                        ParseErrorKind::Unresolved,
                        format!("helper `{name}` is not defined"),
                    )
                }
            };
            if args.len() != params.len() {
                return err(
                    ParseErrorKind::Type,
                    format!(
                        "helper `{name}` takes {} argument(s), got {}",
                        params.len(),
                        args.len()
                    ),
                );
            }
            for (a, p) in args.iter().zip(&params) {
                let at = check_expr(a, env)?;
                if at != p.ty {
                    return Err(ParseError::new(
                        ParseErrorKind::Type,
                        format!(
                            "argument `{}` of helper `{name}` has type {at}, declared {}",
                            p.name, p.ty
                        ),
                        a.span,
                    ));
                }
            }
            Ok(ret)
        }
        ExprKind::Quantifier { vars, body, .. } => {
            let n = env.vars.len();
            for v in vars {
                env.vars.push((v.clone(), ValueType::Int));
            }
            let bt = check_expr(body, env)?;
            env.vars.truncate(n);
            if bt != ValueType::Bool {
                return err(ParseErrorKind::Type, format!("quantifier body has type {bt}"));
            }
            Ok(ValueType::Bool)
        }
        ExprKind::Ite {
            cond,
            then_branch,
            else_branch,
        } => {
            let ct = check_expr(cond, env)?;
            if ct != ValueType::Bool {
                return err(ParseErrorKind::Type, format!("if condition has type {ct}"));
            }
            let tt = check_expr(then_branch, env)?;
            let et = check_expr(else_branch, env)?;
            if tt != et {
                return err(
                    ParseErrorKind::Type,
                    format!("if branches have types {tt} and {et}"),
                );
            }
            Ok(tt)
        }
    }
}

/// Convenience wrapper: parse a spec source and build the SpecUnit for the
/// given dataset signature.
pub fn parse_spec(
    source: &str,
    dataset_sig: &MethodSignature,
) -> Result<(MethodSignature, SpecUnit), ParseError> {
    let file = crate::parser::parse_spec_source(source)?;
    build_spec_unit(&file, dataset_sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_signature;

    const TASK2_JSON_SIG: &str =
        "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)";

    const TASK2_SPEC: &str = r#"
predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result ==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;

    #[test]
    fn builds_shared_elements_spec_unit() {
        let json_sig = parse_signature(TASK2_JSON_SIG).unwrap();
        let (sig, spec) = parse_spec(TASK2_SPEC, &json_sig).unwrap();
        assert_eq!(sig.name, "SharedElements");
        assert_eq!(sig.outputs[0].ty, ValueType::SeqInt);
        assert_eq!(spec.ensures.len(), 2);
        assert_eq!(spec.helpers.len(), 1);
        assert!(!spec.helpers[0].is_recursive);
    }

    #[test]
    fn vacuous_spec_has_one_ensures_no_helpers() {
        let json_sig = parse_signature("method anyValue (x:int) returns (r:int)").unwrap();
        let src = "method anyValue(x: int) returns (r: int)\n  ensures true\n";
        let (_, spec) = parse_spec(src, &json_sig).unwrap();
        assert_eq!(spec.ensures.len(), 1);
        assert!(spec.helpers.is_empty());
    }

    #[test]
    fn undefined_helper_is_unresolved() {
        let json_sig = parse_signature("method f (a:array<int>) returns (r:int)").unwrap();
        let src = "method f(a: array<int>) returns (r: int)\n  ensures Foo(a)\n";
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unresolved);
        assert!(err.msg.contains("Foo"));
    }

    #[test]
    fn unknown_variable_is_unresolved() {
        let json_sig = parse_signature("method f (x:int) returns (r:int)").unwrap();
        let src = "method f(x: int) returns (r: int)\n  ensures r == z\n";
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unresolved);
    }

    #[test]
    fn requires_may_not_mention_outputs() {
        let json_sig = parse_signature("method f (x:int) returns (r:int)").unwrap();
        let src = "method f(x: int) returns (r: int)\n  requires r > 0\n  ensures true\n";
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unresolved);
    }

    #[test]
    fn recursive_helper_is_marked() {
        let json_sig = parse_signature("method countPositive (arr:array<int>) returns (count:int)")
            .unwrap();
        let src = r#"
function countTo(a: array<int>, n: int): int
  reads a
  requires 0 <= n <= a.Length
  decreases n
{ if n == 0 then 0 else countTo(a, n - 1) + (if a[n - 1] > 0 then 1 else 0) }

method countPositive(a: array<int>) returns (count: int)
  ensures count == countTo(a, a.Length)
"#;
        let (_, spec) = parse_spec(src, &json_sig).unwrap();
        assert!(spec.helpers[0].is_recursive);
    }

    #[test]
    fn mutual_recursion_is_rejected() {
        let json_sig = parse_signature("method f (x:int) returns (r:bool)").unwrap();
        let src = r#"
predicate Even(n: int) { if n == 0 then true else Odd(n - 1) }
predicate Odd(n: int) { if n == 0 then false else Even(n - 1) }
method f(x: int) returns (r: bool)
  ensures r == Even(x)
"#;
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnsupportedConstruct);
        assert!(err.msg.contains("mutual recursion"));
    }

    #[test]
    fn arity_mismatch_with_dataset_signature() {
        let json_sig = parse_signature("method f (x:int, y:int) returns (r:int)").unwrap();
        let src = "method f(x: int) returns (r: int)\n  ensures r == x\n";
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Type);
        assert!(err.msg.contains("arity"));
    }

    #[test]
    fn ill_typed_clause_is_rejected() {
        let json_sig = parse_signature("method f (x:int) returns (r:int)").unwrap();
        let src = "method f(x: int) returns (r: int)\n  ensures r + true == 1\n";
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Type);
    }

    #[test]
    fn membership_on_array_suggests_slice() {
        let json_sig = parse_signature("method f (a:array<int>) returns (r:bool)").unwrap();
        let src = "method f(a: array<int>) returns (r: bool)\n  ensures r ==> 1 in a\n";
        let err = parse_spec(src, &json_sig).unwrap_err();
        assert!(err.msg.contains("slice"), "{}", err.msg);
    }
}
