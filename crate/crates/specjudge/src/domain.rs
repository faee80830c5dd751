//! Finite domain derivation for bounded quantifiers.
//!
//! Three strategies, tried in order per bound variable:
//!
//! 1. **Intervals.** Guard-position atoms of the forms `lo <= v`, `lo < v`,
//!    `v <= hi`, `v < hi`, `v == c` with concrete-evaluable endpoints give an
//!    inclusive interval. Endpoints may also be *other* bound variables of
//!    the same quantifier (`0 <= i < j < |result|`); a small fixpoint
//!    propagates bounds through such links. Guard position means the
//!    antecedent chain of a `forall` body (`A ==> ...`) or the top-level
//!    conjuncts of an `exists` body — exactly the positions whose atoms are
//!    necessary for a tuple to matter, so enumerating the resulting box and
//!    evaluating the full body per tuple is exact.
//! 2. **Membership.** A guard-position atom `v in s` with `s`
//!    concrete-evaluable gives the element list directly.
//! 3. **Scoped-value universe.** For a single-variable quantifier whose
//!    body provably cannot depend on values outside the scope (checked by
//!    evaluating the body with the variable bound to a symbolic
//!    "outside all scoped values" integer), the domain is the union of all
//!    elements of in-scope collections, all in-scope integer scalars, and
//!    all integer literals of the spec. This covers bodies like
//!    `x in result <==> (InArray(a, x) && InArray(b, x))` where no
//!    implication antecedent exists: any x outside the universe makes every
//!    membership and every equality-with-a-scoped-value false, so the body
//!    is vacuously true (forall) or false (exists) there.
//!
//! Anything else is an `UnboundedQuantifier` error rather than a guess.

use crate::ast::{BinOp, Expr, ExprKind, FunctionDef, QuantKind, Span, UnOp};
use crate::eval::{Environment, EvalError, EvalLimits, Evaluator, Scope};
use crate::value::ConcreteValue;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;

pub(crate) fn eval_quantifier(
    ev: &mut Evaluator,
    kind: QuantKind,
    vars: &[String],
    body: &Expr,
    span: Span,
    scope: &mut Scope,
) -> Result<ConcreteValue, EvalError> {
    let domains = var_domains(ev, kind, vars, body, span, scope)?;
    let mut result = kind == QuantKind::Forall;
    let mut first_err: Option<EvalError> = None;

    // odometer over the per-variable lists; every tuple is evaluated so
    // that errors in the domain surface instead of being masked
    let sizes: Vec<usize> = domains.iter().map(|d| d.len()).collect();
    if sizes.iter().any(|&s| s == 0) {
        return Ok(ConcreteValue::Bool(result));
    }
    let mut idx = vec![0usize; domains.len()];
    'outer: loop {
        let base = scope.len();
        for (k, v) in vars.iter().enumerate() {
            scope.push((v.clone(), ConcreteValue::Int(domains[k][idx[k]].clone())));
        }
        match ev.eval_bool(body, scope) {
            Ok(b) => match kind {
                QuantKind::Forall => result &= b,
                QuantKind::Exists => result |= b,
            },
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
        scope.truncate(base);

        let mut k = domains.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(ConcreteValue::Bool(result)),
    }
}

/// The exact finite domain of a quantifier as a list of integer tuples
/// (Cartesian product across bound variables), capped by
/// `limits.max_quantifier_domain`.
pub fn bound_quantifier_domain(
    quantifier: &Expr,
    env: &Environment,
    helpers: &[FunctionDef],
    limits: &EvalLimits,
) -> Result<Vec<Vec<BigInt>>, EvalError> {
    let (kind, vars, body, span) = match &quantifier.kind {
        ExprKind::Quantifier { kind, vars, body } => (*kind, vars, body, quantifier.span),
        _ => {
            return Err(EvalError::TypeError {
                msg: "not a quantifier".to_string(),
                span: quantifier.span,
            })
        }
    };
    let mut scope: Scope = env.iter().map(|(n, v)| (n.clone(), v.clone())).collect();
    let mut ev = Evaluator::new(helpers, limits);
    let domains = var_domains(&mut ev, kind, vars, body, span, &mut scope)?;
    let mut tuples = vec![Vec::new()];
    for d in &domains {
        let mut next = Vec::with_capacity(tuples.len() * d.len());
        for t in &tuples {
            for v in d {
                let mut t2 = t.clone();
                t2.push(v.clone());
                next.push(t2);
            }
        }
        tuples = next;
    }
    if domains.iter().any(|d| d.is_empty()) {
        tuples.clear();
    }
    Ok(tuples)
}

#[derive(Debug, Default, Clone)]
struct VarInfo {
    lo: Option<BigInt>,
    hi: Option<BigInt>,
    elems: Option<BTreeSet<BigInt>>,
}

/// `v <op> w` link between two bound variables; `strict` for `<`/`>` after
/// orienting as upper/lower.
struct VarLink {
    var: usize,
    other: usize,
    upper: bool,
    strict: bool,
}

fn var_domains(
    ev: &mut Evaluator,
    kind: QuantKind,
    vars: &[String],
    body: &Expr,
    span: Span,
    scope: &mut Scope,
) -> Result<Vec<Vec<BigInt>>, EvalError> {
    let atoms = guard_atoms(kind, body);
    let mut infos = vec![VarInfo::default(); vars.len()];
    let mut links: Vec<VarLink> = Vec::new();

    let var_index = |e: &Expr| -> Option<usize> {
        if let ExprKind::Var(n) = &e.kind {
            vars.iter().position(|v| v == n)
        } else {
            None
        }
    };
    let mentions_bound = |e: &Expr| -> bool {
        crate::ast::free_vars(e)
            .iter()
            .any(|n| vars.iter().any(|v| v == n))
    };

    for atom in atoms {
        if let ExprKind::Binary(op, lhs, rhs) = &atom.kind {
            match op {
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq => {
                    // orient both ways as `v OP other`
                    let forms = [
                        (var_index(lhs), rhs, *op),
                        (var_index(rhs), lhs, flip(*op)),
                    ];
                    for (vi, other, op) in forms {
                        let Some(vi) = vi else { continue };
                        if let Some(wi) = var_index(other) {
                            match op {
                                BinOp::Lt => links.push(VarLink {
                                    var: vi,
                                    other: wi,
                                    upper: true,
                                    strict: true,
                                }),
                                BinOp::Le => links.push(VarLink {
                                    var: vi,
                                    other: wi,
                                    upper: true,
                                    strict: false,
                                }),
                                BinOp::Gt => links.push(VarLink {
                                    var: vi,
                                    other: wi,
                                    upper: false,
                                    strict: true,
                                }),
                                BinOp::Ge => links.push(VarLink {
                                    var: vi,
                                    other: wi,
                                    upper: false,
                                    strict: false,
                                }),
                                BinOp::Eq => {
                                    links.push(VarLink {
                                        var: vi,
                                        other: wi,
                                        upper: true,
                                        strict: false,
                                    });
                                    links.push(VarLink {
                                        var: vi,
                                        other: wi,
                                        upper: false,
                                        strict: false,
                                    });
                                }
                                _ => {}
                            }
                        } else if !mentions_bound(other) {
                            let c = ev.eval_int(other, scope)?;
                            match op {
                                BinOp::Lt => tighten_hi(&mut infos[vi], &(c - BigInt::one())),
                                BinOp::Le => tighten_hi(&mut infos[vi], &c),
                                BinOp::Gt => tighten_lo(&mut infos[vi], &(c + BigInt::one())),
                                BinOp::Ge => tighten_lo(&mut infos[vi], &c),
                                BinOp::Eq => {
                                    tighten_lo(&mut infos[vi], &c);
                                    tighten_hi(&mut infos[vi], &c);
                                }
                                _ => {}
                            }
                        }
                    }
                }
                BinOp::In => {
                    if let Some(vi) = var_index(lhs) {
                        if !mentions_bound(rhs) {
                            if let ConcreteValue::SeqInt(xs) | ConcreteValue::ArrayInt(xs) =
                                ev.eval(rhs, scope)?
                            {
                                let set: BTreeSet<BigInt> = xs.into_iter().collect();
                                infos[vi].elems = Some(match infos[vi].elems.take() {
                                    None => set,
                                    Some(prev) => prev.intersection(&set).cloned().collect(),
                                });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }

    for info in infos.iter_mut() {
        if let Some(elems) = &info.elems {
            let bounds = (elems.iter().next().cloned(), elems.iter().last().cloned());
            if let (Some(min), Some(max)) = bounds {
                tighten_lo(info, &min);
                tighten_hi(info, &max);
            }
        }
    }

    // propagate bounds through var-to-var links to a fixpoint
    for _ in 0..=vars.len() {
        let snapshot = infos.clone();
        for link in &links {
            if link.upper {
                if let Some(hi) = snapshot[link.other].hi.clone() {
                    let hi = if link.strict { hi - BigInt::one() } else { hi };
                    tighten_hi(&mut infos[link.var], &hi);
                }
            } else if let Some(lo) = snapshot[link.other].lo.clone() {
                let lo = if link.strict { lo + BigInt::one() } else { lo };
                tighten_lo(&mut infos[link.var], &lo);
            }
        }
    }

    // finalize sizes, falling back to the scoped universe for a single
    // unbounded variable
    let mut domains: Vec<Vec<BigInt>> = Vec::with_capacity(vars.len());
    let limit = ev.limits.max_quantifier_domain;
    let mut total = BigInt::one();
    for (k, info) in infos.iter().enumerate() {
        let dom: Vec<BigInt> = if let Some(elems) = &info.elems {
            elems
                .iter()
                .filter(|x| {
                    info.lo.as_ref().map_or(true, |lo| *x >= lo)
                        && info.hi.as_ref().map_or(true, |hi| *x <= hi)
                })
                .cloned()
                .collect()
        } else if let (Some(lo), Some(hi)) = (&info.lo, &info.hi) {
            if hi < lo {
                Vec::new()
            } else {
                let size = hi - lo + BigInt::one();
                if size > BigInt::from(limit) {
                    return Err(EvalError::QuantifierDomainTooLarge {
                        size,
                        limit,
                        span,
                    });
                }
                let n = size.to_usize().unwrap();
                let mut xs = Vec::with_capacity(n);
                let mut cur = lo.clone();
                for _ in 0..n {
                    xs.push(cur.clone());
                    cur += BigInt::one();
                }
                xs
            }
        } else if vars.len() == 1 {
            let universe = scoped_universe(scope, body, ev.helpers);
            if outside_is_vacuous(ev, kind, &vars[k], body, scope, &universe) {
                universe.into_iter().collect()
            } else {
                return Err(EvalError::UnboundedQuantifier {
                    var: vars[k].clone(),
                    span,
                });
            }
        } else {
            return Err(EvalError::UnboundedQuantifier {
                var: vars[k].clone(),
                span,
            });
        };
        total *= BigInt::from(dom.len());
        domains.push(dom);
    }
    if total > BigInt::from(limit) {
        return Err(EvalError::QuantifierDomainTooLarge {
            size: total,
            limit,
            span,
        });
    }
    Ok(domains)
}

fn flip(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        other => other,
    }
}

fn tighten_lo(info: &mut VarInfo, candidate: &BigInt) {
    match &info.lo {
        Some(cur) if cur >= candidate => {}
        _ => info.lo = Some(candidate.clone()),
    }
}

fn tighten_hi(info: &mut VarInfo, candidate: &BigInt) {
    match &info.hi {
        Some(cur) if cur <= candidate => {}
        _ => info.hi = Some(candidate.clone()),
    }
}

/// Atoms in guard position: conjuncts of the antecedent chain for `forall`,
/// top-level conjuncts for `exists`. These are necessary conditions for a
/// tuple to affect the quantifier's value.
fn guard_atoms(kind: QuantKind, body: &Expr) -> Vec<&Expr> {
    let mut atoms = Vec::new();
    match kind {
        QuantKind::Forall => {
            let mut cur = body;
            while let ExprKind::Binary(BinOp::Implies, antecedent, consequent) = &cur.kind {
                flatten_and(antecedent, &mut atoms);
                cur = consequent;
            }
        }
        QuantKind::Exists => flatten_and(body, &mut atoms),
    }
    atoms
}

fn flatten_and<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    if let ExprKind::Binary(BinOp::And, lhs, rhs) = &e.kind {
        flatten_and(lhs, out);
        flatten_and(rhs, out);
    } else {
        out.push(e);
    }
}

// ---------------------------------------------------------------------------
// Scoped-value universe
// ---------------------------------------------------------------------------

/// All integers a quantified variable could meaningfully equal: elements of
/// every in-scope collection, every in-scope integer scalar, and every
/// integer literal in the body and helper bodies.
fn scoped_universe(scope: &Scope, body: &Expr, helpers: &[FunctionDef]) -> BTreeSet<BigInt> {
    let mut u = BTreeSet::new();
    for (_, v) in scope {
        match v {
            ConcreteValue::Int(n) => {
                u.insert(n.clone());
            }
            ConcreteValue::ArrayInt(xs) | ConcreteValue::SeqInt(xs) => {
                u.extend(xs.iter().cloned());
            }
            _ => {}
        }
    }
    collect_int_literals(body, &mut u);
    for h in helpers {
        collect_int_literals(&h.body, &mut u);
    }
    u
}

fn collect_int_literals(e: &Expr, out: &mut BTreeSet<BigInt>) {
    match &e.kind {
        ExprKind::IntLit(n) => {
            out.insert(n.clone());
        }
        ExprKind::Unary(UnOp::Neg, inner) => {
            if let ExprKind::IntLit(n) = &inner.kind {
                out.insert(-n.clone());
            } else {
                collect_int_literals(inner, out);
            }
        }
        ExprKind::Unary(_, inner) | ExprKind::Length(inner) | ExprKind::Cardinality(inner) => {
            collect_int_literals(inner, out)
        }
        ExprKind::SeqLit(es) => es.iter().for_each(|e| collect_int_literals(e, out)),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
            collect_int_literals(a, out);
            collect_int_literals(b, out);
        }
        ExprKind::Slice { target, lo, hi } => {
            collect_int_literals(target, out);
            if let Some(lo) = lo {
                collect_int_literals(lo, out);
            }
            if let Some(hi) = hi {
                collect_int_literals(hi, out);
            }
        }
        ExprKind::Call(_, args) => args.iter().for_each(|a| collect_int_literals(a, out)),
        ExprKind::Quantifier { body, .. } => collect_int_literals(body, out),
        ExprKind::Ite {
            cond,
            then_branch,
            else_branch,
        } => {
            collect_int_literals(cond, out);
            collect_int_literals(then_branch, out);
            collect_int_literals(else_branch, out);
        }
        _ => {}
    }
}

/// Abstract value for the outside test: a concrete value, the symbolic
/// "integer outside the universe", or unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
enum AbsVal {
    Val(ConcreteValue),
    Outside,
    Unknown,
}

type AbsScope = Vec<(String, AbsVal)>;

/// Decides whether the body is provably vacuous (true for `forall`, false
/// for `exists`) for every integer outside the universe, by abstractly
/// evaluating it with the variable bound to a symbolic outside value. The
/// abstract evaluation mirrors the concrete evaluator's short-circuit
/// order, so a definite result also implies the concrete evaluation cannot
/// error outside the universe.
fn outside_is_vacuous(
    ev: &Evaluator,
    kind: QuantKind,
    var: &str,
    body: &Expr,
    scope: &Scope,
    universe: &BTreeSet<BigInt>,
) -> bool {
    let mut abs_scope: AbsScope = scope
        .iter()
        .map(|(n, v)| (n.clone(), AbsVal::Val(v.clone())))
        .collect();
    abs_scope.push((var.to_string(), AbsVal::Outside));
    let mut abs = AbsEvaluator {
        helpers: ev.helpers,
        limits: ev.limits,
        universe,
        depth: 0,
    };
    let want = match kind {
        QuantKind::Forall => true,
        QuantKind::Exists => false,
    };
    abs.eval(body, &mut abs_scope) == AbsVal::Val(ConcreteValue::Bool(want))
}

struct AbsEvaluator<'a> {
    helpers: &'a [FunctionDef],
    limits: &'a EvalLimits,
    universe: &'a BTreeSet<BigInt>,
    depth: usize,
}

impl AbsEvaluator<'_> {
    fn eval(&mut self, expr: &Expr, scope: &mut AbsScope) -> AbsVal {
        match &expr.kind {
            ExprKind::IntLit(n) => AbsVal::Val(ConcreteValue::Int(n.clone())),
            ExprKind::BoolLit(b) => AbsVal::Val(ConcreteValue::Bool(*b)),
            ExprKind::StrLit(s) => AbsVal::Val(ConcreteValue::Str(s.clone())),
            ExprKind::SeqLit(es) => {
                let mut xs = Vec::with_capacity(es.len());
                for e in es {
                    match self.eval(e, scope) {
                        AbsVal::Val(ConcreteValue::Int(n)) => xs.push(n),
                        _ => return AbsVal::Unknown,
                    }
                }
                AbsVal::Val(ConcreteValue::SeqInt(xs))
            }
            ExprKind::Var(name) => scope
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .unwrap_or(AbsVal::Unknown),
            ExprKind::Unary(UnOp::Not, inner) => match self.eval(inner, scope) {
                AbsVal::Val(ConcreteValue::Bool(b)) => AbsVal::Val(ConcreteValue::Bool(!b)),
                _ => AbsVal::Unknown,
            },
            ExprKind::Unary(UnOp::Neg, inner) => match self.eval(inner, scope) {
                AbsVal::Val(ConcreteValue::Int(n)) => AbsVal::Val(ConcreteValue::Int(-n)),
                _ => AbsVal::Unknown,
            },
            ExprKind::Binary(op, lhs, rhs) => self.eval_binary(*op, lhs, rhs, scope),
            ExprKind::Index(target, idx) => {
                match (self.eval(target, scope), self.eval(idx, scope)) {
                    (
                        AbsVal::Val(ConcreteValue::ArrayInt(xs)),
                        AbsVal::Val(ConcreteValue::Int(i)),
                    )
                    | (
                        AbsVal::Val(ConcreteValue::SeqInt(xs)),
                        AbsVal::Val(ConcreteValue::Int(i)),
                    ) => match i.to_usize() {
                        Some(p) if p < xs.len() => AbsVal::Val(ConcreteValue::Int(xs[p].clone())),
                        _ => AbsVal::Unknown,
                    },
                    _ => AbsVal::Unknown,
                }
            }
            ExprKind::Slice { target, lo, hi } => {
                let xs = match self.eval(target, scope) {
                    AbsVal::Val(ConcreteValue::ArrayInt(xs))
                    | AbsVal::Val(ConcreteValue::SeqInt(xs)) => xs,
                    _ => return AbsVal::Unknown,
                };
                let lo_v = match lo {
                    None => BigInt::zero(),
                    Some(e) => match self.eval(e, scope) {
                        AbsVal::Val(ConcreteValue::Int(n)) => n,
                        _ => return AbsVal::Unknown,
                    },
                };
                let hi_v = match hi {
                    None => BigInt::from(xs.len()),
                    Some(e) => match self.eval(e, scope) {
                        AbsVal::Val(ConcreteValue::Int(n)) => n,
                        _ => return AbsVal::Unknown,
                    },
                };
                match (lo_v.to_usize(), hi_v.to_usize()) {
                    (Some(l), Some(h)) if l <= h && h <= xs.len() => {
                        AbsVal::Val(ConcreteValue::SeqInt(xs[l..h].to_vec()))
                    }
                    _ => AbsVal::Unknown,
                }
            }
            ExprKind::Length(target) => match self.eval(target, scope) {
                AbsVal::Val(ConcreteValue::ArrayInt(xs)) => {
                    AbsVal::Val(ConcreteValue::Int(BigInt::from(xs.len())))
                }
                _ => AbsVal::Unknown,
            },
            ExprKind::Cardinality(target) => match self.eval(target, scope) {
                AbsVal::Val(ConcreteValue::SeqInt(xs)) => {
                    AbsVal::Val(ConcreteValue::Int(BigInt::from(xs.len())))
                }
                AbsVal::Val(ConcreteValue::Str(s)) => {
                    AbsVal::Val(ConcreteValue::Int(BigInt::from(s.chars().count())))
                }
                _ => AbsVal::Unknown,
            },
            ExprKind::Call(name, args) => {
                let Some(def) = self.helpers.iter().find(|h| &h.name == name) else {
                    return AbsVal::Unknown;
                };
                if args.len() != def.params.len() {
                    return AbsVal::Unknown;
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, scope));
                }
                if self.depth >= self.limits.max_recursion_depth {
                    return AbsVal::Unknown;
                }
                let mut frame: AbsScope = def
                    .params
                    .iter()
                    .zip(vals)
                    .map(|(p, v)| (p.name.clone(), v))
                    .collect();
                self.depth += 1;
                let r = stacker::maybe_grow(256 * 1024, 16 * 1024 * 1024, || {
                    self.eval(&def.body, &mut frame)
                });
                self.depth -= 1;
                r
            }
            ExprKind::Quantifier { kind, vars, body } => {
                self.eval_quantifier(*kind, vars, body, scope)
            }
            ExprKind::Ite {
                cond,
                then_branch,
                else_branch,
            } => match self.eval(cond, scope) {
                AbsVal::Val(ConcreteValue::Bool(true)) => self.eval(then_branch, scope),
                AbsVal::Val(ConcreteValue::Bool(false)) => self.eval(else_branch, scope),
                _ => AbsVal::Unknown,
            },
        }
    }

    fn eval_binary(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr, scope: &mut AbsScope) -> AbsVal {
        use AbsVal::*;
        use ConcreteValue::*;
        match op {
            BinOp::And => match self.eval(lhs, scope) {
                Val(Bool(false)) => Val(Bool(false)),
                Val(Bool(true)) => self.bool_only(rhs, scope),
                _ => Unknown,
            },
            BinOp::Or => match self.eval(lhs, scope) {
                Val(Bool(true)) => Val(Bool(true)),
                Val(Bool(false)) => self.bool_only(rhs, scope),
                _ => Unknown,
            },
            BinOp::Implies => match self.eval(lhs, scope) {
                Val(Bool(false)) => Val(Bool(true)),
                Val(Bool(true)) => self.bool_only(rhs, scope),
                _ => Unknown,
            },
            BinOp::Explies => match self.eval(rhs, scope) {
                Val(Bool(false)) => Val(Bool(true)),
                Val(Bool(true)) => self.bool_only(lhs, scope),
                _ => Unknown,
            },
            BinOp::Iff => match (self.eval(lhs, scope), self.eval(rhs, scope)) {
                (Val(Bool(a)), Val(Bool(b))) => Val(Bool(a == b)),
                _ => Unknown,
            },
            BinOp::Eq | BinOp::Neq => {
                let l = self.eval(lhs, scope);
                let r = self.eval(rhs, scope);
                let eq = match (&l, &r) {
                    (Val(a), Val(b)) if a.value_type() == b.value_type() => Some(a == b),
                    (Outside, Outside) => Some(true),
                    (Outside, Val(Int(c))) | (Val(Int(c)), Outside) => {
                        if self.universe.contains(c) {
                            Some(false)
                        } else {
                            None
                        }
                    }
                    _ => None,
                };
                match eq {
                    Some(b) => Val(Bool(if op == BinOp::Eq { b } else { !b })),
                    None => Unknown,
                }
            }
            BinOp::In | BinOp::NotIn => {
                let l = self.eval(lhs, scope);
                let r = self.eval(rhs, scope);
                let contains = match (&l, &r) {
                    (Val(Int(x)), Val(SeqInt(xs))) => Some(xs.contains(x)),
                    (Outside, Val(SeqInt(xs))) => {
                        if xs.iter().all(|x| self.universe.contains(x)) {
                            Some(false)
                        } else {
                            None
                        }
                    }
                    _ => None,
                };
                match contains {
                    Some(b) => Val(Bool(if op == BinOp::In { b } else { !b })),
                    None => Unknown,
                }
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                match (self.eval(lhs, scope), self.eval(rhs, scope)) {
                    (Val(Int(a)), Val(Int(b))) => {
                        let v = match op {
                            BinOp::Lt => a < b,
                            BinOp::Le => a <= b,
                            BinOp::Gt => a > b,
                            BinOp::Ge => a >= b,
                            _ => unreachable!(),
                        };
                        Val(Bool(v))
                    }
                    _ => Unknown,
                }
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                match (self.eval(lhs, scope), self.eval(rhs, scope)) {
                    (Val(Int(a)), Val(Int(b))) => match op {
                        BinOp::Add => Val(Int(a + b)),
                        BinOp::Sub => Val(Int(a - b)),
                        BinOp::Mul => Val(Int(a * b)),
                        BinOp::Div | BinOp::Mod => {
                            match crate::eval::euclidean_divmod(&a, &b, Span::default()) {
                                Ok((q, m)) => Val(Int(if op == BinOp::Div { q } else { m })),
                                Err(_) => Unknown,
                            }
                        }
                        _ => unreachable!(),
                    },
                    _ => Unknown,
                }
            }
        }
    }

    fn bool_only(&mut self, e: &Expr, scope: &mut AbsScope) -> AbsVal {
        match self.eval(e, scope) {
            v @ AbsVal::Val(ConcreteValue::Bool(_)) => v,
            _ => AbsVal::Unknown,
        }
    }

    /// Nested quantifiers during the outside test: derive interval or
    /// membership domains whose endpoints are fully concrete in the
    /// abstract scope; anything else is Unknown.
    fn eval_quantifier(
        &mut self,
        kind: QuantKind,
        vars: &[String],
        body: &Expr,
        scope: &mut AbsScope,
    ) -> AbsVal {
        // reuse the concrete domain machinery over the Val-subset of scope;
        // if any binding the bounds depend on is abstract this fails to a
        // conservative Unknown
        let concrete: Scope = scope
            .iter()
            .filter_map(|(n, v)| match v {
                AbsVal::Val(c) => Some((n.clone(), c.clone())),
                _ => None,
            })
            .collect();
        let mut ev = Evaluator::new(self.helpers, self.limits);
        let mut probe = concrete.clone();
        let domains = match var_domains(
            &mut ev,
            kind,
            vars,
            body,
            Span::default(),
            &mut probe,
        ) {
            Ok(d) => d,
            Err(_) => return AbsVal::Unknown,
        };
        let sizes: Vec<usize> = domains.iter().map(|d| d.len()).collect();
        let mut result = kind == QuantKind::Forall;
        if sizes.iter().any(|&s| s == 0) {
            return AbsVal::Val(ConcreteValue::Bool(result));
        }
        let mut idx = vec![0usize; domains.len()];
        loop {
            let base = scope.len();
            for (k, v) in vars.iter().enumerate() {
                scope.push((
                    v.clone(),
                    AbsVal::Val(ConcreteValue::Int(domains[k][idx[k]].clone())),
                ));
            }
            let r = self.eval(body, scope);
            scope.truncate(base);
            match r {
                AbsVal::Val(ConcreteValue::Bool(b)) => match kind {
                    QuantKind::Forall => result &= b,
                    QuantKind::Exists => result |= b,
                },
                _ => return AbsVal::Unknown,
            }
            let mut k = domains.len();
            loop {
                if k == 0 {
                    return AbsVal::Val(ConcreteValue::Bool(result));
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_expr, eval_spec, Environment, EvalLimits};
    use crate::parser::{parse_expression, parse_signature};
    use crate::typecheck::parse_spec;

    fn env(pairs: &[(&str, ConcreteValue)]) -> Environment {
        let mut e = Environment::new();
        for (n, v) in pairs {
            e.bind(*n, v.clone());
        }
        e
    }

    fn eval_bool_str(src: &str, e: &Environment) -> Result<bool, EvalError> {
        let expr = parse_expression(src).unwrap();
        match eval_expr(&expr, e, &[], &EvalLimits::default())? {
            ConcreteValue::Bool(b) => Ok(b),
            other => panic!("expected bool, got {other:?}"),
        }
    }

    #[test]
    fn nonprime_quantifier_enumerates_up_to_n_minus_one() {
        let q = parse_expression("exists k :: 2 <= k < n && n % k == 0").unwrap();
        let e = env(&[("n", ConcreteValue::int(97))]);
        let domain =
            bound_quantifier_domain(&q, &e, &[], &EvalLimits::default()).unwrap();
        assert_eq!(domain.len(), 95);
        assert_eq!(domain[0], vec![BigInt::from(2)]);
        assert_eq!(domain[94], vec![BigInt::from(96)]);
        assert!(!eval_bool_str("exists k :: 2 <= k < n && n % k == 0", &e).unwrap());
        let e96 = env(&[("n", ConcreteValue::int(96))]);
        assert!(eval_bool_str("exists k :: 2 <= k < n && n % k == 0", &e96).unwrap());
    }

    #[test]
    fn nonprime_agrees_with_independent_enumeration() {
        // second, independent enumerator: plain Rust integers
        let is_composite = |n: i64| (2..n).any(|k| n % k == 0);
        for n in 2..200i64 {
            let e = env(&[("n", ConcreteValue::int(n))]);
            let got = eval_bool_str("exists k :: 2 <= k < n && n % k == 0", &e).unwrap();
            assert_eq!(got, is_composite(n), "n = {n}");
        }
    }

    #[test]
    fn explicit_range_forall_agrees_with_brute_force() {
        // naive full enumeration over the stated range, independent of the
        // domain-inference path
        let brute = |lo: i64, hi: i64, p: &dyn Fn(i64) -> bool| (lo..hi).all(p);
        let e = env(&[("n", ConcreteValue::int(2000))]);
        let got = eval_bool_str("forall i :: 0 <= i < n ==> i * i >= 0", &e).unwrap();
        assert_eq!(got, brute(0, 2000, &|i| i * i >= 0));
        let got = eval_bool_str("forall i :: 0 <= i < n ==> i % 7 != 3", &e).unwrap();
        assert_eq!(got, brute(0, 2000, &|i| i % 7 != 3));
    }

    #[test]
    fn membership_guard_bounds_domain() {
        let q = parse_expression("forall x :: x in s ==> x > 0").unwrap();
        let e = env(&[("s", ConcreteValue::seq_of(&[3, 1, 4]))]);
        let domain =
            bound_quantifier_domain(&q, &e, &[], &EvalLimits::default()).unwrap();
        let flat: Vec<BigInt> = domain.into_iter().map(|t| t[0].clone()).collect();
        assert_eq!(flat, vec![BigInt::from(1), BigInt::from(3), BigInt::from(4)]);
        assert!(eval_bool_str("forall x :: x in s ==> x > 0", &e).unwrap());
        assert!(!eval_bool_str("forall x :: x in s ==> x > 1", &e).unwrap());
    }

    #[test]
    fn two_variable_chain_gets_a_box() {
        let q = parse_expression("forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]")
            .unwrap();
        let e = env(&[("result", ConcreteValue::seq_of(&[4, 5, 6]))]);
        let domain = bound_quantifier_domain(&q, &e, &[], &EvalLimits::default()).unwrap();
        // i in [0, 1], j in [1, 2] after strict propagation
        assert_eq!(domain.len(), 4);
        assert!(eval_bool_str(
            "forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]",
            &e
        )
        .unwrap());
        let dup = env(&[("result", ConcreteValue::seq_of(&[4, 5, 4]))]);
        assert!(!eval_bool_str(
            "forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]",
            &dup
        )
        .unwrap());
    }

    #[test]
    fn missing_upper_bound_is_unbounded() {
        let e = env(&[]);
        let err = eval_bool_str("forall i :: 0 <= i", &e).unwrap_err();
        assert!(matches!(err, EvalError::UnboundedQuantifier { ref var, .. } if var == "i"));
        let err = eval_bool_str("forall i :: i > 0 ==> i >= 1", &e).unwrap_err();
        assert!(matches!(err, EvalError::UnboundedQuantifier { .. }));
    }

    #[test]
    fn oversized_domain_is_rejected() {
        let e = env(&[("n", ConcreteValue::int(10_000_000))]);
        let err = eval_bool_str("exists k :: 0 <= k < n && k % 3 == 0", &e).unwrap_err();
        assert!(matches!(err, EvalError::QuantifierDomainTooLarge { .. }));
    }

    #[test]
    fn equality_guard_pins_the_domain() {
        let e = env(&[("n", ConcreteValue::int(10_000_000))]);
        assert!(eval_bool_str("exists k :: 0 <= k < n && k == 1", &e).unwrap());
    }

    #[test]
    fn empty_interval_is_vacuous() {
        let e = env(&[("n", ConcreteValue::int(0))]);
        assert!(eval_bool_str("forall i :: 0 <= i < n ==> false", &e).unwrap());
        assert!(!eval_bool_str("exists i :: 0 <= i < n && true", &e).unwrap());
    }

    #[test]
    fn universe_rule_handles_iff_bodies() {
        // no implication antecedent: bounded by the scoped-value universe
        let json_sig = parse_signature(
            "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
        )
        .unwrap();
        let src = r#"
predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result <==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;
        let (sig, spec) = parse_spec(src, &json_sig).unwrap();
        let mk = |result: &[i64]| {
            Environment::for_signature(
                &sig,
                &[
                    ConcreteValue::array_of(&[3, 4, 5, 6]),
                    ConcreteValue::array_of(&[5, 7, 4, 10]),
                ],
                &[ConcreteValue::seq_of(result)],
            )
            .unwrap()
        };
        let limits = EvalLimits::default();
        // both orders of the two shared elements satisfy the precise spec
        assert_eq!(eval_spec(&spec, &mk(&[4, 5]), &limits), Ok(true));
        assert_eq!(eval_spec(&spec, &mk(&[5, 4]), &limits), Ok(true));
        // dropping a shared element now fails (unlike the ==> form)
        assert_eq!(eval_spec(&spec, &mk(&[4]), &limits), Ok(false));
        assert_eq!(eval_spec(&spec, &mk(&[5]), &limits), Ok(false));
        assert_eq!(eval_spec(&spec, &mk(&[4, 5, 3]), &limits), Ok(false));
        assert_eq!(eval_spec(&spec, &mk(&[9]), &limits), Ok(false));
        assert_eq!(eval_spec(&spec, &mk(&[4, 4]), &limits), Ok(false));
    }

    #[test]
    fn universe_rule_is_refused_when_body_escapes_the_fragment() {
        // a comparison on the bound variable outside any membership guard
        // cannot be decided by the universe
        let e = env(&[("s", ConcreteValue::seq_of(&[1, 2]))]);
        let err = eval_bool_str("forall x :: x in s || x > 3", &e).unwrap_err();
        assert!(matches!(err, EvalError::UnboundedQuantifier { .. }));
    }

    #[test]
    fn universe_includes_literals_for_equality_tests() {
        let e = env(&[("s", ConcreteValue::seq_of(&[7]))]);
        assert!(eval_bool_str("forall x :: x in s <==> x == 7", &e).unwrap());
        let e2 = env(&[("s", ConcreteValue::seq_of(&[3]))]);
        assert!(!eval_bool_str("forall x :: x in s <==> x == 7", &e2).unwrap());
    }

    #[test]
    fn quantifier_errors_are_not_masked_by_witnesses() {
        // k = 0 divides by zero even though k = 2 is a witness
        let e = env(&[("n", ConcreteValue::int(4))]);
        let err = eval_bool_str("exists k :: 0 <= k < n && n % k == 0", &e).unwrap_err();
        assert!(matches!(err, EvalError::DivisionByZero { .. }));
    }

    #[test]
    fn public_domain_op_rejects_non_quantifier() {
        let e = env(&[]);
        let expr = parse_expression("1 + 2").unwrap();
        assert!(bound_quantifier_domain(&expr, &e, &[], &EvalLimits::default()).is_err());
    }
}
