//! Emits self-contained Dafny programs encoding one triple per test or
//! mutant: helper definitions plus the method with its candidate ensures
//! clauses, whose body binds the concrete inputs (`assume {:axiom}` plus
//! redundant element-wise asserts that give the verifier quantifier
//! triggers) and assigns the expected or mutated outputs.
//!
//! A correctness harness and a completeness harness for the same test
//! differ only in the output-assignment literals, which is what makes a
//! verification failure on the mutant a trustworthy refutation.

use crate::ast::{pretty, substitute, Expr, ExprKind, Param, Span};
use crate::dataset::{TaskRecord, TestCase};
use crate::mutation::MutantCase;
use crate::value::{render_dafny_literal, ConcreteValue, ValueType};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HarnessKind {
    Correctness { test_id: String },
    Completeness { mutant_id: String },
    AlternateCheck { test_id: String },
}

impl HarnessKind {
    pub fn kind_name(&self) -> &'static str {
        match self {
            HarnessKind::Correctness { .. } => "correctness",
            HarnessKind::Completeness { .. } => "completeness",
            HarnessKind::AlternateCheck { .. } => "alternate",
        }
    }

    pub fn case_id(&self) -> &str {
        match self {
            HarnessKind::Correctness { test_id } | HarnessKind::AlternateCheck { test_id } => {
                test_id
            }
            HarnessKind::Completeness { mutant_id } => mutant_id,
        }
    }
}

/// A complete Dafny program for one check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Harness {
    pub kind: HarnessKind,
    pub task_id: String,
    pub source: String,
}

impl Harness {
    /// `<task_id>__<kind>__<id>` (the emitted file adds `.dfy`).
    pub fn file_stem(&self) -> String {
        format!(
            "{}__{}__{}",
            self.task_id,
            self.kind.kind_name(),
            self.kind.case_id()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("alternate check supports single-output methods only ({0} outputs)")]
    MultiOutput(usize),
    #[error("mutant `{0}` has no parent test in the task")]
    OrphanMutant(String),
}

/// Correctness harness: inputs constrained to the test's values, outputs
/// assigned the expected values; verification success means the spec is
/// consistent with the test.
pub fn gen_correctness_harness(task: &TaskRecord, test: &TestCase) -> Harness {
    Harness {
        kind: HarnessKind::Correctness {
            test_id: test.id.clone(),
        },
        task_id: task.task_id.clone(),
        source: triple_source(task, test, &test.expected),
    }
}

/// Completeness harness: identical construction with the mutated outputs;
/// verification failure means the spec refutes (kills) the mutant.
pub fn gen_completeness_harness(
    task: &TaskRecord,
    mutant: &MutantCase,
) -> Result<Harness, HarnessError> {
    let test = task
        .test(&mutant.parent_test_id)
        .ok_or_else(|| HarnessError::OrphanMutant(mutant.id.clone()))?;
    Ok(Harness {
        kind: HarnessKind::Completeness {
            mutant_id: mutant.id.clone(),
        },
        task_id: task.task_id.clone(),
        source: triple_source(task, test, &mutant.mutated_expected),
    })
}

/// Alternate diagnostic harness for `{x == i && spec(x, y)} skip {y == o}`:
/// inputs constrained, outputs havocked, each ensures clause assumed, then
/// output equality to the expected value asserted. This check fails for any
/// spec that admits more than one output for the inputs (including every
/// vacuous spec), which is the reason it is not used as the completeness
/// metric.
pub fn gen_alternate_harness(task: &TaskRecord, test: &TestCase) -> Result<Harness, HarnessError> {
    let sig = &task.signature;
    if sig.outputs.len() != 1 {
        return Err(HarnessError::MultiOutput(sig.outputs.len()));
    }
    let mut body = String::new();
    let locals = declare_input_locals(&mut body, sig, &test.inputs);
    let out = &sig.outputs[0];
    let expected = &test.expected[0];
    let expected_local = match out.ty {
        ValueType::ArrayInt => {
            let name = format!("{}_e", out.name);
            body.push_str(&format!(
                "  var {name} := {};\n",
                render_dafny_literal(expected, true)
            ));
            Some(name)
        }
        _ => None,
    };
    constrain_inputs(&mut body, sig, &test.inputs, &locals);
    body.push_str(&format!("  {} := *;\n", out.name));
    for clause in &task.spec.ensures {
        body.push_str(&format!("  assume {{:axiom}} {};\n", clause.source));
    }
    match &expected_local {
        Some(local) => body.push_str(&format!(
            "  assert {o}[..{o}.Length] == {local}[..{local}.Length];\n",
            o = out.name
        )),
        None => body.push_str(&format!(
            "  assert {} == {};\n",
            out.name,
            render_dafny_literal(expected, false)
        )),
    }

    let mut source = String::new();
    emit_helpers(&mut source, task);
    source.push_str(&format!(
        "method {}({}) returns ({})\n",
        sig.name,
        format_params(&sig.inputs),
        format_params(&sig.outputs)
    ));
    source.push_str("{\n");
    source.push_str(&body);
    source.push_str("}\n");
    Ok(Harness {
        kind: HarnessKind::AlternateCheck {
            test_id: test.id.clone(),
        },
        task_id: task.task_id.clone(),
        source,
    })
}

/// Shared emitter for correctness/completeness: the two differ only in the
/// `outputs` literals.
fn triple_source(task: &TaskRecord, test: &TestCase, outputs: &[ConcreteValue]) -> String {
    let sig = &task.signature;
    let mut source = String::new();
    emit_helpers(&mut source, task);

    source.push_str(&format!(
        "method {}({}) returns ({})\n",
        sig.name,
        format_params(&sig.inputs),
        format_params(&sig.outputs)
    ));
    for clause in &task.spec.requires {
        source.push_str(&format!("  requires {}\n", clause.source));
    }
    for clause in &task.spec.ensures {
        source.push_str(&format!("  ensures {}\n", clause.source));
    }
    source.push_str("{\n");

    let locals = declare_input_locals(&mut source, sig, &test.inputs);

    // requires clauses asserted against the concrete values, before the
    // input assumes (after them the assumes could make a violated requires
    // vacuously provable); a failing assert here points at the dataset
    if !task.spec.requires.is_empty() {
        let subst = substitution_map(sig, &test.inputs, &locals);
        for clause in &task.spec.requires {
            source.push_str(&format!(
                "  assert {};\n",
                pretty(&substitute(&clause.expr, &subst))
            ));
        }
    }

    constrain_inputs(&mut source, sig, &test.inputs, &locals);

    for (p, v) in sig.outputs.iter().zip(outputs) {
        source.push_str(&format!(
            "  {} := {};\n",
            p.name,
            render_dafny_literal(v, p.ty == ValueType::ArrayInt)
        ));
    }
    source.push_str("}\n");
    source
}

fn emit_helpers(source: &mut String, task: &TaskRecord) {
    for h in &task.spec.helpers {
        source.push_str(&h.source);
        source.push_str("\n\n");
    }
}

fn format_params(params: &[Param]) -> String {
    params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.ty.dafny_name()))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Fresh locals `<param>_h<k>` for every array/seq input, in input order;
/// returns the local name per input position (None for scalars).
fn declare_input_locals(
    source: &mut String,
    sig: &crate::ast::MethodSignature,
    inputs: &[ConcreteValue],
) -> Vec<Option<String>> {
    sig.inputs
        .iter()
        .zip(inputs)
        .enumerate()
        .map(|(k, (p, v))| {
            if p.ty.is_collection() {
                let name = format!("{}_h{k}", p.name);
                source.push_str(&format!(
                    "  var {name} := {};\n",
                    render_dafny_literal(v, p.ty == ValueType::ArrayInt)
                ));
                Some(name)
            } else {
                None
            }
        })
        .collect()
}

/// `assume {:axiom}` input constraints plus the redundant element-wise
/// trigger asserts (omitted for empty collections).
fn constrain_inputs(
    source: &mut String,
    sig: &crate::ast::MethodSignature,
    inputs: &[ConcreteValue],
    locals: &[Option<String>],
) {
    for ((p, v), local) in sig.inputs.iter().zip(inputs).zip(locals) {
        match (p.ty, local) {
            (ValueType::ArrayInt, Some(local)) => {
                source.push_str(&format!(
                    "  assume {{:axiom}} {p}[..{p}.Length] == {local}[..{local}.Length];\n",
                    p = p.name
                ));
                emit_element_asserts(source, &p.name, local, v);
            }
            (ValueType::SeqInt, Some(local)) => {
                source.push_str(&format!(
                    "  assume {{:axiom}} {} == {local};\n",
                    p.name
                ));
                emit_element_asserts(source, &p.name, local, v);
            }
            _ => {
                source.push_str(&format!(
                    "  assume {{:axiom}} {} == {};\n",
                    p.name,
                    render_dafny_literal(v, false)
                ));
            }
        }
    }
}

fn emit_element_asserts(source: &mut String, param: &str, local: &str, v: &ConcreteValue) {
    let n = v.as_collection().map_or(0, <[_]>::len);
    if n == 0 {
        return;
    }
    let conj = (0..n)
        .map(|i| format!("{param}[{i}] == {local}[{i}]"))
        .collect::<Vec<_>>()
        .join(" && ");
    source.push_str(&format!("  assert {conj};\n"));
}

/// Scalar params map to their literal, collection params to their fresh
/// local, for substituting into requires asserts.
fn substitution_map(
    sig: &crate::ast::MethodSignature,
    inputs: &[ConcreteValue],
    locals: &[Option<String>],
) -> HashMap<String, Expr> {
    let mut map = HashMap::new();
    for ((p, v), local) in sig.inputs.iter().zip(inputs).zip(locals) {
        let kind = match local {
            Some(name) => ExprKind::Var(name.clone()),
            None => match v {
                ConcreteValue::Bool(b) => ExprKind::BoolLit(*b),
                ConcreteValue::Int(n) => ExprKind::IntLit(n.clone()),
                ConcreteValue::Str(s) => ExprKind::StrLit(s.clone()),
                _ => unreachable!("collections always have locals"),
            },
        };
        map.insert(p.name.clone(), Expr::new(kind, Span::default()));
    }
    map
}

impl fmt::Display for Harness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_dataset, LoadedTask, MapSpecSource};
    use crate::mutation::{curated_mutants, MutationDescriptor};
    use std::collections::BTreeMap;

    const TASK2_SPEC: &str = r#"predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result ==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;

    fn task2() -> TaskRecord {
        let json = r#"{
  "2": {
    "task_description": "shared elements",
    "method_signature": "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
    "test_cases": {
      "test_1": "var a1:= new int[] [3, 4, 5, 6];\nvar a2:= new int[] [5, 7, 4, 10];\nvar e1:= new int[] [4, 5];\nvar res1:=similarElements(a1,a2);\nassert arrayEquals(res1,e1);"
    }
  }
}"#;
        let mut m = BTreeMap::new();
        m.insert("2".to_string(), TASK2_SPEC.to_string());
        let tasks = load_dataset(json, &MapSpecSource(m)).unwrap();
        match tasks.into_iter().next().unwrap() {
            LoadedTask::Parsed(t) => *t,
            LoadedTask::Unparsed { diagnostic, .. } => panic!("{diagnostic}"),
        }
    }

    #[test]
    fn correctness_harness_has_the_triple_structure() {
        let task = task2();
        let h = gen_correctness_harness(&task, &task.tests[0]);
        let src = &h.source;
        assert!(src.contains("var a_h0 := new int[] [3, 4, 5, 6];"), "{src}");
        assert!(src.contains("var b_h1 := new int[] [5, 7, 4, 10];"), "{src}");
        assert!(
            src.contains("assume {:axiom} a[..a.Length] == a_h0[..a_h0.Length];"),
            "{src}"
        );
        assert!(
            src.contains("assert a[0] == a_h0[0] && a[1] == a_h0[1] && a[2] == a_h0[2] && a[3] == a_h0[3];"),
            "{src}"
        );
        assert!(src.contains("result := [4, 5];"), "{src}");
        assert!(src.contains("predicate InArray"), "{src}");
        assert_eq!(h.file_stem(), "2__correctness__test_1");
    }

    #[test]
    fn generation_is_deterministic() {
        let task = task2();
        let a = gen_correctness_harness(&task, &task.tests[0]);
        let b = gen_correctness_harness(&task, &task.tests[0]);
        assert_eq!(a.source, b.source);
    }

    #[test]
    fn mutant_harness_differs_only_in_output_assignment() {
        let task = task2();
        let mutants =
            curated_mutants(&task.tests[0], &[vec![ConcreteValue::seq_of(&[6])]]).unwrap();
        let correct = gen_correctness_harness(&task, &task.tests[0]);
        let mutated = gen_completeness_harness(&task, &mutants[0]).unwrap();
        let diff: Vec<(&str, &str)> = correct
            .source
            .lines()
            .zip(mutated.source.lines())
            .filter(|(a, b)| a != b)
            .collect();
        assert_eq!(diff, vec![("  result := [4, 5];", "  result := [6];")]);
    }

    #[test]
    fn harness_parses_under_the_own_frontend() {
        let task = task2();
        let h = gen_correctness_harness(&task, &task.tests[0]);
        let file = crate::parser::parse_spec_source(&h.source).unwrap();
        assert_eq!(file.helpers.len(), 1);
        assert_eq!(file.methods.len(), 1);
        assert_eq!(file.methods[0].ensures.len(), 2);
        assert_eq!(
            file.methods[0].ensures[0].source,
            task.spec.ensures[0].source
        );
    }

    #[test]
    fn scalar_inputs_use_plain_assume_without_element_asserts() {
        let json = r#"{
  "b1": {
    "task_description": "bool",
    "method_signature": "method negate (b:bool) returns (r:bool)",
    "test_cases": {"test_1": "var r:=negate(true);\nassert r == false;"}
  }
}"#;
        let mut m = BTreeMap::new();
        m.insert(
            "b1".to_string(),
            "method negate(b: bool) returns (r: bool)\n  ensures r == !b\n".to_string(),
        );
        let tasks = load_dataset(json, &MapSpecSource(m)).unwrap();
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!()
        };
        let h = gen_correctness_harness(task, &task.tests[0]);
        assert!(h.source.contains("assume {:axiom} b == true;"), "{}", h.source);
        assert!(!h.source.contains("assert b[0]"), "{}", h.source);
        assert!(h.source.contains("r := false;"), "{}", h.source);
    }

    #[test]
    fn empty_array_input_omits_element_assert() {
        let json = r#"{
  "e1": {
    "task_description": "count",
    "method_signature": "method countPositive (arr:array<int>) returns (count:int)",
    "test_cases": {"test_1": "var a:= new int[0];\nvar r:=countPositive(a);\nassert r == 0;"}
  }
}"#;
        let mut m = BTreeMap::new();
        m.insert(
            "e1".to_string(),
            "method countPositive(a: array<int>) returns (count: int)\n  ensures count >= 0\n"
                .to_string(),
        );
        let tasks = load_dataset(json, &MapSpecSource(m)).unwrap();
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!()
        };
        let h = gen_correctness_harness(task, &task.tests[0]);
        assert!(h.source.contains("var a_h0 := new int[0];"), "{}", h.source);
        assert!(
            h.source
                .contains("assume {:axiom} a[..a.Length] == a_h0[..a_h0.Length];"),
            "{}",
            h.source
        );
        assert!(!h.source.contains("assert a[0]"), "{}", h.source);
    }

    #[test]
    fn requires_clauses_are_reemitted_and_asserted_on_concrete_values() {
        let json = r#"{
  "r1": {
    "task_description": "sqrt-ish",
    "method_signature": "method half (n:int) returns (h:int)",
    "test_cases": {"test_1": "var r:=half(6);\nassert r == 3;"}
  }
}"#;
        let mut m = BTreeMap::new();
        m.insert(
            "r1".to_string(),
            "method half(n: int) returns (h: int)\n  requires n % 2 == 0\n  ensures h + h == n\n"
                .to_string(),
        );
        let tasks = load_dataset(json, &MapSpecSource(m)).unwrap();
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!()
        };
        let h = gen_correctness_harness(task, &task.tests[0]);
        let src = &h.source;
        assert!(src.contains("  requires n % 2 == 0\n"), "{src}");
        let assert_pos = src.find("assert 6 % 2 == 0;").expect("concrete requires assert");
        let assume_pos = src.find("assume {:axiom} n == 6;").expect("input assume");
        assert!(assert_pos < assume_pos, "requires assert must precede assumes");
    }

    #[test]
    fn alternate_harness_havocs_and_assumes_the_spec() {
        let task = task2();
        let h = gen_alternate_harness(&task, &task.tests[0]).unwrap();
        let src = &h.source;
        assert!(src.contains("result := *;"), "{src}");
        assert!(
            src.contains("assume {:axiom} forall x :: x in result ==> (InArray(a, x) && InArray(b, x))"),
            "{src}"
        );
        assert!(src.contains("assert result == [4, 5];"), "{src}");
        assert!(!src.contains("ensures forall"), "alternate carries no ensures: {src}");
        assert_eq!(h.file_stem(), "2__alternate__test_1");
    }

    #[test]
    fn curated_descriptor_does_not_change_harness() {
        // the harness depends only on the mutated values
        let task = task2();
        let curated =
            curated_mutants(&task.tests[0], &[vec![ConcreteValue::seq_of(&[4])]]).unwrap();
        assert_eq!(curated[0].descriptor, MutationDescriptor::ArrDrop(1));
        let h = gen_completeness_harness(&task, &curated[0]).unwrap();
        assert!(h.source.contains("result := [4];"));
    }
}
