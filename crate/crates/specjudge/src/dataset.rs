//! Dataset loading: benchmark JSON records plus Dafny spec sources become
//! typed task records. Parse failures never drop a task silently; the task
//! is kept with status "unparsed" and the diagnostic.
//!
//! JSON schema: the document is either a map `task_id -> record` or an
//! array of records carrying a `"task_id"` field. Each record has
//! `"task_description"`, `"method_signature"`, `"test_cases"` (map
//! `test_id -> snippet`), and optionally `"label"`. A test may override the
//! comparator by using an object `{"code": snippet, "comparator":
//! "multiset"}` in place of the snippet string.

use crate::ast::{MethodSignature, SpecUnit};
use crate::mutation::MutationTarget;
use crate::parser::{parse_signature, parse_test_snippet, ParseError};
use crate::typecheck::parse_spec;
use crate::value::{Comparator, ConcreteValue};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecLabel {
    WrongSpec,
    WeakSpec,
    StrongSpec,
}

impl SpecLabel {
    pub fn parse(s: &str) -> Option<SpecLabel> {
        match s.to_ascii_lowercase().as_str() {
            "wrong_spec" => Some(SpecLabel::WrongSpec),
            "weak_spec" => Some(SpecLabel::WeakSpec),
            "strong_spec" => Some(SpecLabel::StrongSpec),
            _ => None,
        }
    }
}

impl fmt::Display for SpecLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpecLabel::WrongSpec => "WRONG_SPEC",
            SpecLabel::WeakSpec => "WEAK_SPEC",
            SpecLabel::StrongSpec => "STRONG_SPEC",
        })
    }
}

/// An (i, o) pair with values already coerced to the effective signature's
/// types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub inputs: Vec<ConcreteValue>,
    pub expected: Vec<ConcreteValue>,
    pub comparator: Comparator,
}

impl MutationTarget for TestCase {
    fn test_id(&self) -> &str {
        &self.id
    }
    fn expected(&self) -> &[ConcreteValue] {
        &self.expected
    }
    fn comparator(&self) -> Comparator {
        self.comparator
    }
}

/// A fully parsed and cross-validated task.
#[derive(Debug, Clone)]
pub struct TaskRecord {
    pub task_id: String,
    pub description: String,
    /// The spec file's own method signature: the vocabulary of the spec.
    pub signature: MethodSignature,
    /// The dataset's signature (test snippets are written against this).
    pub dataset_signature: MethodSignature,
    pub tests: Vec<TestCase>,
    pub spec: SpecUnit,
    pub label: Option<SpecLabel>,
}

impl TaskRecord {
    pub fn test(&self, id: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }
}

/// Every dataset entry ends up as exactly one of these.
#[derive(Debug, Clone)]
pub enum LoadedTask {
    Parsed(Box<TaskRecord>),
    Unparsed { task_id: String, diagnostic: String },
}

impl LoadedTask {
    pub fn task_id(&self) -> &str {
        match self {
            LoadedTask::Parsed(t) => &t.task_id,
            LoadedTask::Unparsed { task_id, .. } => task_id,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed dataset JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed dataset JSON: {0}")]
    Shape(String),
    #[error("unknown label `{0}` (expected WRONG_SPEC, WEAK_SPEC or STRONG_SPEC)")]
    UnknownLabel(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Where spec sources come from; keyed by task id.
pub trait SpecSource {
    /// Returns (display name, source text) for a task, if available.
    fn source_for(&self, task_id: &str) -> Option<(String, String)>;
}

/// Looks for `<id>.dfy`, `task_id_<id>.dfy`, `task-id-<id>.dfy`,
/// `task_<id>.dfy` under a directory; a plain file path serves every task.
pub struct DirSpecSource {
    root: PathBuf,
}

impl DirSpecSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DirSpecSource { root: root.into() }
    }
}

impl SpecSource for DirSpecSource {
    fn source_for(&self, task_id: &str) -> Option<(String, String)> {
        if self.root.is_file() {
            return std::fs::read_to_string(&self.root)
                .ok()
                .map(|s| (self.root.display().to_string(), s));
        }
        let candidates = [
            format!("{task_id}.dfy"),
            format!("task_id_{task_id}.dfy"),
            format!("task-id-{task_id}.dfy"),
            format!("task_{task_id}.dfy"),
        ];
        for c in candidates {
            let p = self.root.join(&c);
            if p.is_file() {
                if let Ok(s) = std::fs::read_to_string(&p) {
                    return Some((p.display().to_string(), s));
                }
            }
        }
        None
    }
}

/// In-memory source map, used by tests.
pub struct MapSpecSource(pub BTreeMap<String, String>);

impl SpecSource for MapSpecSource {
    fn source_for(&self, task_id: &str) -> Option<(String, String)> {
        self.0
            .get(task_id)
            .map(|s| (format!("<memory:{task_id}>"), s.clone()))
    }
}

/// Parses the dataset document and cross-validates every record against
/// its spec source. Returns one entry per task, sorted by task id.
pub fn load_dataset(
    json_text: &str,
    specs: &dyn SpecSource,
) -> Result<Vec<LoadedTask>, DatasetError> {
    let doc: Value = serde_json::from_str(json_text)?;
    let records: BTreeMap<String, Value> = match doc {
        Value::Object(map) => map.into_iter().collect(),
        Value::Array(items) => {
            let mut out = BTreeMap::new();
            for (i, item) in items.into_iter().enumerate() {
                let id = item
                    .get("task_id")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| {
                        DatasetError::Shape(format!("array record {i} has no \"task_id\""))
                    })?;
                out.insert(id, item);
            }
            out
        }
        other => {
            return Err(DatasetError::Shape(format!(
                "expected object or array at top level, got {other}"
            )))
        }
    };

    let mut out = Vec::with_capacity(records.len());
    for (task_id, record) in records {
        match load_one(&task_id, &record, specs) {
            Ok(task) => out.push(LoadedTask::Parsed(Box::new(task))),
            Err(diagnostic) => out.push(LoadedTask::Unparsed {
                task_id,
                diagnostic,
            }),
        }
    }
    Ok(out)
}

fn load_one(task_id: &str, record: &Value, specs: &dyn SpecSource) -> Result<TaskRecord, String> {
    let obj = record
        .as_object()
        .ok_or_else(|| "record is not an object".to_string())?;
    let description = obj
        .get("task_description")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let sig_text = obj
        .get("method_signature")
        .and_then(Value::as_str)
        .ok_or_else(|| "missing \"method_signature\"".to_string())?;
    let dataset_signature = parse_signature(sig_text).map_err(|e| e.to_string())?;

    let tests_value = obj
        .get("test_cases")
        .ok_or_else(|| "missing \"test_cases\"".to_string())?;
    let tests_map = tests_value
        .as_object()
        .ok_or_else(|| "\"test_cases\" is not an object".to_string())?;
    if tests_map.is_empty() {
        return Err("no tests".to_string());
    }

    let (spec_path, spec_text) = specs
        .source_for(task_id)
        .ok_or_else(|| format!("missing spec file for task {task_id}"))?;
    let (signature, spec) = parse_spec(&spec_text, &dataset_signature)
        .map_err(|e| format!("{spec_path}: {e}"))?;

    let mut tests = Vec::with_capacity(tests_map.len());
    let sorted: BTreeMap<&String, &Value> = tests_map.iter().collect();
    for (test_id, entry) in sorted {
        let (snippet, comparator) = match entry {
            Value::String(s) => (s.as_str(), Comparator::Exact),
            Value::Object(m) => {
                let code = m
                    .get("code")
                    .and_then(Value::as_str)
                    .ok_or_else(|| format!("test {test_id}: object form needs \"code\""))?;
                let comparator = match m.get("comparator").and_then(Value::as_str) {
                    None | Some("exact") => Comparator::Exact,
                    Some("multiset") => Comparator::Multiset,
                    Some(other) => {
                        return Err(format!("test {test_id}: unknown comparator `{other}`"))
                    }
                };
                (code, comparator)
            }
            _ => return Err(format!("test {test_id}: snippet must be a string")),
        };
        let case = parse_test_snippet(snippet, &dataset_signature)
            .map_err(|e: ParseError| format!("test {test_id}: {e}"))?;
        if comparator == Comparator::Multiset
            && !signature.outputs.iter().any(|p| p.ty.is_collection())
        {
            return Err(format!(
                "test {test_id}: multiset comparator on non-collection output"
            ));
        }
        // align the dataset values with the spec file's vocabulary
        let inputs = coerce_all(case.inputs, &signature.inputs)
            .map_err(|e| format!("test {test_id}: {e}"))?;
        let expected = coerce_all(case.expected, &signature.outputs)
            .map_err(|e| format!("test {test_id}: {e}"))?;
        tests.push(TestCase {
            id: test_id.clone(),
            inputs,
            expected,
            comparator,
        });
    }

    let label = match obj.get("label") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => {
            Some(SpecLabel::parse(s).ok_or_else(|| format!("unknown label `{s}`"))?)
        }
        Some(other) => return Err(format!("label must be a string, got {other}")),
    };

    Ok(TaskRecord {
        task_id: task_id.to_string(),
        description,
        signature,
        dataset_signature,
        tests,
        spec,
        label,
    })
}

fn coerce_all(
    values: Vec<ConcreteValue>,
    params: &[crate::ast::Param],
) -> Result<Vec<ConcreteValue>, String> {
    if values.len() != params.len() {
        return Err(format!(
            "arity mismatch: {} value(s) for {} parameter(s)",
            values.len(),
            params.len()
        ));
    }
    values
        .into_iter()
        .zip(params)
        .map(|(v, p)| {
            v.coerce_to(p.ty).ok_or_else(|| {
                format!(
                    "value {} has type {}, parameter `{}` needs {}",
                    v,
                    v.value_type(),
                    p.name,
                    p.ty
                )
            })
        })
        .collect()
}

/// Labels file: JSON map `task_id -> "WRONG_SPEC" | "WEAK_SPEC" | "STRONG_SPEC"`.
pub fn load_labels(json_text: &str) -> Result<BTreeMap<String, SpecLabel>, DatasetError> {
    let doc: Value = serde_json::from_str(json_text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| DatasetError::Shape("labels document must be an object".into()))?;
    let mut out = BTreeMap::new();
    for (k, v) in obj {
        let s = v
            .as_str()
            .ok_or_else(|| DatasetError::Shape(format!("label for {k} is not a string")))?;
        let label = SpecLabel::parse(s).ok_or_else(|| DatasetError::UnknownLabel(s.to_string()))?;
        out.insert(k.clone(), label);
    }
    Ok(out)
}

/// Curated-mutants sidecar: `{task_id: {test_id: [literal, ...]}}` where
/// each literal is Dafny literal text for a single output, or an array of
/// literals for multi-output methods.
pub type CuratedSidecar = BTreeMap<String, BTreeMap<String, Vec<Vec<ConcreteValue>>>>;

pub fn load_curated(json_text: &str) -> Result<CuratedSidecar, DatasetError> {
    let doc: Value = serde_json::from_str(json_text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| DatasetError::Shape("curated document must be an object".into()))?;
    let mut out = CuratedSidecar::new();
    for (task_id, tests) in obj {
        let tests_obj = tests.as_object().ok_or_else(|| {
            DatasetError::Shape(format!("curated entry for task {task_id} is not an object"))
        })?;
        let mut per_test = BTreeMap::new();
        for (test_id, list) in tests_obj {
            let items = list.as_array().ok_or_else(|| {
                DatasetError::Shape(format!("curated {task_id}/{test_id} is not an array"))
            })?;
            let mut tuples = Vec::with_capacity(items.len());
            for item in items {
                let tuple = match item {
                    Value::String(lit) => vec![parse_curated_literal(lit, task_id, test_id)?],
                    Value::Array(lits) => {
                        let mut t = Vec::with_capacity(lits.len());
                        for lit in lits {
                            let s = lit.as_str().ok_or_else(|| {
                                DatasetError::Shape(format!(
                                    "curated {task_id}/{test_id}: literal is not a string"
                                ))
                            })?;
                            t.push(parse_curated_literal(s, task_id, test_id)?);
                        }
                        t
                    }
                    _ => {
                        return Err(DatasetError::Shape(format!(
                            "curated {task_id}/{test_id}: entry must be a literal or array"
                        )))
                    }
                };
                tuples.push(tuple);
            }
            per_test.insert(test_id.clone(), tuples);
        }
        out.insert(task_id.clone(), per_test);
    }
    Ok(out)
}

fn parse_curated_literal(
    lit: &str,
    task_id: &str,
    test_id: &str,
) -> Result<ConcreteValue, DatasetError> {
    crate::parser::parse_literal(lit)
        .map_err(|e| DatasetError::Shape(format!("curated {task_id}/{test_id}: {e}")))
}

/// Coerces curated tuples to a task's output types (`[4, 5]` parses as a
/// sequence but may feed an `array<int>` output).
pub fn coerce_curated(
    tuples: &[Vec<ConcreteValue>],
    task: &TaskRecord,
) -> Result<Vec<Vec<ConcreteValue>>, String> {
    tuples
        .iter()
        .map(|t| coerce_all(t.clone(), &task.signature.outputs))
        .collect()
}

/// Resolves a path argument relative to the current directory.
pub fn read_to_string(path: &Path) -> Result<String, DatasetError> {
    Ok(std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TASK2_SPEC: &str = r#"
predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result ==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;

    fn task2_json() -> String {
        r#"{
  "2": {
    "task_description": "Write a method in Dafny to find the shared elements from the given two array.",
    "method_signature": "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
    "test_cases": {
      "test_1": "var a1:= new int[] [3, 4, 5, 6];\nvar a2:= new int[] [5, 7, 4, 10];\nvar e1:= new int[] [4, 5];\nvar res1:=similarElements(a1,a2);\nassert arrayEquals(res1,e1);",
      "test_2": "var a3:= new int[] [1, 2, 3, 4];\nvar a4:= new int[] [5, 4, 3, 7];\nvar e2:= new int[] [3, 4];\nvar res2:=similarElements(a3,a4);\nassert arrayEquals(res2,e2);",
      "test_3": "var a5:= new int[] [11, 12, 14, 13];\nvar a6:= new int[] [17, 15, 14, 13];\nvar e3:= new int[] [13, 14];\nvar res3:=similarElements(a5,a6);\nassert arrayEquals(res3,e3);"
    },
    "label": "strong_spec"
  }
}"#
        .to_string()
    }

    fn specs() -> MapSpecSource {
        let mut m = BTreeMap::new();
        m.insert("2".to_string(), TASK2_SPEC.to_string());
        MapSpecSource(m)
    }

    #[test]
    fn loads_task2_with_three_tests_and_two_ensures() {
        let tasks = load_dataset(&task2_json(), &specs()).unwrap();
        assert_eq!(tasks.len(), 1);
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!("expected parsed, got {tasks:?}");
        };
        assert_eq!(task.tests.len(), 3);
        assert_eq!(task.spec.ensures.len(), 2);
        assert_eq!(task.label, Some(SpecLabel::StrongSpec));
        // values are coerced to the spec file's seq<int> output
        assert_eq!(
            task.tests[0].expected,
            vec![ConcreteValue::seq_of(&[4, 5])]
        );
        assert_eq!(task.signature.name, "SharedElements");
    }

    #[test]
    fn unsupported_signature_type_yields_unparsed_status() {
        let json = r#"{
  "700": {
    "task_description": "2D",
    "method_signature": "method sumGrid (g:array2<int>) returns (s:int)",
    "test_cases": {"test_1": "var r:=sumGrid(0);\nassert r == 0;"}
  }
}"#;
        let tasks = load_dataset(json, &MapSpecSource(BTreeMap::new())).unwrap();
        let LoadedTask::Unparsed { diagnostic, .. } = &tasks[0] else {
            panic!("expected unparsed");
        };
        assert!(diagnostic.contains("unsupported type"), "{diagnostic}");
        assert!(diagnostic.contains("array2<int>"), "{diagnostic}");
    }

    #[test]
    fn empty_test_cases_is_no_tests() {
        let json = r#"{
  "9": {
    "task_description": "x",
    "method_signature": "method f (x:int) returns (r:int)",
    "test_cases": {}
  }
}"#;
        let tasks = load_dataset(json, &MapSpecSource(BTreeMap::new())).unwrap();
        let LoadedTask::Unparsed { diagnostic, .. } = &tasks[0] else {
            panic!("expected unparsed");
        };
        assert_eq!(diagnostic, "no tests");
    }

    #[test]
    fn missing_spec_file_is_diagnosed() {
        let json = r#"{
  "8": {
    "task_description": "x",
    "method_signature": "method f (x:int) returns (r:int)",
    "test_cases": {"test_1": "var r:=f(1);\nassert r == 1;"}
  }
}"#;
        let tasks = load_dataset(json, &MapSpecSource(BTreeMap::new())).unwrap();
        let LoadedTask::Unparsed { diagnostic, .. } = &tasks[0] else {
            panic!("expected unparsed");
        };
        assert!(diagnostic.contains("missing spec file"));
    }

    #[test]
    fn malformed_json_is_a_hard_error() {
        assert!(load_dataset("{not json", &MapSpecSource(BTreeMap::new())).is_err());
    }

    #[test]
    fn per_test_comparator_override() {
        let json = r#"{
  "2": {
    "task_description": "d",
    "method_signature": "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
    "test_cases": {
      "test_1": {"code": "var a1:= new int[] [3, 4];\nvar a2:= new int[] [4, 3];\nvar e1:= new int[] [3, 4];\nvar res1:=similarElements(a1,a2);\nassert arrayEquals(res1,e1);", "comparator": "multiset"}
    }
  }
}"#;
        let tasks = load_dataset(json, &specs()).unwrap();
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!("expected parsed")
        };
        assert_eq!(task.tests[0].comparator, Comparator::Multiset);
    }

    #[test]
    fn labels_file_round_trip() {
        let labels = load_labels(r#"{"2": "STRONG_SPEC", "61": "weak_spec"}"#).unwrap();
        assert_eq!(labels["2"], SpecLabel::StrongSpec);
        assert_eq!(labels["61"], SpecLabel::WeakSpec);
        assert!(matches!(
            load_labels(r#"{"2": "GREAT_SPEC"}"#),
            Err(DatasetError::UnknownLabel(_))
        ));
    }

    #[test]
    fn curated_sidecar_parses_literals() {
        let sidecar = load_curated(
            r#"{"2": {"test_1": ["[4]", "[5]", "new int[] [4, 5, 3]"], "test_2": [["125"]]}}"#,
        )
        .unwrap();
        assert_eq!(sidecar["2"]["test_1"].len(), 3);
        assert_eq!(
            sidecar["2"]["test_1"][0],
            vec![ConcreteValue::seq_of(&[4])]
        );
        assert_eq!(
            sidecar["2"]["test_1"][2],
            vec![ConcreteValue::array_of(&[4, 5, 3])]
        );
        assert_eq!(sidecar["2"]["test_2"][0], vec![ConcreteValue::int(125)]);
    }
}
