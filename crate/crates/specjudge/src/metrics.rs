//! The two metrics over backend verdicts: per-test correctness, and
//! completeness |T2|/|T1| over output mutants, computed only after the
//! correctness gate passes. Classification compares the completeness score
//! against a threshold and the result against human labels.
//!
//! Batch triple checks are the data-parallel inner loop: with the
//! `parallel` feature (default) they fan out over a rayon pool, and a
//! sequential path is always available (`check_triples_seq`).

use crate::dataset::{SpecLabel, TaskRecord, TestCase};
use crate::eval::{eval_spec, Environment, EvalLimits};
use crate::mutation::{generate_mutants, MutantCase, MutationConfig};
use crate::value::{tuples_equal, Comparator, ConcreteValue};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

/// Outcome of one triple check `{true} x := i; y := o; {spec}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    /// The triple definitely holds.
    Holds,
    /// The triple definitely does not hold.
    Fails,
    /// No definite verdict; carries the diagnosis.
    Unknown(String),
}

impl CheckOutcome {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            CheckOutcome::Holds => Some(true),
            CheckOutcome::Fails => Some(false),
            CheckOutcome::Unknown(_) => None,
        }
    }
}

/// Per-test correctness verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestVerdict {
    Correct,
    Incorrect,
    Unknown(String),
}

impl fmt::Display for TestVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestVerdict::Correct => "correct",
            TestVerdict::Incorrect => "incorrect",
            TestVerdict::Unknown(_) => "unknown",
        })
    }
}

/// One triple to check: a test's inputs with some output tuple (the
/// expected one for correctness, a mutant's for completeness). The label
/// names emitted harness files.
#[derive(Debug, Clone)]
pub struct TripleQuery<'t> {
    pub test: &'t TestCase,
    pub outputs: &'t [ConcreteValue],
    pub label: String,
    /// False for a correctness query (outputs are the test's expected
    /// values), true for a mutant.
    pub is_mutant: bool,
}

/// A backend that can decide triples.
pub trait TripleBackend: Sync {
    fn name(&self) -> &'static str;
    fn check(&self, task: &TaskRecord, query: &TripleQuery) -> CheckOutcome;
}

/// The built-in backend: direct evaluation of the spec on the concrete
/// environment.
#[derive(Debug, Clone, Default)]
pub struct EvalBackend {
    pub limits: EvalLimits,
}

impl TripleBackend for EvalBackend {
    fn name(&self) -> &'static str {
        "eval"
    }

    fn check(&self, task: &TaskRecord, query: &TripleQuery) -> CheckOutcome {
        let env = match Environment::for_signature(
            &task.signature,
            &query.test.inputs,
            query.outputs,
        ) {
            Ok(env) => env,
            Err(e) => return CheckOutcome::Unknown(e.to_string()),
        };
        match eval_spec(&task.spec, &env, &self.limits) {
            Ok(true) => CheckOutcome::Holds,
            Ok(false) => CheckOutcome::Fails,
            Err(e) => CheckOutcome::Unknown(e.to_string()),
        }
    }
}

/// The Dafny backend: generate the harness for the triple and verify it.
pub struct DafnyBackend {
    pub runner: crate::dafny::DafnyRunner,
    pub scratch: PathBuf,
    /// When set, persist each harness and its verifier transcript here.
    pub persist: Option<PathBuf>,
}

impl TripleBackend for DafnyBackend {
    fn name(&self) -> &'static str {
        "dafny"
    }

    fn check(&self, task: &TaskRecord, query: &TripleQuery) -> CheckOutcome {
        use crate::dafny::VerifierVerdict;
        let harness = if !query.is_mutant {
            crate::harness::gen_correctness_harness(task, query.test)
        } else {
            let mutant = MutantCase {
                id: query.label.clone(),
                parent_test_id: query.test.id.clone(),
                mutated_expected: query.outputs.to_vec(),
                descriptor: crate::mutation::MutationDescriptor::Curated,
                output_index: 0,
            };
            match crate::harness::gen_completeness_harness(task, &mutant) {
                Ok(h) => h,
                Err(e) => return CheckOutcome::Unknown(e.to_string()),
            }
        };
        let outcome = match self.runner.verify(&harness, &self.scratch) {
            Ok(o) => o,
            Err(e) => return CheckOutcome::Unknown(e.to_string()),
        };
        if let Some(dir) = &self.persist {
            let _ = std::fs::write(
                dir.join(format!("{}.transcript.txt", harness.file_stem())),
                format!("{}\n{}", outcome.stdout, outcome.stderr),
            );
        }
        match outcome.verdict {
            VerifierVerdict::Verified => CheckOutcome::Holds,
            VerifierVerdict::Failed => CheckOutcome::Fails,
            VerifierVerdict::Unknown => CheckOutcome::Unknown(
                outcome
                    .reason
                    .map(|r| r.to_string())
                    .unwrap_or_else(|| "unknown".to_string()),
            ),
        }
    }
}

/// Sequential batch check; always available.
pub fn check_triples_seq(
    backend: &dyn TripleBackend,
    task: &TaskRecord,
    queries: &[TripleQuery],
) -> Vec<CheckOutcome> {
    queries.iter().map(|q| backend.check(task, q)).collect()
}

/// Parallel batch check over the ambient rayon pool; input order is
/// preserved in the output.
#[cfg(feature = "parallel")]
pub fn check_triples_par<B: TripleBackend>(
    backend: &B,
    task: &TaskRecord,
    queries: &[TripleQuery],
) -> Vec<CheckOutcome> {
    use rayon::prelude::*;
    queries
        .par_iter()
        .map(|q| backend.check(task, q))
        .collect()
}

/// Batch check: parallel when the feature is enabled, sequential otherwise.
pub fn check_triples<B: TripleBackend>(
    backend: &B,
    task: &TaskRecord,
    queries: &[TripleQuery],
) -> Vec<CheckOutcome> {
    #[cfg(feature = "parallel")]
    {
        check_triples_par(backend, task, queries)
    }
    #[cfg(not(feature = "parallel"))]
    {
        check_triples_seq(backend, task, queries)
    }
}

/// One backend query per test: Correct iff the triple definitely holds.
pub fn correctness<B: TripleBackend>(
    task: &TaskRecord,
    backend: &B,
) -> BTreeMap<String, TestVerdict> {
    let queries: Vec<TripleQuery> = task
        .tests
        .iter()
        .map(|t| TripleQuery {
            test: t,
            outputs: &t.expected,
            label: t.id.clone(),
            is_mutant: false,
        })
        .collect();
    let outcomes = check_triples(backend, task, &queries);
    task.tests
        .iter()
        .zip(outcomes)
        .map(|(t, o)| {
            let v = match o {
                CheckOutcome::Holds => TestVerdict::Correct,
                CheckOutcome::Fails => TestVerdict::Incorrect,
                CheckOutcome::Unknown(d) => TestVerdict::Unknown(d),
            };
            (t.id.clone(), v)
        })
        .collect()
}

/// Why completeness was not computed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateViolation {
    #[error("correctness gate failed: test {0} is incorrect")]
    Incorrect(String),
    #[error("correctness gate blocked: test {0} has no definite verdict ({1})")]
    Unknown(String, String),
}

/// Per-mutant verdict under the completeness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutantVerdict {
    Killed,
    Survived,
    Unknown(String),
}

impl fmt::Display for MutantVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutantVerdict::Killed => "killed",
            MutantVerdict::Survived => "survived",
            MutantVerdict::Unknown(_) => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completeness {
    pub killed: u64,
    pub survived: u64,
    pub unknown: u64,
    pub t1_size: u64,
    pub per_mutant: Vec<(String, MutantVerdict)>,
}

impl Completeness {
    /// |T2|/|T1| as an exact fraction; unknown mutants count in the
    /// denominator but never as kills.
    pub fn score(&self) -> (u64, u64) {
        (self.killed, self.t1_size)
    }

    pub fn score_f64(&self) -> f64 {
        if self.t1_size == 0 {
            0.0
        } else {
            self.killed as f64 / self.t1_size as f64
        }
    }
}

/// Checks every mutant against the spec, refusing unless every test in the
/// correctness map is Correct (the gate). Killed iff the triple definitely
/// fails; survived iff it definitely holds.
pub fn completeness<B: TripleBackend>(
    task: &TaskRecord,
    mutants: &[MutantCase],
    backend: &B,
    correctness: &BTreeMap<String, TestVerdict>,
) -> Result<Completeness, GateViolation> {
    for (test_id, verdict) in correctness {
        match verdict {
            TestVerdict::Correct => {}
            TestVerdict::Incorrect => return Err(GateViolation::Incorrect(test_id.clone())),
            TestVerdict::Unknown(d) => {
                return Err(GateViolation::Unknown(test_id.clone(), d.clone()))
            }
        }
    }
    let queries: Vec<TripleQuery> = mutants
        .iter()
        .map(|m| {
            let test = task
                .test(&m.parent_test_id)
                .expect("mutant parent test exists");
            TripleQuery {
                test,
                outputs: &m.mutated_expected,
                label: m.id.clone(),
                is_mutant: true,
            }
        })
        .collect();
    let outcomes = check_triples(backend, task, &queries);
    let mut killed = 0;
    let mut survived = 0;
    let mut unknown = 0;
    let per_mutant = mutants
        .iter()
        .zip(outcomes)
        .map(|(m, o)| {
            let v = match o {
                CheckOutcome::Fails => {
                    killed += 1;
                    MutantVerdict::Killed
                }
                CheckOutcome::Holds => {
                    survived += 1;
                    MutantVerdict::Survived
                }
                CheckOutcome::Unknown(d) => {
                    unknown += 1;
                    MutantVerdict::Unknown(d)
                }
            };
            (m.id.clone(), v)
        })
        .collect();
    Ok(Completeness {
        killed,
        survived,
        unknown,
        t1_size: mutants.len() as u64,
        per_mutant,
    })
}

/// Classification threshold as an exact rational in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub num: u64,
    pub den: u64,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold { num: 66, den: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid threshold `{0}` (expected a decimal in (0, 1])")]
pub struct ThresholdError(String);

impl Threshold {
    /// Parses a decimal like `0.66` exactly (no floating point).
    pub fn parse(s: &str) -> Result<Threshold, ThresholdError> {
        let bad = || ThresholdError(s.to_string());
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(bad());
        }
        let int_val: u64 = int_part.parse().map_err(|_| bad())?;
        let den = 10u64.pow(frac_part.len() as u32);
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let num = int_val
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        if num == 0 || num > den {
            return Err(bad());
        }
        Ok(Threshold { num, den })
    }

    /// `killed/t1 >= num/den`, exactly.
    pub fn is_met(&self, killed: u64, t1: u64) -> bool {
        if t1 == 0 {
            return false;
        }
        (killed as u128) * (self.den as u128) >= (self.num as u128) * (t1 as u128)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Wrong,
    Weak,
    Strong,
    Undetermined,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Wrong => "WRONG",
            Classification::Weak => "WEAK",
            Classification::Strong => "STRONG",
            Classification::Undetermined => "UNDETERMINED",
        })
    }
}

/// WRONG if any test is incorrect; UNDETERMINED if an unknown blocks the
/// gate (or blocks completeness); otherwise WEAK/STRONG by threshold.
pub fn classify(
    correctness: &BTreeMap<String, TestVerdict>,
    completeness: Option<&Completeness>,
    threshold: Threshold,
) -> Classification {
    if correctness
        .values()
        .any(|v| matches!(v, TestVerdict::Incorrect))
    {
        return Classification::Wrong;
    }
    if correctness
        .values()
        .any(|v| matches!(v, TestVerdict::Unknown(_)))
    {
        return Classification::Undetermined;
    }
    match completeness {
        Some(c) => {
            if threshold.is_met(c.killed, c.t1_size) {
                Classification::Strong
            } else {
                Classification::Weak
            }
        }
        None => Classification::Undetermined,
    }
}

/// Classification vs human label; the WRONG/WEAK/STRONG names line up with
/// the WRONG_SPEC/WEAK_SPEC/STRONG_SPEC labels.
pub fn agrees(classification: Classification, label: SpecLabel) -> bool {
    matches!(
        (classification, label),
        (Classification::Wrong, SpecLabel::WrongSpec)
            | (Classification::Weak, SpecLabel::WeakSpec)
            | (Classification::Strong, SpecLabel::StrongSpec)
    )
}

/// One row of the agreement table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementRow {
    pub task_id: String,
    pub classification: Classification,
    pub label: SpecLabel,
    pub agree: bool,
}

/// Per-task match of classification vs label, plus the disagreement list
/// (disagreements are findings, not failures).
pub fn label_agreement(
    rows: impl IntoIterator<Item = (String, Classification, SpecLabel)>,
) -> (Vec<AgreementRow>, Vec<String>) {
    let mut table = Vec::new();
    let mut disagreements = Vec::new();
    for (task_id, classification, label) in rows {
        let agree = agrees(classification, label);
        if !agree {
            disagreements.push(task_id.clone());
        }
        table.push(AgreementRow {
            task_id,
            classification,
            label,
            agree,
        });
    }
    (table, disagreements)
}

/// Outcome of the alternate diagnostic check
/// `{x == i && spec(x, y)} skip {y == o}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlternateOutcome {
    /// No output other than the expected one was found to satisfy the spec.
    Verified,
    /// A spec-satisfying output differing from the expected one exists.
    Failed { witness: Vec<ConcreteValue> },
    Unknown(String),
}

impl fmt::Display for AlternateOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlternateOutcome::Verified => f.write_str("verified"),
            AlternateOutcome::Failed { .. } => f.write_str("failed"),
            AlternateOutcome::Unknown(_) => f.write_str("unknown"),
        }
    }
}

/// Decides the alternate check under the Eval backend by searching for a
/// counterexample output among: all permutations of the expected collection
/// (up to length 7), and the seeded mutant closure of the expected output.
/// Finding any spec-satisfying output that differs from the expected one
/// (exactly) refutes the triple. The search is a refutation oracle: a
/// Verified result means no counterexample was found in the searched set.
pub fn alternate_check_eval(
    task: &TaskRecord,
    test: &TestCase,
    cfg: &MutationConfig,
    limits: &EvalLimits,
) -> Result<AlternateOutcome, crate::harness::HarnessError> {
    if task.signature.outputs.len() != 1 {
        return Err(crate::harness::HarnessError::MultiOutput(
            task.signature.outputs.len(),
        ));
    }
    let expected = &test.expected;

    // the expected output itself must evaluate; otherwise no verdict
    let eval_candidate = |outputs: &[ConcreteValue]| -> Result<bool, String> {
        let env = Environment::for_signature(&task.signature, &test.inputs, outputs)
            .map_err(|e| e.to_string())?;
        eval_spec(&task.spec, &env, limits).map_err(|e| e.to_string())
    };
    if let Err(d) = eval_candidate(expected) {
        return Ok(AlternateOutcome::Unknown(d));
    }

    let mut candidates: Vec<Vec<ConcreteValue>> = Vec::new();
    if let Some(xs) = expected[0].as_collection() {
        if xs.len() <= 7 {
            permutations(xs, &mut candidates, &expected[0]);
        }
    }
    let search_cfg = MutationConfig {
        mutants_per_test: cfg.mutants_per_test.max(16),
        ..*cfg
    };
    for m in generate_mutants(&task.task_id, test, &search_cfg) {
        candidates.push(m.mutated_expected);
    }

    for candidate in candidates {
        if tuples_equal(&candidate, expected, Comparator::Exact) {
            continue;
        }
        match eval_candidate(&candidate) {
            Ok(true) => {
                return Ok(AlternateOutcome::Failed {
                    witness: candidate,
                })
            }
            Ok(false) => {}
            // a candidate that fails to evaluate is not a witness
            Err(_) => {}
        }
    }
    Ok(AlternateOutcome::Verified)
}

fn permutations(
    xs: &[num_bigint::BigInt],
    out: &mut Vec<Vec<ConcreteValue>>,
    shape: &ConcreteValue,
) {
    let mut xs = xs.to_vec();
    let n = xs.len();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let push = |xs: &[num_bigint::BigInt], out: &mut Vec<Vec<ConcreteValue>>| {
        let v = match shape {
            ConcreteValue::ArrayInt(_) => ConcreteValue::ArrayInt(xs.to_vec()),
            _ => ConcreteValue::SeqInt(xs.to_vec()),
        };
        out.push(vec![v]);
    };
    push(&xs, out);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                xs.swap(0, i);
            } else {
                xs.swap(c[i], i);
            }
            push(&xs, out);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_dataset, LoadedTask, MapSpecSource};
    use crate::mutation::curated_mutants;
    use std::collections::BTreeMap as Map;

    const TASK2_SPEC: &str = r#"predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result ==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;

    const TASK2_PRECISE_SPEC: &str = r#"predicate InArray(a: array<int>, x: int)
reads a
{ exists i :: 0 <= i < a.Length && a[i] == x }

method SharedElements(a: array<int>, b: array<int>) returns (result: seq<int>)
  ensures forall x :: x in result <==> (InArray(a, x) && InArray(b, x))
  ensures forall i, j :: 0 <= i < j < |result| ==> result[i] != result[j]
"#;

    const TASK2_JSON: &str = r#"{
  "2": {
    "task_description": "shared elements",
    "method_signature": "method similarElements (arr1:array<int>, arr2:array<int>) returns (res: array<int>)",
    "test_cases": {
      "test_1": "var a1:= new int[] [3, 4, 5, 6];\nvar a2:= new int[] [5, 7, 4, 10];\nvar e1:= new int[] [4, 5];\nvar res1:=similarElements(a1,a2);\nassert arrayEquals(res1,e1);",
      "test_2": "var a3:= new int[] [1, 2, 3, 4];\nvar a4:= new int[] [5, 4, 3, 7];\nvar e2:= new int[] [3, 4];\nvar res2:=similarElements(a3,a4);\nassert arrayEquals(res2,e2);",
      "test_3": "var a5:= new int[] [11, 12, 14, 13];\nvar a6:= new int[] [17, 15, 14, 13];\nvar e3:= new int[] [13, 14];\nvar res3:=similarElements(a5,a6);\nassert arrayEquals(res3,e3);"
    }
  }
}"#;

    fn task2(spec: &str) -> TaskRecord {
        let mut m = Map::new();
        m.insert("2".to_string(), spec.to_string());
        let tasks = load_dataset(TASK2_JSON, &MapSpecSource(m)).unwrap();
        match tasks.into_iter().next().unwrap() {
            LoadedTask::Parsed(t) => *t,
            LoadedTask::Unparsed { diagnostic, .. } => panic!("{diagnostic}"),
        }
    }

    /// Curated per-test sets: {[e1], [e2], [e1,e2,w], [e1,e1], [z]} with w
    /// absent from the second input and z absent from both.
    fn curated_for(task: &TaskRecord) -> Vec<MutantCase> {
        let sets: [(&str, [&[i64]; 5]); 3] = [
            ("test_1", [&[4], &[5], &[4, 5, 3], &[4, 4], &[9]]),
            ("test_2", [&[3], &[4], &[3, 4, 1], &[3, 3], &[9]]),
            ("test_3", [&[13], &[14], &[13, 14, 11], &[13, 13], &[9]]),
        ];
        let mut out = Vec::new();
        for (test_id, values) in sets {
            let test = task.test(test_id).unwrap();
            let tuples: Vec<Vec<ConcreteValue>> = values
                .iter()
                .map(|v| vec![ConcreteValue::seq_of(v)])
                .collect();
            out.extend(curated_mutants(test, &tuples).unwrap());
        }
        out
    }

    #[test]
    fn task2_is_correct_on_all_three_tests() {
        let task = task2(TASK2_SPEC);
        let verdicts = correctness(&task, &EvalBackend::default());
        assert_eq!(verdicts.len(), 3);
        assert!(verdicts.values().all(|v| *v == TestVerdict::Correct));
    }

    #[test]
    fn task2_curated_completeness_is_three_fifths() {
        let task = task2(TASK2_SPEC);
        let backend = EvalBackend::default();
        let verdicts = correctness(&task, &backend);
        let mutants = curated_for(&task);
        let c = completeness(&task, &mutants, &backend, &verdicts).unwrap();
        assert_eq!(c.t1_size, 15);
        assert_eq!(c.killed, 9);
        assert_eq!(c.survived, 6);
        assert_eq!(c.unknown, 0);
        // exactly 3/5
        assert_eq!(c.score().0 * 5, 3 * c.score().1);
        assert_eq!(
            classify(&verdicts, Some(&c), Threshold::default()),
            Classification::Weak
        );
    }

    #[test]
    fn precise_spec_kills_every_curated_mutant() {
        let task = task2(TASK2_PRECISE_SPEC);
        let backend = EvalBackend::default();
        let verdicts = correctness(&task, &backend);
        assert!(verdicts.values().all(|v| *v == TestVerdict::Correct));
        let mutants = curated_for(&task);
        let c = completeness(&task, &mutants, &backend, &verdicts).unwrap();
        assert_eq!((c.killed, c.t1_size), (15, 15));
        assert_eq!(
            classify(&verdicts, Some(&c), Threshold::default()),
            Classification::Strong
        );
    }

    #[test]
    fn gate_refuses_on_incorrect_and_unknown() {
        let task = task2(TASK2_SPEC);
        let backend = EvalBackend::default();
        let mutants = curated_for(&task);
        let mut verdicts = correctness(&task, &backend);
        verdicts.insert("test_1".into(), TestVerdict::Incorrect);
        assert!(matches!(
            completeness(&task, &mutants, &backend, &verdicts),
            Err(GateViolation::Incorrect(_))
        ));
        verdicts.insert("test_1".into(), TestVerdict::Unknown("x".into()));
        assert!(matches!(
            completeness(&task, &mutants, &backend, &verdicts),
            Err(GateViolation::Unknown(..))
        ));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let task = task2(TASK2_SPEC);
        let backend = EvalBackend::default();
        let mutants = curated_for(&task);
        let queries: Vec<TripleQuery> = mutants
            .iter()
            .map(|m| TripleQuery {
                test: task.test(&m.parent_test_id).unwrap(),
                outputs: &m.mutated_expected,
                label: m.id.clone(),
                is_mutant: true,
            })
            .collect();
        let seq = check_triples_seq(&backend, &task, &queries);
        let par = check_triples(&backend, &task, &queries);
        assert_eq!(seq, par);
    }

    #[test]
    fn threshold_parses_exactly() {
        assert_eq!(Threshold::parse("0.66").unwrap(), Threshold { num: 66, den: 100 });
        assert_eq!(Threshold::parse("1").unwrap(), Threshold { num: 1, den: 1 });
        assert_eq!(Threshold::parse("0.5").unwrap(), Threshold { num: 5, den: 10 });
        assert!(Threshold::parse("0").is_err());
        assert!(Threshold::parse("1.5").is_err());
        assert!(Threshold::parse("abc").is_err());
        // 0.6 < 0.66 exactly; 0.66 meets it
        let t = Threshold::default();
        assert!(!t.is_met(3, 5));
        assert!(t.is_met(66, 100));
        assert!(t.is_met(2, 3));
    }

    #[test]
    fn classification_rules() {
        let mut v = Map::new();
        v.insert("t1".to_string(), TestVerdict::Incorrect);
        v.insert("t2".to_string(), TestVerdict::Unknown("d".into()));
        assert_eq!(
            classify(&v, None, Threshold::default()),
            Classification::Wrong
        );
        let mut v = Map::new();
        v.insert("t1".to_string(), TestVerdict::Correct);
        v.insert("t2".to_string(), TestVerdict::Unknown("d".into()));
        assert_eq!(
            classify(&v, None, Threshold::default()),
            Classification::Undetermined
        );
    }

    #[test]
    fn agreement_table_flags_disagreements() {
        let (table, disagreements) = label_agreement(vec![
            ("2".to_string(), Classification::Weak, SpecLabel::StrongSpec),
            ("572".to_string(), Classification::Wrong, SpecLabel::WrongSpec),
            ("61".to_string(), Classification::Weak, SpecLabel::WeakSpec),
        ]);
        assert_eq!(disagreements, vec!["2".to_string()]);
        assert!(!table[0].agree);
        assert!(table[1].agree);
        assert!(table[2].agree);
    }

    #[test]
    fn alternate_check_fails_for_permutable_precise_spec() {
        let task = task2(TASK2_PRECISE_SPEC);
        let outcome = alternate_check_eval(
            &task,
            &task.tests[0],
            &MutationConfig::default(),
            &EvalLimits::default(),
        )
        .unwrap();
        let AlternateOutcome::Failed { witness } = outcome else {
            panic!("expected failed, got {outcome:?}");
        };
        // [5, 4] satisfies the spec but differs from [4, 5]
        assert_eq!(witness, vec![ConcreteValue::seq_of(&[5, 4])]);
    }

    #[test]
    fn alternate_check_fails_for_vacuous_spec() {
        let json = r#"{
  "v": {
    "task_description": "any",
    "method_signature": "method anyValue (x:int) returns (r:int)",
    "test_cases": {"test_1": "var r:=anyValue(1);\nassert r == 1;"}
  }
}"#;
        let mut m = Map::new();
        m.insert(
            "v".to_string(),
            "method anyValue(x: int) returns (r: int)\n  ensures true\n".to_string(),
        );
        let tasks = load_dataset(json, &MapSpecSource(m)).unwrap();
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!()
        };
        let outcome = alternate_check_eval(
            task,
            &task.tests[0],
            &MutationConfig::default(),
            &EvalLimits::default(),
        )
        .unwrap();
        assert!(matches!(outcome, AlternateOutcome::Failed { .. }));
    }

    #[test]
    fn alternate_check_verifies_deterministic_cube_spec() {
        let json = r#"{
  "c": {
    "task_description": "cube",
    "method_signature": "method cubeVolume (size:int) returns (volume:int)",
    "test_cases": {"test_1": "var r:=cubeVolume(5);\nassert r == 125;"}
  }
}"#;
        let mut m = Map::new();
        m.insert(
            "c".to_string(),
            "method cubeVolume(size: int) returns (volume: int)\n  ensures volume == size * size * size\n"
                .to_string(),
        );
        let tasks = load_dataset(json, &MapSpecSource(m)).unwrap();
        let LoadedTask::Parsed(task) = &tasks[0] else {
            panic!()
        };
        let outcome = alternate_check_eval(
            task,
            &task.tests[0],
            &MutationConfig::default(),
            &EvalLimits::default(),
        )
        .unwrap();
        assert_eq!(outcome, AlternateOutcome::Verified);
    }
}
