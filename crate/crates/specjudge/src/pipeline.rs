//! End-to-end pipeline: load dataset -> parse -> mutate -> check triples
//! (evaluator and/or Dafny) -> score -> report. Task- and mutant-level
//! parallelism is confined to backend queries; everything else is
//! sequential and deterministic, so the report is a pure function of
//! (dataset, specs, seed, config).

use crate::dafny::{probe_tool, DafnyRunner, ToolProbe};
use crate::dataset::{
    coerce_curated, load_curated, load_dataset, load_labels, CuratedSidecar, DatasetError,
    DirSpecSource, LoadedTask, SpecLabel, TaskRecord,
};
use crate::eval::{check_requires, Environment, EvalLimits};
use crate::harness::{gen_alternate_harness, gen_completeness_harness, gen_correctness_harness};
use crate::metrics::{
    agrees, alternate_check_eval, classify, completeness, correctness, AlternateOutcome, Completeness, DafnyBackend, EvalBackend, GateViolation, MutantVerdict,
    TestVerdict, Threshold, TripleBackend,
};
use crate::mutation::{curated_mutants, generate_mutants, MutantCase, MutationConfig};
use crate::report::{
    MutantReport, ReportDocument, RunMetadata, Summary, TaskReport, TestReport,
};
use crate::value::render_dafny_literal;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    #[default]
    Eval,
    Dafny,
    Both,
}

impl BackendChoice {
    pub fn needs_dafny(self) -> bool {
        matches!(self, BackendChoice::Dafny | BackendChoice::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            BackendChoice::Eval => "eval",
            BackendChoice::Dafny => "dafny",
            BackendChoice::Both => "both",
        }
    }
}

/// Environment variable that overrides the Dafny tool path.
pub const DAFNY_PATH_ENV: &str = "SPECJUDGE_DAFNY";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub specs: PathBuf,
    /// Empty means all tasks.
    pub tasks: Vec<String>,
    pub backend: BackendChoice,
    pub mutation: MutationConfig,
    pub threshold: Threshold,
    pub limits: EvalLimits,
    pub dafny_path: Option<PathBuf>,
    pub timeout_secs: u64,
    /// Backend-query parallelism; None uses all logical cores. Ignored in
    /// a build without the `parallel` feature.
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_harnesses: Option<PathBuf>,
    pub curated: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub alternate_check: bool,
}

impl RunConfig {
    pub fn new(dataset: impl Into<PathBuf>, specs: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset: dataset.into(),
            specs: specs.into(),
            tasks: Vec::new(),
            backend: BackendChoice::Eval,
            mutation: MutationConfig::default(),
            threshold: Threshold::default(),
            limits: EvalLimits::default(),
            dafny_path: None,
            timeout_secs: 60,
            jobs: None,
            out: None,
            emit_harnesses: None,
            curated: None,
            labels: None,
            alternate_check: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn read(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the full pipeline and (when configured) writes the JSON report.
/// Disagreements with labels are data, not errors.
pub fn run(cfg: &RunConfig) -> Result<ReportDocument, RunError> {
    let dataset_text = read(&cfg.dataset)?;
    let labels = match &cfg.labels {
        Some(p) => Some(load_labels(&read(p)?)?),
        None => None,
    };
    let curated = match &cfg.curated {
        Some(p) => Some(load_curated(&read(p)?)?),
        None => None,
    };

    // the Dafny tool must resolve at startup when a Dafny backend is chosen
    let dafny = if cfg.backend.needs_dafny() {
        let path = resolve_dafny_path(cfg);
        match probe_tool(&path) {
            ToolProbe::Available { version, style } => Some((path, version, style)),
            ToolProbe::Absent { reason } => {
                return Err(RunError::Config(format!(
                    "backend `{}` needs the Dafny tool: {reason}",
                    cfg.backend.name()
                )))
            }
        }
    } else {
        None
    };

    let spec_source = DirSpecSource::new(&cfg.specs);
    let mut tasks = load_dataset(&dataset_text, &spec_source)?;
    if !cfg.tasks.is_empty() {
        tasks.retain(|t| cfg.tasks.iter().any(|id| id == t.task_id()));
    }

    if let Some(dir) = &cfg.emit_harnesses {
        std::fs::create_dir_all(dir)?;
    }

    let scratch = tempfile::tempdir()?;
    let dafny_backend = dafny.as_ref().map(|(path, _, style)| DafnyBackend {
        runner: DafnyRunner::new(
            path.clone(),
            Duration::from_secs(cfg.timeout_secs),
            *style,
        ),
        scratch: scratch.path().to_path_buf(),
        persist: cfg.emit_harnesses.clone(),
    });
    let eval_backend = EvalBackend { limits: cfg.limits };

    let ctx = TaskContext {
        cfg,
        labels: labels.as_ref(),
        curated: curated.as_ref(),
        eval_backend: &eval_backend,
        dafny_backend: dafny_backend.as_ref(),
    };

    let task_reports = run_tasks(&ctx, &tasks)?;

    let summary = summarize(&task_reports);
    let report = ReportDocument {
        run_metadata: RunMetadata {
            seed: cfg.mutation.seed,
            backend: cfg.backend.name().to_string(),
            tool_version: dafny.as_ref().map(|(_, v, _)| v.clone()),
            mutants_per_test: cfg.mutation.mutants_per_test,
            threshold: cfg.threshold.to_string(),
            max_recursion_depth: cfg.limits.max_recursion_depth,
            max_quantifier_domain: cfg.limits.max_quantifier_domain,
            timeout_secs: cfg.timeout_secs,
            dataset: cfg.dataset.display().to_string(),
            specs: cfg.specs.display().to_string(),
            curated: cfg.curated.as_ref().map(|p| p.display().to_string()),
            labels: cfg.labels.as_ref().map(|p| p.display().to_string()),
            task_filter: cfg.tasks.clone(),
        },
        tasks: task_reports,
        summary,
    };

    if let Some(out) = &cfg.out {
        std::fs::write(out, crate::report::to_json(&report))?;
    }
    Ok(report)
}

fn resolve_dafny_path(cfg: &RunConfig) -> PathBuf {
    if let Some(p) = &cfg.dafny_path {
        return p.clone();
    }
    if let Ok(p) = std::env::var(DAFNY_PATH_ENV) {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    PathBuf::from("dafny")
}

struct TaskContext<'a> {
    cfg: &'a RunConfig,
    labels: Option<&'a BTreeMap<String, SpecLabel>>,
    curated: Option<&'a CuratedSidecar>,
    eval_backend: &'a EvalBackend,
    dafny_backend: Option<&'a DafnyBackend>,
}

/// Processes every task; with the `parallel` feature, inside a rayon pool
/// sized by `jobs` (collection preserves task order, keeping the report
/// deterministic).
fn run_tasks(ctx: &TaskContext, tasks: &[LoadedTask]) -> Result<Vec<TaskReport>, RunError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(jobs) = ctx.cfg.jobs {
            builder = builder.num_threads(jobs.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| RunError::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(|| {
            tasks
                .par_iter()
                .map(|t| run_one_task(ctx, t))
                .collect::<Result<Vec<_>, _>>()
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        tasks.iter().map(|t| run_one_task(ctx, t)).collect()
    }
}

fn run_one_task(ctx: &TaskContext, loaded: &LoadedTask) -> Result<TaskReport, RunError> {
    let task = match loaded {
        LoadedTask::Parsed(task) => task,
        LoadedTask::Unparsed {
            task_id,
            diagnostic,
        } => {
            return Ok(TaskReport::unparsed(task_id.clone(), diagnostic.clone()));
        }
    };

    let mutants = mutants_for(ctx, task)?;
    emit_harness_files(ctx, task, &mutants)?;

    // the eval backend also supplies the requires diagnostics
    let requires_violations: BTreeMap<String, String> = task
        .tests
        .iter()
        .filter_map(|t| {
            let env = Environment::for_inputs(&task.signature, &t.inputs).ok()?;
            let vs = check_requires(&task.spec, &env, &ctx.cfg.limits);
            vs.first().map(|v| {
                (
                    t.id.clone(),
                    format!("requires {}: {}", v.clause, v.detail),
                )
            })
        })
        .collect();

    let (primary_correct, primary_complete, mismatches) = match ctx.cfg.backend {
        BackendChoice::Eval => {
            let c = correctness(task, ctx.eval_backend);
            let k = completeness_or_reason(task, &mutants, ctx.eval_backend, &c);
            (c, k, Vec::new())
        }
        BackendChoice::Dafny => {
            let backend = ctx.dafny_backend.expect("resolved at startup");
            let c = correctness(task, backend);
            let k = completeness_or_reason(task, &mutants, backend, &c);
            (c, k, Vec::new())
        }
        BackendChoice::Both => {
            let ec = correctness(task, ctx.eval_backend);
            let ek = completeness_or_reason(task, &mutants, ctx.eval_backend, &ec);
            let backend = ctx.dafny_backend.expect("resolved at startup");
            let dc = correctness(task, backend);
            let dk = completeness_or_reason(task, &mutants, backend, &dc);
            let mismatches = cross_check(&ec, &ek, &dc, &dk);
            (ec, ek, mismatches)
        }
    };

    let completeness_result = primary_complete.as_ref().ok();
    let classification = classify(
        &primary_correct,
        completeness_result,
        ctx.cfg.threshold,
    );
    let effective_label = ctx
        .labels
        .and_then(|m| m.get(&task.task_id).copied())
        .or(task.label);
    let agreement = effective_label.map(|l| agrees(classification, l));

    let alternate: BTreeMap<String, String> = if ctx.cfg.alternate_check {
        task.tests
            .iter()
            .map(|t| {
                let outcome = match alternate_check_eval(
                    task,
                    t,
                    &ctx.cfg.mutation,
                    &ctx.cfg.limits,
                ) {
                    Ok(AlternateOutcome::Failed { witness }) => format!(
                        "failed (witness {})",
                        witness
                            .iter()
                            .map(|v| render_dafny_literal(v, false))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                    Ok(o) => o.to_string(),
                    Err(e) => format!("unsupported: {e}"),
                };
                (t.id.clone(), outcome)
            })
            .collect()
    } else {
        BTreeMap::new()
    };

    let per_mutant: BTreeMap<&str, &MutantVerdict> = completeness_result
        .map(|c| c.per_mutant.iter().map(|(id, v)| (id.as_str(), v)).collect())
        .unwrap_or_default();

    let per_test: Vec<TestReport> = task
        .tests
        .iter()
        .map(|t| {
            let verdict = primary_correct.get(&t.id).expect("verdict per test");
            let (verdict_str, diagnosis) = match verdict {
                TestVerdict::Correct => ("correct".to_string(), None),
                TestVerdict::Incorrect => ("incorrect".to_string(), None),
                TestVerdict::Unknown(d) => ("unknown".to_string(), Some(d.clone())),
            };
            let test_mutants: Vec<MutantReport> = mutants
                .iter()
                .filter(|m| m.parent_test_id == t.id)
                .map(|m| {
                    let (verdict, diagnosis) = match per_mutant.get(m.id.as_str()) {
                        Some(MutantVerdict::Killed) => ("killed".to_string(), None),
                        Some(MutantVerdict::Survived) => ("survived".to_string(), None),
                        Some(MutantVerdict::Unknown(d)) => {
                            ("unknown".to_string(), Some(d.clone()))
                        }
                        None => ("not_checked".to_string(), None),
                    };
                    MutantReport {
                        mutant_id: m.id.clone(),
                        descriptor: m.descriptor.to_string(),
                        output: m
                            .mutated_expected
                            .iter()
                            .map(|v| render_dafny_literal(v, false))
                            .collect::<Vec<_>>()
                            .join(", "),
                        verdict,
                        diagnosis,
                    }
                })
                .collect();
            let kill_fraction = completeness_result.and_then(|_| {
                let total = test_mutants.len() as f64;
                if total == 0.0 {
                    return None;
                }
                let killed = test_mutants
                    .iter()
                    .filter(|m| m.verdict == "killed")
                    .count() as f64;
                Some(killed / total)
            });
            TestReport {
                test_id: t.id.clone(),
                verdict: verdict_str,
                diagnosis,
                requires_violation: requires_violations.get(&t.id).cloned(),
                kill_fraction,
                mutants: test_mutants,
                alternate: alternate.get(&t.id).cloned(),
            }
        })
        .collect();

    let all_correct = primary_correct
        .values()
        .all(|v| matches!(v, TestVerdict::Correct));
    Ok(TaskReport {
        task_id: task.task_id.clone(),
        status: "ok".to_string(),
        diagnostic: None,
        correct: Some(all_correct),
        per_test,
        t1_size: Some(mutants.len() as u64),
        killed: completeness_result.map(|c| c.killed),
        survived: completeness_result.map(|c| c.survived),
        unknown_mutants: completeness_result.map(|c| c.unknown),
        completeness: completeness_result.map(Completeness::score_f64),
        completeness_exact: completeness_result.map(|c| format!("{}/{}", c.killed, c.t1_size)),
        completeness_absent_reason: primary_complete.as_ref().err().map(ToString::to_string),
        classification: Some(classification.to_string()),
        label: effective_label.map(|l| l.to_string()),
        agreement,
        backend_mismatch: !mismatches.is_empty(),
        mismatches,
    })
}

fn completeness_or_reason<B: TripleBackend>(
    task: &TaskRecord,
    mutants: &[MutantCase],
    backend: &B,
    verdicts: &BTreeMap<String, TestVerdict>,
) -> Result<Completeness, GateViolation> {
    completeness(task, mutants, backend, verdicts)
}

/// Curated sets from the sidecar take precedence per test; every other
/// test gets seeded generated mutants.
fn mutants_for(ctx: &TaskContext, task: &TaskRecord) -> Result<Vec<MutantCase>, RunError> {
    let curated_for_task = ctx.curated.and_then(|c| c.get(&task.task_id));
    if let Some(per_test) = curated_for_task {
        for test_id in per_test.keys() {
            if task.test(test_id).is_none() {
                return Err(RunError::Config(format!(
                    "curated mutants reference unknown test {test_id} of task {}",
                    task.task_id
                )));
            }
        }
    }
    let mut out = Vec::new();
    for test in &task.tests {
        match curated_for_task.and_then(|m| m.get(&test.id)) {
            Some(tuples) => {
                let tuples = coerce_curated(tuples, task).map_err(|e| {
                    RunError::Config(format!(
                        "curated mutants for {}/{}: {e}",
                        task.task_id, test.id
                    ))
                })?;
                let ms = curated_mutants(test, &tuples).map_err(|e| {
                    RunError::Config(format!(
                        "curated mutants for {}/{}: {e}",
                        task.task_id, test.id
                    ))
                })?;
                out.extend(ms);
            }
            None => out.extend(generate_mutants(&task.task_id, test, &ctx.cfg.mutation)),
        }
    }
    Ok(out)
}

fn emit_harness_files(
    ctx: &TaskContext,
    task: &TaskRecord,
    mutants: &[MutantCase],
) -> Result<(), RunError> {
    let Some(dir) = &ctx.cfg.emit_harnesses else {
        return Ok(());
    };
    let mut harnesses = Vec::new();
    for test in &task.tests {
        harnesses.push(gen_correctness_harness(task, test));
        if ctx.cfg.alternate_check {
            if let Ok(h) = gen_alternate_harness(task, test) {
                harnesses.push(h);
            }
        }
    }
    for m in mutants {
        harnesses.push(
            gen_completeness_harness(task, m)
                .map_err(|e| RunError::Config(format!("task {}: {e}", task.task_id)))?,
        );
    }
    for h in harnesses {
        // UTF-8, LF line endings
        std::fs::write(dir.join(format!("{}.dfy", h.file_stem())), &h.source)?;
    }
    Ok(())
}

/// Definite verdicts from the two backends must agree; disagreements are
/// annotated, never fatal.
fn cross_check(
    eval_correct: &BTreeMap<String, TestVerdict>,
    eval_complete: &Result<Completeness, GateViolation>,
    dafny_correct: &BTreeMap<String, TestVerdict>,
    dafny_complete: &Result<Completeness, GateViolation>,
) -> Vec<String> {
    let mut out = Vec::new();
    for (test_id, ev) in eval_correct {
        let Some(dv) = dafny_correct.get(test_id) else {
            continue;
        };
        let definite = |v: &TestVerdict| match v {
            TestVerdict::Correct => Some(true),
            TestVerdict::Incorrect => Some(false),
            TestVerdict::Unknown(_) => None,
        };
        if let (Some(a), Some(b)) = (definite(ev), definite(dv)) {
            if a != b {
                out.push(format!(
                    "test {test_id}: eval says {ev}, dafny says {dv}"
                ));
            }
        }
    }
    if let (Ok(ec), Ok(dc)) = (eval_complete, dafny_complete) {
        let dafny_map: BTreeMap<&str, &MutantVerdict> = dc
            .per_mutant
            .iter()
            .map(|(id, v)| (id.as_str(), v))
            .collect();
        for (id, ev) in &ec.per_mutant {
            let Some(dv) = dafny_map.get(id.as_str()) else {
                continue;
            };
            let definite = |v: &MutantVerdict| match v {
                MutantVerdict::Killed => Some(false),
                MutantVerdict::Survived => Some(true),
                MutantVerdict::Unknown(_) => None,
            };
            if let (Some(a), Some(b)) = (definite(ev), definite(dv)) {
                if a != b {
                    out.push(format!(
                        "mutant {id}: eval says {ev}, dafny says {dv}"
                    ));
                }
            }
        }
    }
    out
}

fn summarize(tasks: &[TaskReport]) -> Summary {
    let mut n_correct = 0;
    let mut n_wrong = 0;
    let mut n_undetermined = 0;
    let mut n_unparsed = 0;
    let mut completeness_sum = 0.0;
    let mut completeness_n = 0u64;
    let mut label_matches = 0u64;
    let mut label_total = 0u64;
    for t in tasks {
        if t.status == "unparsed" {
            n_unparsed += 1;
            continue;
        }
        match t.classification.as_deref() {
            Some("WRONG") => n_wrong += 1,
            Some("UNDETERMINED") => n_undetermined += 1,
            _ => {}
        }
        if t.correct == Some(true) {
            n_correct += 1;
        }
        if let Some(c) = t.completeness {
            completeness_sum += c;
            completeness_n += 1;
        }
        if let Some(agree) = t.agreement {
            label_total += 1;
            if agree {
                label_matches += 1;
            }
        }
    }
    Summary {
        n_tasks: tasks.len() as u64,
        n_correct,
        n_wrong,
        n_undetermined,
        n_unparsed,
        mean_completeness: if completeness_n > 0 {
            Some(completeness_sum / completeness_n as f64)
        } else {
            None
        },
        label_agreement_rate: if label_total > 0 {
            Some(label_matches as f64 / label_total as f64)
        } else {
            None
        },
    }
}
