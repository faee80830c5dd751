//! The machine-readable run report (stable JSON) and the informational
//! fixed-width text table.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub run_metadata: RunMetadata,
    pub tasks: Vec<TaskReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tool_version: Option<String>,
    pub mutants_per_test: usize,
    pub threshold: String,
    pub max_recursion_depth: usize,
    pub max_quantifier_domain: usize,
    pub timeout_secs: u64,
    pub dataset: String,
    pub specs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curated: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub task_filter: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub task_id: String,
    /// "ok" or "unparsed".
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_test: Vec<TestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub killed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survived: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unknown_mutants: Option<u64>,
    /// |T2|/|T1| when computed; absent when the gate blocked it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness_absent_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<bool>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub backend_mismatch: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

impl TaskReport {
    pub fn unparsed(task_id: String, diagnostic: String) -> Self {
        TaskReport {
            task_id,
            status: "unparsed".to_string(),
            diagnostic: Some(diagnostic),
            correct: None,
            per_test: Vec::new(),
            t1_size: None,
            killed: None,
            survived: None,
            unknown_mutants: None,
            completeness: None,
            completeness_exact: None,
            completeness_absent_reason: None,
            classification: None,
            label: None,
            agreement: None,
            backend_mismatch: false,
            mismatches: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test_id: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requires_violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kill_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mutants: Vec<MutantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MutantReport {
    pub mutant_id: String,
    pub descriptor: String,
    pub output: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub n_tasks: u64,
    pub n_correct: u64,
    pub n_wrong: u64,
    pub n_undetermined: u64,
    pub n_unparsed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_completeness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_agreement_rate: Option<f64>,
}

/// Stable serialization: struct field order, tasks sorted by id upstream,
/// trailing newline.
pub fn to_json(report: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Fixed-width table, one row per task; informational only.
pub fn render_summary(report: &ReportDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:<9} {:<13} {:<13} {:<12} {:<6}\n",
        "task", "correct", "completeness", "class", "label", "agree"
    ));
    out.push_str(&"-".repeat(70));
    out.push('\n');
    for t in &report.tasks {
        let correct = match (t.status.as_str(), t.correct) {
            ("unparsed", _) => "—".to_string(),
            (_, Some(true)) => "yes".to_string(),
            (_, Some(false)) => "no".to_string(),
            (_, None) => "—".to_string(),
        };
        let completeness = match t.completeness {
            Some(c) => format!("{c:.3}"),
            None => "—".to_string(),
        };
        let class = match t.status.as_str() {
            "unparsed" => "unparsed".to_string(),
            _ => t.classification.clone().unwrap_or_else(|| "—".to_string()),
        };
        let label = t.label.clone().unwrap_or_else(|| "—".to_string());
        let agree = match t.agreement {
            Some(true) => "yes",
            Some(false) => "no",
            None => "—",
        };
        out.push_str(&format!(
            "{:<14} {:<9} {:<13} {:<13} {:<12} {:<6}\n",
            t.task_id, correct, completeness, class, label, agree
        ));
    }
    let s = &report.summary;
    out.push_str(&format!(
        "\n{} task(s): {} correct, {} wrong, {} undetermined, {} unparsed",
        s.n_tasks, s.n_correct, s.n_wrong, s.n_undetermined, s.n_unparsed
    ));
    if let Some(m) = s.mean_completeness {
        out.push_str(&format!("; mean completeness {m:.3}"));
    }
    if let Some(r) = s.label_agreement_rate {
        out.push_str(&format!("; label agreement {r:.3}"));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_report() -> ReportDocument {
        ReportDocument {
            run_metadata: RunMetadata {
                seed: 0,
                backend: "eval".into(),
                tool_version: None,
                mutants_per_test: 5,
                threshold: "66/100".into(),
                max_recursion_depth: 10_000,
                max_quantifier_domain: 1_000_000,
                timeout_secs: 60,
                dataset: "d.json".into(),
                specs: "specs".into(),
                curated: None,
                labels: None,
                task_filter: Vec::new(),
            },
            tasks: vec![
                TaskReport {
                    task_id: "2".into(),
                    status: "ok".into(),
                    diagnostic: None,
                    correct: Some(true),
                    per_test: Vec::new(),
                    t1_size: Some(15),
                    killed: Some(9),
                    survived: Some(6),
                    unknown_mutants: Some(0),
                    completeness: Some(0.6),
                    completeness_exact: Some("9/15".into()),
                    completeness_absent_reason: None,
                    classification: Some("WEAK".into()),
                    label: Some("STRONG_SPEC".into()),
                    agreement: Some(false),
                    backend_mismatch: false,
                    mismatches: Vec::new(),
                },
                TaskReport::unparsed("700".into(), "unsupported type: array2<int>".into()),
            ],
            summary: Summary {
                n_tasks: 2,
                n_correct: 1,
                n_wrong: 0,
                n_undetermined: 0,
                n_unparsed: 1,
                mean_completeness: Some(0.6),
                label_agreement_rate: Some(0.0),
            },
        }
    }

    #[test]
    fn json_is_stable_across_calls() {
        let r = tiny_report();
        assert_eq!(to_json(&r), to_json(&r));
        assert!(to_json(&r).ends_with('\n'));
    }

    #[test]
    fn absent_completeness_renders_as_dash() {
        let mut r = tiny_report();
        r.tasks[0].completeness = None;
        let table = render_summary(&r);
        let row = table.lines().nth(2).unwrap();
        assert!(row.contains('—'), "{row}");
    }

    #[test]
    fn table_has_header_and_one_row_per_task() {
        let r = tiny_report();
        let table = render_summary(&r);
        assert!(table.lines().next().unwrap().contains("completeness"));
        assert!(table.contains("\n2 "));
        assert!(table.contains("\n700 "));
        assert!(table.contains("unparsed"));
    }
}
