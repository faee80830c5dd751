//! Drives the external Dafny verifier over generated harnesses and
//! classifies its outcomes.
//!
//! Classification is a pure function of (exit status, stdout, stderr,
//! timed-out flag) so the mapping is testable against recorded transcripts
//! without the tool installed. Only a definite proof of all obligations is
//! Verified and only a definite assertion/postcondition violation is
//! Failed; timeouts, resource-outs, parse errors and unrecognized output
//! are Unknown with a reason.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifierVerdict {
    Verified,
    Failed,
    Unknown,
}

impl fmt::Display for VerifierVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifierVerdict::Verified => "verified",
            VerifierVerdict::Failed => "failed",
            VerifierVerdict::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeReason {
    ProofFailure(String),
    Timeout,
    ToolError(String),
    ParseError(String),
}

impl fmt::Display for OutcomeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeReason::ProofFailure(m) => write!(f, "proof failure: {m}"),
            OutcomeReason::Timeout => write!(f, "timeout"),
            OutcomeReason::ToolError(m) => write!(f, "tool error: {m}"),
            OutcomeReason::ParseError(m) => write!(f, "parse error: {m}"),
        }
    }
}

/// Outcome of one verifier run. `Verified` carries no reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierOutcome {
    pub verdict: VerifierVerdict,
    pub reason: Option<OutcomeReason>,
    pub wall_time: Duration,
    pub stdout: String,
    pub stderr: String,
}

/// Maps captured tool output to a verdict. Pure; fixture-tested.
pub fn classify_output(
    exit_code: Option<i32>,
    stdout: &str,
    stderr: &str,
    timed_out: bool,
) -> (VerifierVerdict, Option<OutcomeReason>) {
    if timed_out {
        return (VerifierVerdict::Unknown, Some(OutcomeReason::Timeout));
    }
    let combined = format!("{stdout}\n{stderr}");

    if combined.contains("parse errors detected")
        || combined.contains("resolution/type errors detected")
    {
        let excerpt = first_error_line(&combined).unwrap_or("parse/resolution error");
        return (
            VerifierVerdict::Unknown,
            Some(OutcomeReason::ParseError(excerpt.to_string())),
        );
    }

    if let Some(summary) = combined
        .lines()
        .rev()
        .find(|l| l.contains("program verifier finished with"))
    {
        let errors = summary_count(summary, "error");
        let timeouts = summary_count(summary, "time out")
            + summary_count(summary, "timed out")
            + summary_count(summary, "out of resource");
        let inconclusive = summary_count(summary, "inconclusive");
        if errors > 0 {
            let excerpt = first_error_line(&combined).unwrap_or(summary);
            return (
                VerifierVerdict::Failed,
                Some(OutcomeReason::ProofFailure(excerpt.to_string())),
            );
        }
        if timeouts > 0 {
            return (VerifierVerdict::Unknown, Some(OutcomeReason::Timeout));
        }
        if inconclusive > 0 {
            return (
                VerifierVerdict::Unknown,
                Some(OutcomeReason::ToolError(format!(
                    "{inconclusive} inconclusive obligation(s)"
                ))),
            );
        }
        return (VerifierVerdict::Verified, None);
    }

    let detail = match exit_code {
        Some(code) => format!(
            "exit status {code} with unrecognized output: {}",
            excerpt(&combined)
        ),
        None => format!("killed by signal; output: {}", excerpt(&combined)),
    };
    (
        VerifierVerdict::Unknown,
        Some(OutcomeReason::ToolError(detail)),
    )
}

/// Number preceding the first occurrence of `keyword` in a summary line,
/// e.g. `... finished with 3 verified, 1 error` -> 1 for "error".
fn summary_count(line: &str, keyword: &str) -> u64 {
    let Some(pos) = line.find(keyword) else {
        return 0;
    };
    line[..pos]
        .split_whitespace()
        .rev()
        .find_map(|tok| tok.trim_matches(',').parse::<u64>().ok())
        .unwrap_or(0)
}

fn first_error_line(text: &str) -> Option<&str> {
    text.lines()
        .map(str::trim)
        .find(|l| l.contains(": Error") || l.starts_with("Error:"))
}

fn excerpt(text: &str) -> String {
    let t: String = text.chars().take(200).collect();
    t.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whether the installed tool takes modern (`dafny verify ...`) or legacy
/// (`dafny /compile:0 ...`) arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliStyle {
    Modern,
    Legacy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToolProbe {
    Available { version: String, style: CliStyle },
    Absent { reason: String },
}

impl ToolProbe {
    pub fn version(&self) -> Option<&str> {
        match self {
            ToolProbe::Available { version, .. } => Some(version),
            ToolProbe::Absent { .. } => None,
        }
    }
}

/// Runs `--version` (then legacy `/version`) and decides availability from
/// the output; absence is a value, not an error.
pub fn probe_tool(tool_path: &Path) -> ToolProbe {
    let attempts: [&[&str]; 2] = [&["--version"], &["/version"]];
    let mut last_reason = String::new();
    for args in attempts {
        match run_with_timeout(tool_path, args, Duration::from_secs(10)) {
            Ok(run) if !run.timed_out => {
                let line = run
                    .stdout
                    .lines()
                    .chain(run.stderr.lines())
                    .map(str::trim)
                    .find(|l| !l.is_empty())
                    .unwrap_or("");
                if let Some(style) = version_style(line) {
                    return ToolProbe::Available {
                        version: line.to_string(),
                        style,
                    };
                }
                last_reason = format!(
                    "unrecognized version output from {}: {}",
                    tool_path.display(),
                    excerpt(&format!("{} {}", run.stdout, run.stderr))
                );
            }
            Ok(_) => last_reason = format!("{} timed out on version probe", tool_path.display()),
            Err(e) => last_reason = format!("cannot run {}: {e}", tool_path.display()),
        }
    }
    ToolProbe::Absent {
        reason: last_reason,
    }
}

/// Accepts `Dafny 3.13.1.41103` (legacy) or a bare `4.4.0+...` (modern).
fn version_style(line: &str) -> Option<CliStyle> {
    let lower = line.to_ascii_lowercase();
    let digits = line.chars().find(|c| c.is_ascii_digit())?;
    let version_part = &line[line.find(digits)?..];
    let major: u32 = version_part
        .split(['.', '+', ' '])
        .next()?
        .parse()
        .ok()?;
    if !(lower.contains("dafny") || line.trim().starts_with(|c: char| c.is_ascii_digit())) {
        return None;
    }
    Some(if major <= 3 {
        CliStyle::Legacy
    } else {
        CliStyle::Modern
    })
}

#[derive(Debug, Error)]
pub enum DafnyError {
    #[error("cannot write harness file: {0}")]
    Io(#[from] std::io::Error),
}

/// One verifier invocation per harness, bounded by a wall-clock timeout;
/// the child is always reaped.
#[derive(Debug, Clone)]
pub struct DafnyRunner {
    pub tool_path: PathBuf,
    pub timeout: Duration,
    pub style: CliStyle,
}

impl DafnyRunner {
    pub fn new(tool_path: PathBuf, timeout: Duration, style: CliStyle) -> Self {
        DafnyRunner {
            tool_path,
            timeout,
            style,
        }
    }

    /// Writes the harness under `scratch` and runs the verifier on it.
    pub fn verify(
        &self,
        harness: &crate::harness::Harness,
        scratch: &Path,
    ) -> Result<VerifierOutcome, DafnyError> {
        let file = scratch.join(format!("{}.dfy", harness.file_stem()));
        std::fs::write(&file, &harness.source)?;
        let secs = self.timeout.as_secs().max(1).to_string();
        let file_str = file.display().to_string();
        let args: Vec<String> = match self.style {
            CliStyle::Modern => vec![
                "verify".into(),
                "--verification-time-limit".into(),
                secs,
                file_str,
            ],
            CliStyle::Legacy => vec![
                "/compile:0".into(),
                format!("/timeLimit:{secs}"),
                file_str,
            ],
        };
        let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let started = Instant::now();
        let run = run_with_timeout(&self.tool_path, &arg_refs, self.timeout)
            .map_err(DafnyError::Io)?;
        let (verdict, reason) =
            classify_output(run.exit_code, &run.stdout, &run.stderr, run.timed_out);
        Ok(VerifierOutcome {
            verdict,
            reason,
            wall_time: started.elapsed(),
            stdout: run.stdout,
            stderr: run.stderr,
        })
    }
}

struct ChildRun {
    exit_code: Option<i32>,
    stdout: String,
    stderr: String,
    timed_out: bool,
}

#[cfg(unix)]
fn kill_group(child: &mut std::process::Child) {
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_group(child: &mut std::process::Child) {
    let _ = child.kill();
}

/// Spawns the command with piped output, polls until the deadline, kills
/// and reaps on timeout. Reader threads drain the pipes so the child never
/// blocks on a full pipe. The child runs as its own process group and the
/// whole group is killed on timeout, so verifier-spawned solver processes
/// do not linger holding the pipes.
fn run_with_timeout(
    program: &Path,
    args: &[&str],
    timeout: Duration,
) -> std::io::Result<ChildRun> {
    let mut cmd = Command::new(program);
    cmd.args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let mut child = cmd.spawn()?;

    let mut out_pipe = child.stdout.take().expect("piped stdout");
    let mut err_pipe = child.stderr.take().expect("piped stderr");
    let out_thread = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = out_pipe.read_to_string(&mut buf);
        buf
    });
    let err_thread = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = err_pipe.read_to_string(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout;
    let mut timed_out = false;
    let exit_code = loop {
        match child.try_wait()? {
            Some(status) => break status.code(),
            None => {
                if Instant::now() >= deadline {
                    timed_out = true;
                    kill_group(&mut child);
                    let status = child.wait()?; // reap, never orphan
                    break status.code();
                }
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    };
    let stdout = out_thread.join().unwrap_or_default();
    let stderr = err_thread.join().unwrap_or_default();
    Ok(ChildRun {
        exit_code,
        stdout,
        stderr,
        timed_out,
    })
}
