use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use specjudge::eval::EvalLimits;
use specjudge::metrics::Threshold;
use specjudge::mutation::MutationConfig;
use specjudge::pipeline::{run, BackendChoice, RunConfig};
use specjudge::report::render_summary;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "specjudge", version, about = "Scores candidate Dafny postconditions against input/output tests: per-test correctness plus a completeness score over output mutants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scoring pipeline over a dataset and write a JSON report.
    Run(RunArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Eval,
    Dafny,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Benchmark JSON (map task_id -> record, or array of records).
    #[arg(long)]
    dataset: PathBuf,

    /// Directory of Dafny spec files (<task_id>.dfy and friends), or a
    /// single .dfy file.
    #[arg(long)]
    specs: PathBuf,

    /// Restrict the run to these task ids (repeatable).
    #[arg(long = "task")]
    task: Vec<String>,

    /// Which backend decides the triples.
    #[arg(long, value_enum, default_value = "eval")]
    backend: BackendArg,

    /// Output mutants generated per test.
    #[arg(long, default_value_t = 5)]
    mutants_per_test: usize,

    /// Seed for the deterministic mutant generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// STRONG/WEAK classification threshold (exact decimal).
    #[arg(long, default_value = "0.66")]
    threshold: String,

    /// Per-harness wall-clock timeout for the Dafny backend.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,

    /// Backend-query parallelism (defaults to all logical cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Dafny executable (also settable via SPECJUDGE_DAFNY).
    #[arg(long)]
    dafny_path: Option<PathBuf>,

    /// Curated mutant sidecar: {task_id: {test_id: [literal, ...]}}.
    #[arg(long)]
    curated: Option<PathBuf>,

    /// Labels file: {task_id: "WRONG_SPEC" | "WEAK_SPEC" | "STRONG_SPEC"}.
    #[arg(long)]
    labels: Option<PathBuf>,

    /// Where to write the JSON report.
    #[arg(long)]
    out: PathBuf,

    /// Also write every generated harness (and, under the Dafny backend,
    /// the verifier transcripts) into this directory.
    #[arg(long)]
    emit_harnesses: Option<PathBuf>,

    /// Also run the alternate {x == i && spec} skip {y == o} diagnostic.
    #[arg(long, default_value_t = false)]
    alternate_check: bool,

    /// Evaluator recursion depth limit.
    #[arg(long, default_value_t = 10_000)]
    max_recursion_depth: usize,

    /// Evaluator cap on enumerated quantifier tuples.
    #[arg(long, default_value_t = 1_000_000)]
    max_quantifier_domain: usize,
}

fn main() {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            if let Err(e) = run_command(args) {
                eprintln!("error: {e:#}");
                std::process::exit(2);
            }
        }
    }
}

fn run_command(args: RunArgs) -> anyhow::Result<()> {
    let threshold = Threshold::parse(&args.threshold).context("invalid --threshold")?;
    let cfg = RunConfig {
        dataset: args.dataset,
        specs: args.specs,
        tasks: args.task,
        backend: match args.backend {
            BackendArg::Eval => BackendChoice::Eval,
            BackendArg::Dafny => BackendChoice::Dafny,
            BackendArg::Both => BackendChoice::Both,
        },
        mutation: MutationConfig {
            mutants_per_test: args.mutants_per_test,
            seed: args.seed,
            max_attempts: 64,
        },
        threshold,
        limits: EvalLimits {
            max_recursion_depth: args.max_recursion_depth,
            max_quantifier_domain: args.max_quantifier_domain,
        },
        dafny_path: args.dafny_path,
        timeout_secs: args.timeout_secs,
        jobs: args.jobs,
        out: Some(args.out),
        emit_harnesses: args.emit_harnesses,
        curated: args.curated,
        labels: args.labels,
        alternate_check: args.alternate_check,
    };
    let report = run(&cfg)?;
    print!("{}", render_summary(&report));
    Ok(())
}
