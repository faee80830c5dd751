//! specjudge scores how well a candidate formal postcondition captures the
//! behaviour fixed by a set of input/output tests.
//!
//! Two metrics are computed per task:
//!
//! - **correctness**: for every test (i, o), the triple
//!   `{true} x := i; y := o; {spec(x, y)}` must hold;
//! - **completeness**: the fraction of output mutants (i, o') the spec
//!   refutes, computed only after the spec is correct on every test.
//!
//! Both metrics can be decided by the built-in concrete evaluator (the
//! default backend, no external tools) or by generating self-contained
//! Dafny harness programs and driving the Dafny verifier over them; the two
//! backends are cross-checked in `--backend both` mode.

pub mod ast;
pub mod dafny;
pub mod dataset;
pub mod domain;
pub mod eval;
pub mod harness;
pub mod lexer;
pub mod metrics;
pub mod mutation;
pub mod parser;
pub mod pipeline;
pub mod report;
pub mod typecheck;
pub mod value;

pub use ast::{Expr, FunctionDef, MethodSignature, Param, SpecClause, SpecUnit};
pub use dataset::{LoadedTask, SpecLabel, TaskRecord, TestCase};
pub use eval::{eval_expr, eval_spec, Environment, EvalError, EvalLimits};
pub use metrics::{Classification, Threshold};
pub use mutation::{MutantCase, MutationConfig};
pub use pipeline::{BackendChoice, RunConfig};
pub use value::{values_equal, Comparator, ConcreteValue, ValueType};
