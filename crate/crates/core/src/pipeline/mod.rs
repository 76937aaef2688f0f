//! Sanitize, check, repair, execute and augment generated tests.

mod artifact;
mod coverage;
mod diagnostic;
mod driver;
mod repair;
mod sanitize;
mod toolchain;

use std::path::PathBuf;

use thiserror::Error;

pub use artifact::{phase, split_outcomes, HistoryEntry, IllegalTransition, Status, TestArtifact};
pub use coverage::{
    infer_method_coverage, parse_coverage_py_json, parse_jacoco_xml, CoverageError, CoverageReport, FileCoverage,
    MethodCoverage, RegionCoverage,
};
pub use diagnostic::{Diagnostic, Phase, Severity};
pub use driver::{
    build_contexts, derive_run_id, enumerate_targets, persist_run, process_target, run_pipeline, run_report,
    target_dir_name, test_slot, PipelineConfig, RunReport, RunResult, TargetEntry, TargetResult, TestEntry,
};
pub use repair::{
    augment_coverage, normalize_test, repair_loop, sanitize_artifact, AugmentConfig, Augmented, Exchange, RoundLog,
    Session,
};
pub use sanitize::{sanitize, Unsalvageable};
pub use toolchain::{
    parse_check_output, CheckFormat, CoverageFormat, CoverageRule, FailureRule, FakeToolchain, Sandbox, StaticRule,
    SubprocessAdapter, SubprocessConfig, TestFile, TestRun, ToolchainAdapter, ToolchainError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Gateway(#[from] crate::llm::GatewayError),
    #[error(transparent)]
    Toolchain(#[from] ToolchainError),
    #[error(transparent)]
    Prompt(#[from] crate::prompting::PromptError),
    #[error(transparent)]
    Config(#[from] crate::analysis::ConfigError),
    #[error("I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad run report {path}: {message}")]
    Report { path: PathBuf, message: String },
}
