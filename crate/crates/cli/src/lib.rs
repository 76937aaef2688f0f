//! Configuration binding and commands behind the `polytest` binary.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use globset::{Glob, GlobSet, GlobSetBuilder};
use polytest_core::analysis::TypeAllowlist;
use polytest_core::code_model::{CodeModel, Language};
use polytest_core::llm::{ChatModel, HttpChatModel, RecordingModel, ReplayModel};
use polytest_core::naturalness::{naturalness_report, NaturalnessReport, Projects};
use polytest_core::pipeline::{
    build_contexts, enumerate_targets, persist_run, run_pipeline, run_report, FakeToolchain, PipelineConfig,
    PipelineError, RunReport, Status, SubprocessAdapter, ToolchainAdapter,
};
use polytest_core::prompting::{ContextOptions, PromptConfig};
use thiserror::Error;

pub use config::{AdapterConfig, Budgets, GatewayConfig, GatewayMode, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_PASSING: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TOOLCHAIN: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("toolchain: {0}")]
    Toolchain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Toolchain(_) => EXIT_TOOLCHAIN,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) | PipelineError::Prompt(_) | PipelineError::Report { .. } => {
                CliError::Config(e.to_string())
            }
            PipelineError::Gateway(_) | PipelineError::Toolchain(_) | PipelineError::Io { .. } => {
                CliError::Toolchain(e.to_string())
            }
        }
    }
}

fn target_filter(globs: &[String]) -> Result<Option<GlobSet>, CliError> {
    if globs.is_empty() {
        return Ok(None);
    }
    let mut b = GlobSetBuilder::new();
    for g in globs {
        b.add(Glob::new(g).map_err(|e| CliError::Config(format!("target glob `{g}`: {e}")))?);
    }
    b.build().map(Some).map_err(|e| CliError::Config(e.to_string()))
}

fn allowlist(path: Option<&Path>) -> Result<TypeAllowlist, CliError> {
    let Some(path) = path else { return Ok(TypeAllowlist::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    TypeAllowlist::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn gateway(cfg: &GatewayConfig) -> Result<Box<dyn ChatModel>, CliError> {
    let live = || HttpChatModel::live(Duration::from_secs(120)).map_err(|e| CliError::Toolchain(e.to_string()));
    let session = || cfg.session.clone().ok_or_else(|| CliError::Config("missing session directory".into()));
    Ok(match cfg.mode {
        GatewayMode::Live => Box::new(live()?),
        GatewayMode::Record => {
            Box::new(RecordingModel::new(live()?, &session()?).map_err(|e| CliError::Config(e.to_string()))?)
        }
        GatewayMode::Replay => Box::new(ReplayModel::load(&session()?).map_err(|e| CliError::Config(e.to_string()))?),
    })
}

fn adapter(cfg: &AdapterConfig) -> Result<Box<dyn ToolchainAdapter>, CliError> {
    Ok(match cfg {
        AdapterConfig::Fake { path } => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Box::new(FakeToolchain::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)
        }
        AdapterConfig::Subprocess(sub) => Box::new(SubprocessAdapter::new(sub.clone())),
    })
}

#[derive(Debug)]
pub struct GenerateOutcome {
    pub report_path: PathBuf,
    pub report: RunReport,
    pub passing: usize,
    pub targets: usize,
}

impl GenerateOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passing > 0 || self.targets == 0 {
            EXIT_OK
        } else {
            EXIT_NO_PASSING
        }
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateOutcome, CliError> {
    cfg.validate()?;
    let model = CodeModel::load_dir(&cfg.project_root, cfg.language)
        .map_err(|e| CliError::Config(format!("{}: {e}", cfg.project_root.display())))?;
    let filter = target_filter(&cfg.targets)?;
    let include = |name: &str| filter.as_ref().is_none_or(|f| f.is_match(name));
    let context = ContextOptions {
        api_allowlist: allowlist(cfg.mock_allowlist.as_deref())?,
        service_entries: allowlist(cfg.service_entries.as_deref())?,
        ..ContextOptions::default()
    };
    let pipeline = PipelineConfig {
        max_iters: cfg.budgets.max_iters,
        max_rounds: cfg.budgets.max_rounds,
        target_coverage: cfg.budgets.target_coverage,
        workers: cfg.workers,
        sampling: cfg.model.clone(),
        prompt: PromptConfig { guidance: cfg.guidance.clone(), ..PromptConfig::default() },
        context,
        run_id: cfg.run_id.clone(),
        work_dir: None,
    };
    let targets = enumerate_targets(&model, cfg.language, &include);
    let contexts = build_contexts(targets, &model, &pipeline.context)?;
    log::info!("{} targets in {}", contexts.len(), cfg.project_root.display());
    let gateway = gateway(&cfg.gateway)?;
    let adapter = adapter(&cfg.adapter)?;
    let run = run_pipeline(&cfg.project_root, &model, cfg.language, &contexts, gateway.as_ref(), adapter.as_ref(), &pipeline)?;
    let report_path = persist_run(&run, &cfg.output_dir)?;
    Ok(GenerateOutcome { report_path, report: run_report(&run), passing: run.passing_count(), targets: contexts.len() })
}

/// `name=dir` or a bare directory, named after its last component.
pub fn parse_suite_arg(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, dir)) if !name.is_empty() => (name.to_string(), PathBuf::from(dir)),
        _ => {
            let dir = PathBuf::from(arg);
            let name = dir.file_name().map_or_else(|| arg.to_string(), |n| n.to_string_lossy().into_owned());
            (name, dir)
        }
    }
}

pub fn cmd_naturalness(suites: &[(String, PathBuf)], project_root: Option<&Path>) -> Result<NaturalnessReport, CliError> {
    let projects = match project_root {
        Some(root) => {
            if !root.is_dir() {
                return Err(CliError::Config(format!("{} is not a directory", root.display())));
            }
            Projects::load(root).map_err(|e| CliError::Config(format!("{}: {e}", root.display())))?
        }
        None => Projects::default(),
    };
    naturalness_report(suites, &projects).map_err(|e| CliError::Config(e.to_string()))
}

/// Report file of a run directory, or the path itself when it is a file.
pub fn report_path(run: &Path) -> PathBuf {
    if run.is_file() {
        run.to_path_buf()
    } else {
        run.join("report.json")
    }
}

pub const REPORT_COLUMNS: [&str; 8] = ["target", "tests", "passing", "failing", "discarded", "line", "branch", "method"];

/// One row per target, columns in `REPORT_COLUMNS` order.
pub fn render_report(report: &RunReport) -> String {
    let rows: Vec<[String; 8]> = report
        .targets
        .iter()
        .map(|t| {
            let count = |s: Status| t.tests.iter().filter(|e| e.status == s).count().to_string();
            let target = match &t.skipped {
                Some(_) => format!("{} (skipped)", t.target_id),
                None => t.target_id.clone(),
            };
            [
                target,
                t.tests.len().to_string(),
                count(Status::Passing),
                count(Status::Failing),
                count(Status::Discarded),
                format!("{:.4}", t.line_cov),
                format!("{:.4}", t.branch_cov),
                format!("{:.4}", t.method_cov),
            ]
        })
        .collect();
    let mut widths = REPORT_COLUMNS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = format!("run {} ({}, {})\n", report.run_id, report.language.as_str(), report.model_id);
    let line = |cells: &[&str]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        s.trim_end().to_string() + "\n"
    };
    out += &line(&REPORT_COLUMNS);
    for row in &rows {
        out += &line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

pub fn cmd_report(run: &Path) -> Result<String, CliError> {
    let report = RunReport::load(&report_path(run)).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(render_report(&report))
}

pub fn parse_language(s: &str) -> Result<Language, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "java" => Ok(Language::Java),
        "python" | "py" => Ok(Language::Python),
        other => Err(CliError::Config(format!("unsupported language `{other}`; expected java or python"))),
    }
}
