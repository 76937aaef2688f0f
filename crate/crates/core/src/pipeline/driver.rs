use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::artifact::{split_outcomes, Status, TestArtifact};
use super::coverage::infer_method_coverage;
use super::repair::{augment_coverage, repair_loop, sanitize_artifact, AugmentConfig, Exchange, RoundLog, Session};
use super::toolchain::{Sandbox, ToolchainAdapter};
use super::PipelineError;
use crate::analysis::{compute_module_scope, compute_testing_scope};
use crate::code_model::{CodeModel, Language};
use crate::llm::{ChatModel, SamplingConfig};
use crate::prompting::{build_generation_prompt, ContextOptions, FocalContext, FocalUnit, PromptConfig, PromptError};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub max_iters: u32,
    pub max_rounds: u32,
    pub target_coverage: f64,
    /// Worker threads; targets beyond this wait for a free worker.
    pub workers: usize,
    pub sampling: SamplingConfig,
    pub prompt: PromptConfig,
    pub context: ContextOptions,
    /// Fixed run id; derived from the inputs when absent.
    pub run_id: Option<String>,
    /// Parent of per-target sandboxes; a temporary directory when absent.
    pub work_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_iters: 3,
            max_rounds: 4,
            target_coverage: 0.8,
            workers: 4,
            sampling: SamplingConfig::default(),
            prompt: PromptConfig::default(),
            context: ContextOptions::default(),
            run_id: None,
            work_dir: None,
        }
    }
}

fn is_test_path(path: &str, language: Language) -> bool {
    let file = path.rsplit('/').next().unwrap_or(path);
    match language {
        Language::Java => path.contains("src/test/") || file.ends_with("Test.java") || file.ends_with("Tests.java"),
        Language::Python => {
            file.starts_with("test_") || file.ends_with("_test.py") || file == "conftest.py" || path.starts_with("tests/")
        }
    }
}

/// Generation targets of a project: testing scopes of every named class
/// for Java, every non-empty module for Python. `include` filters by
/// qualified class name or module name.
pub fn enumerate_targets<'m>(
    model: &'m CodeModel,
    language: Language,
    include: &dyn Fn(&str) -> bool,
) -> Vec<FocalUnit<'m>> {
    let mut out = Vec::new();
    for unit in model.units().iter().filter(|u| u.language == language && !is_test_path(&u.path, language)) {
        match language {
            Language::Java => {
                for decl in unit.types.iter().filter(|t| !t.is_anonymous) {
                    if include(&decl.qualified_name) {
                        out.extend(compute_testing_scope(decl, model).into_iter().map(FocalUnit::Method));
                    }
                }
            }
            Language::Python => {
                let target = compute_module_scope(unit);
                if target.member_count() > 0 && include(target.name()) {
                    out.push(FocalUnit::Module(target));
                }
            }
        }
    }
    out
}

pub fn build_contexts<'m>(
    targets: Vec<FocalUnit<'m>>,
    model: &'m CodeModel,
    options: &ContextOptions,
) -> Result<Vec<FocalContext<'m>>, PipelineError> {
    targets
        .into_iter()
        .map(|t| match t {
            FocalUnit::Method(m) => Ok(FocalContext::for_method(m, model, options)),
            FocalUnit::Module(m) => Ok(FocalContext::for_module(m, model, options)?),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TargetResult {
    pub target_id: String,
    pub tests: Vec<TestArtifact>,
    pub line_cov: f64,
    pub branch_cov: f64,
    pub method_cov: f64,
    pub rounds: Vec<RoundLog>,
    pub transcript: Vec<Exchange>,
    /// Why the target produced no prompt, if it did not.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: String,
    pub language: Language,
    pub model_id: String,
    pub targets: Vec<TargetResult>,
}

impl RunResult {
    pub fn passing_count(&self) -> usize {
        self.targets.iter().map(|t| split_outcomes(&t.tests).0.len()).sum()
    }
}

/// Directory-safe form of a target id.
pub fn target_dir_name(target_id: &str) -> String {
    let s: String =
        target_id.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect();
    s.trim_end_matches('_').to_string()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Id and path of the `n`-th (1-based) test file of a target.
pub fn test_slot(ctx: &FocalContext<'_>, n: usize) -> (String, String) {
    let suffix = if n > 1 { n.to_string() } else { String::new() };
    match &ctx.target {
        FocalUnit::Method(t) => {
            let stem = format!("{}{}Test{suffix}", t.focal_class.simple_name.replace('$', ""), capitalize(&t.focal_method.name));
            let pkg = t.focal_class.qualified_name.rsplit_once('.').map(|(p, _)| p.replace('.', "/"));
            let path = match pkg {
                Some(p) => format!("src/test/java/{p}/{stem}.java"),
                None => format!("src/test/java/{stem}.java"),
            };
            (stem, path)
        }
        FocalUnit::Module(m) => {
            let last = m.name().rsplit('.').next().unwrap_or(m.name());
            let stem = if n > 1 { format!("test_{last}_{n}") } else { format!("test_{last}") };
            (stem.clone(), format!("tests/{stem}.py"))
        }
    }
}

fn ratio(covered: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        covered as f64 / total as f64
    }
}

/// Generate, repair and augment tests for one target inside `sandbox_dir`.
#[allow(clippy::too_many_arguments)]
pub fn process_target(
    ctx: &FocalContext<'_>,
    model: &CodeModel,
    project_root: &Path,
    sandbox_dir: &Path,
    gateway: &dyn ChatModel,
    adapter: &dyn ToolchainAdapter,
    cfg: &PipelineConfig,
) -> Result<TargetResult, PipelineError> {
    let target_id = ctx.target_id();
    let mut result = TargetResult {
        target_id: target_id.clone(),
        tests: Vec::new(),
        line_cov: 0.0,
        branch_cov: 0.0,
        method_cov: 0.0,
        rounds: Vec::new(),
        transcript: Vec::new(),
        skipped: None,
    };
    let bundle = match build_generation_prompt(ctx, &cfg.prompt) {
        Ok(b) => b,
        Err(e @ PromptError::BudgetExceeded { .. }) => {
            result.skipped = Some(e.to_string());
            return Ok(result);
        }
        Err(e) => return Err(e.into()),
    };
    let sandbox = Sandbox::create(project_root, sandbox_dir)?;
    let mut session = Session::new(gateway, &cfg.sampling, &cfg.prompt);
    let (reply, hash) = session.ask(&bundle)?;
    let (id, path) = test_slot(ctx, 1);
    let mut artifact = TestArtifact::new(&id, &target_id, ctx.language, &reply, Some(hash));
    artifact.path = path;
    if sanitize_artifact(&mut artifact) {
        artifact = repair_loop(artifact, &bundle, &mut session, adapter, &sandbox, cfg.max_iters, &cfg.prompt)?;
    }
    let mut others = Vec::new();
    let mut suite = Vec::new();
    if artifact.status == Status::Passing {
        suite.push(artifact);
    } else {
        others.push(artifact);
    }

    if !suite.is_empty() {
        let augment = AugmentConfig { target_coverage: cfg.target_coverage, max_rounds: cfg.max_rounds, max_iters: cfg.max_iters };
        let mut n = 1;
        let mut next_slot = || {
            n += 1;
            test_slot(ctx, n)
        };
        let aug = augment_coverage(ctx, suite, &mut session, adapter, &sandbox, &augment, &cfg.prompt, &mut next_slot)?;
        let (path, start, end) = &ctx.focal_region;
        let region = aug.report.region(path, *start, *end);
        result.line_cov = ratio(region.covered_lines, region.total_lines);
        result.branch_cov = ratio(region.covered_branches, region.total_branches);
        let methods: Vec<bool> = infer_method_coverage(&aug.report, model)
            .into_iter()
            .filter(|m| &m.file == path && m.start_line >= *start && m.end_line <= *end)
            .map(|m| m.covered)
            .collect();
        result.method_cov = ratio(methods.iter().filter(|c| **c).count(), methods.len());
        result.rounds = aug.rounds;
        suite = aug.suite;
        others.extend(aug.rejected);
    }
    suite.extend(others);
    suite.sort_by(|a, b| (a.path.len(), &a.path).cmp(&(b.path.len(), &b.path)));
    result.tests = suite;
    result.transcript = session.transcript;
    Ok(result)
}

/// Run id derived from the language, model and project sources.
pub fn derive_run_id(model: &CodeModel, language: Language, model_id: &str) -> String {
    let mut h = Sha256::new();
    h.update(language.as_str());
    h.update([0]);
    h.update(model_id);
    for unit in model.units() {
        h.update([0]);
        h.update(&unit.path);
        h.update([0]);
        h.update(&unit.source_text);
    }
    hex::encode(h.finalize())[..12].to_string()
}

/// Process every context on a bounded worker pool, one sandbox each.
pub fn run_pipeline(
    project_root: &Path,
    model: &CodeModel,
    language: Language,
    contexts: &[FocalContext<'_>],
    gateway: &dyn ChatModel,
    adapter: &dyn ToolchainAdapter,
    cfg: &PipelineConfig,
) -> Result<RunResult, PipelineError> {
    let temp;
    let work = match &cfg.work_dir {
        Some(dir) => dir.clone(),
        None => {
            temp = tempfile::tempdir().map_err(|e| PipelineError::Io { path: std::env::temp_dir(), source: e })?;
            temp.path().to_path_buf()
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| PipelineError::Io { path: work.clone(), source: std::io::Error::other(e) })?;
    let targets = pool.install(|| {
        contexts
            .par_iter()
            .enumerate()
            .map(|(i, ctx)| {
                let dir = work.join(format!("{i:04}-{}", target_dir_name(&ctx.target_id())));
                process_target(ctx, model, project_root, &dir, gateway, adapter, cfg)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(RunResult {
        run_id: cfg.run_id.clone().unwrap_or_else(|| derive_run_id(model, language, &cfg.sampling.model_id)),
        language,
        model_id: cfg.sampling.model_id.clone(),
        targets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub id: String,
    pub status: Status,
    pub attempts: std::collections::BTreeMap<String, u32>,
    /// Relative to the run directory; absent for discarded tests.
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub target_id: String,
    pub tests: Vec<TestEntry>,
    pub line_cov: f64,
    pub branch_cov: f64,
    pub method_cov: f64,
    /// Filled by external mutation tools.
    pub mutation_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run_id: String,
    pub language: Language,
    pub model_id: String,
    pub targets: Vec<TargetEntry>,
}

impl RunReport {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Report { path: path.to_path_buf(), message: e.to_string() })
    }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

pub fn run_report(run: &RunResult) -> RunReport {
    RunReport {
        run_id: run.run_id.clone(),
        language: run.language,
        model_id: run.model_id.clone(),
        targets: run
            .targets
            .iter()
            .map(|t| {
                let dir = target_dir_name(&t.target_id);
                TargetEntry {
                    target_id: t.target_id.clone(),
                    tests: t
                        .tests
                        .iter()
                        .map(|a| TestEntry {
                            id: a.id.clone(),
                            status: a.status,
                            attempts: a.attempt_counts.clone(),
                            path: (a.status != Status::Discarded).then(|| format!("{dir}/{}", a.path)),
                        })
                        .collect(),
                    line_cov: round4(t.line_cov),
                    branch_cov: round4(t.branch_cov),
                    method_cov: round4(t.method_cov),
                    mutation_score: None,
                    skipped: t.skipped.clone(),
                }
            })
            .collect(),
    }
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

/// Write `<out>/run-<id>/report.json`, and per target its test files and
/// `transcript.json`. Any previous output of the same run is replaced.
pub fn persist_run(run: &RunResult, out_dir: &Path) -> Result<PathBuf, PipelineError> {
    let run_dir = out_dir.join(format!("run-{}", run.run_id));
    if run_dir.exists() {
        std::fs::remove_dir_all(&run_dir).map_err(|source| PipelineError::Io { path: run_dir.clone(), source })?;
    }
    for t in &run.targets {
        let dir = run_dir.join(target_dir_name(&t.target_id));
        for a in t.tests.iter().filter(|a| a.status != Status::Discarded) {
            write(&dir.join(&a.path), &a.text)?;
        }
        let transcript = serde_json::to_string_pretty(&t.transcript).expect("transcript serializes");
        write(&dir.join("transcript.json"), &(transcript + "\n"))?;
    }
    let report_path = run_dir.join("report.json");
    let report = serde_json::to_string_pretty(&run_report(run)).expect("report serializes");
    write(&report_path, &(report + "\n"))?;
    Ok(report_path)
}
