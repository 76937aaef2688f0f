use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::artifact::{phase, Status, TestArtifact};
use super::coverage::CoverageReport;
use super::sanitize::sanitize;
use super::toolchain::{Sandbox, TestFile, ToolchainAdapter};
use super::{Diagnostic, Phase, PipelineError};
use crate::code_model::{parse_unit, Language};
use crate::llm::{prompt_sha256, ChatModel, SamplingConfig};
use crate::prompting::{
    build_coverage_prompt, build_repair_prompt, render_with, FocalContext, PromptBundle, PromptConfig, PromptKind,
};

/// One prompt and the completion it received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub kind: String,
    pub prompt_sha256: String,
    pub prompt: String,
    pub completion: String,
}

/// Gateway access for one target, keeping a transcript.
pub struct Session<'a> {
    gateway: &'a dyn ChatModel,
    sampling: &'a SamplingConfig,
    templates: &'a crate::prompting::Templates,
    pub transcript: Vec<Exchange>,
}

impl<'a> Session<'a> {
    pub fn new(gateway: &'a dyn ChatModel, sampling: &'a SamplingConfig, prompt: &'a PromptConfig) -> Self {
        Session { gateway, sampling, templates: &prompt.templates, transcript: Vec::new() }
    }

    /// Render and send `bundle`; returns the completion text and prompt hash.
    pub fn ask(&mut self, bundle: &PromptBundle) -> Result<(String, String), PipelineError> {
        let prompt = render_with(bundle, self.templates);
        let hash = prompt_sha256(&prompt);
        let completion = self.gateway.complete(&prompt, self.sampling)?;
        let kind = match bundle.kind {
            PromptKind::Generation => "generation",
            PromptKind::Repair => "repair",
            PromptKind::Coverage => "coverage",
        };
        self.transcript.push(Exchange {
            kind: kind.to_string(),
            prompt_sha256: hash.clone(),
            prompt,
            completion: completion.text.clone(),
        });
        Ok((completion.text, hash))
    }
}

static PACKAGE_DECL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^\s*package\s+[\w.]+\s*;").unwrap());

/// Make a sanitized test fit its file: for Java the top-level class is
/// renamed after the file stem and the package follows the directory.
pub fn normalize_test(text: &str, language: Language, path: &str) -> String {
    if language != Language::Java {
        return text.to_string();
    }
    let Ok(unit) = parse_unit(path, text, language) else { return text.to_string() };
    let stem = path.rsplit('/').next().unwrap_or(path).trim_end_matches(".java");
    let mut out = text.to_string();
    if let Some(decl) = unit.types.iter().find(|t| t.enclosing.is_none()) {
        if decl.simple_name != stem {
            let re = Regex::new(&format!(r"\b{}\b", regex::escape(&decl.simple_name))).unwrap();
            out = re.replace_all(&out, stem).into_owned();
        }
    }
    let dir = path.strip_prefix("src/test/java/").unwrap_or(path);
    let package = dir.rsplit_once('/').map(|(d, _)| d.replace('/', "."));
    match (package, unit.namespace.as_deref()) {
        (Some(p), Some(ns)) if p != ns => PACKAGE_DECL.replace(&out, format!("package {p};")).into_owned(),
        (Some(p), None) => format!("package {p};\n\n{out}"),
        (None, Some(_)) => PACKAGE_DECL.replace(&out, "").trim_start().to_string(),
        _ => out,
    }
}

fn static_phase(language: Language) -> &'static str {
    match language {
        Language::Java => phase::COMPILE,
        Language::Python => phase::LINT,
    }
}

fn test_file(a: &TestArtifact) -> TestFile {
    TestFile { path: a.path.clone(), text: a.text.clone() }
}

/// Sanitize the raw completion held by a fresh artifact. Returns false
/// when it was discarded.
pub fn sanitize_artifact(artifact: &mut TestArtifact) -> bool {
    match sanitize(&artifact.text, artifact.language) {
        Ok(text) => {
            artifact.text = normalize_test(&text, artifact.language, &artifact.path);
            artifact.advance(phase::SANITIZE, Status::Sanitized, None).expect("raw artifact");
            true
        }
        Err(e) => {
            let d = Diagnostic::new(Phase::Parse, &artifact.path, None, &e.to_string());
            artifact.discard(phase::SANITIZE, Some(d));
            false
        }
    }
}

fn first_blocking(diags: Vec<Diagnostic>) -> Option<Diagnostic> {
    diags.into_iter().find(Diagnostic::triggers_repair)
}

/// Apply `reply` as the artifact's new text, unless it cannot be salvaged.
fn sanitized_reply(artifact: &TestArtifact, reply: &str) -> Option<String> {
    sanitize(reply, artifact.language).ok().map(|t| normalize_test(&t, artifact.language, &artifact.path))
}

/// Static repair, then execution with runtime repair.
///
/// Each phase gets at most `max_iters` repair prompts. Static errors that
/// outlive the budget discard the artifact; a test still failing after its
/// runtime budget ends as failing. A runtime repair that no longer passes
/// the static check is not adopted.
#[allow(clippy::too_many_arguments)]
pub fn repair_loop(
    mut artifact: TestArtifact,
    prior: &PromptBundle,
    session: &mut Session<'_>,
    adapter: &dyn ToolchainAdapter,
    sandbox: &Sandbox,
    max_iters: u32,
    prompt: &PromptConfig,
) -> Result<TestArtifact, PipelineError> {
    if artifact.status != Status::Sanitized {
        return Ok(artifact);
    }
    let static_key = static_phase(artifact.language);
    while let Some(diag) = first_blocking(adapter.static_check(sandbox, &test_file(&artifact))?) {
        if artifact.attempts(static_key) >= max_iters {
            sandbox.remove(&test_file(&artifact));
            artifact.discard(static_key, Some(diag));
            return Ok(artifact);
        }
        artifact.count_attempt(static_key);
        let bundle = build_repair_prompt(prior, &artifact.text, &diag, prompt);
        let (reply, hash) = session.ask(&bundle)?;
        artifact.note(static_key, Some(diag), Some(hash));
        match sanitized_reply(&artifact, &reply) {
            Some(text) => artifact.text = text,
            None => artifact.note(phase::SANITIZE, None, None),
        }
    }
    artifact.advance(static_key, Status::Compiling, None).expect("sanitized artifact");

    loop {
        let file = test_file(&artifact);
        let run = adapter.run(sandbox, std::slice::from_ref(&file))?.pop();
        let diag = match run {
            Some(r) if r.passed => {
                artifact.advance(phase::RUNTIME, Status::Passing, None).expect("compiling artifact");
                return Ok(artifact);
            }
            Some(r) => r.diagnostics.into_iter().next(),
            None => None,
        }
        .unwrap_or_else(|| Diagnostic::new(Phase::Runtime, &file.path, None, "test failed without output"));
        if artifact.attempts(phase::RUNTIME) >= max_iters {
            artifact.advance(phase::RUNTIME, Status::Failing, Some(diag)).expect("compiling artifact");
            return Ok(artifact);
        }
        artifact.count_attempt(phase::RUNTIME);
        let bundle = build_repair_prompt(prior, &artifact.text, &diag, prompt);
        let (reply, hash) = session.ask(&bundle)?;
        artifact.note(phase::RUNTIME, Some(diag), Some(hash));
        let Some(candidate) = sanitized_reply(&artifact, &reply) else {
            artifact.note(phase::SANITIZE, None, None);
            continue;
        };
        let check = TestFile { path: file.path.clone(), text: candidate.clone() };
        match first_blocking(adapter.static_check(sandbox, &check)?) {
            Some(d) => artifact.note(static_key, Some(d), None),
            None => artifact.text = candidate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    pub target_coverage: f64,
    pub max_rounds: u32,
    pub max_iters: u32,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { target_coverage: 0.8, max_rounds: 4, max_iters: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: u32,
    pub covered_before: usize,
    pub covered_after: usize,
    pub total_lines: usize,
    pub admitted: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Augmented {
    /// Input suite followed by admitted tests, in admission order.
    pub suite: Vec<TestArtifact>,
    /// New tests that were not admitted (failing or discarded).
    pub rejected: Vec<TestArtifact>,
    pub rounds: Vec<RoundLog>,
    /// Coverage of the final suite.
    pub report: CoverageReport,
}

fn files(suite: &[TestArtifact]) -> Vec<TestFile> {
    suite.iter().map(test_file).collect()
}

/// Add tests for uncovered focal lines until the target is reached, the
/// round budget is spent, or a round admits nothing.
///
/// A new test is admitted only if it passes the repair loop and strictly
/// increases the number of covered focal lines. `next_slot` yields the id
/// and path for each new test.
#[allow(clippy::too_many_arguments)]
pub fn augment_coverage(
    ctx: &FocalContext<'_>,
    suite: Vec<TestArtifact>,
    session: &mut Session<'_>,
    adapter: &dyn ToolchainAdapter,
    sandbox: &Sandbox,
    cfg: &AugmentConfig,
    prompt: &PromptConfig,
    next_slot: &mut dyn FnMut() -> (String, String),
) -> Result<Augmented, PipelineError> {
    let (path, start, end) = ctx.focal_region.clone();
    let source = std::fs::read_to_string(sandbox.root().join(&path)).unwrap_or_else(|_| ctx.focal_source.clone());
    let mut out = Augmented { report: adapter.coverage(sandbox, &files(&suite))?, suite, rejected: Vec::new(), rounds: Vec::new() };
    for round in 1..=cfg.max_rounds {
        let before = out.report.region(&path, start, end);
        if before.line_rate() >= cfg.target_coverage {
            break;
        }
        let uncovered: Vec<(u32, String)> = out
            .report
            .uncovered_lines(&path, start, end)
            .into_iter()
            .map(|n| (n, source.lines().nth(n as usize - 1).unwrap_or("").to_string()))
            .collect();
        if uncovered.is_empty() {
            break;
        }
        let bundle = build_coverage_prompt(ctx, &uncovered, prompt)?;
        let (reply, hash) = session.ask(&bundle)?;
        let (id, test_path) = next_slot();
        let mut artifact = TestArtifact::new(&id, &ctx.target_id(), ctx.language, &reply, Some(hash));
        artifact.path = test_path;
        let mut log = RoundLog {
            round,
            covered_before: before.covered_lines,
            covered_after: before.covered_lines,
            total_lines: before.total_lines,
            admitted: None,
        };
        if sanitize_artifact(&mut artifact) {
            artifact = repair_loop(artifact, &bundle, session, adapter, sandbox, cfg.max_iters, prompt)?;
        }
        if artifact.status == Status::Passing {
            let mut trial = files(&out.suite);
            trial.push(test_file(&artifact));
            let report = adapter.coverage(sandbox, &trial)?;
            let after = report.region(&path, start, end);
            if after.covered_lines > before.covered_lines {
                artifact.note(phase::COVERAGE, None, None);
                log.covered_after = after.covered_lines;
                log.admitted = Some(artifact.id.clone());
                out.report = report;
                out.suite.push(artifact);
                out.rounds.push(log);
                continue;
            }
            let d = Diagnostic::new(Phase::Runtime, &artifact.path, None, "no new focal lines covered");
            artifact.discard(phase::COVERAGE, Some(d));
        }
        sandbox.remove(&test_file(&artifact));
        out.rejected.push(artifact);
        out.rounds.push(log);
        break;
    }
    Ok(out)
}
