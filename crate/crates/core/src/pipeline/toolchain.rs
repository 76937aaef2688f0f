use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::coverage::{parse_coverage_py_json, parse_jacoco_xml, CoverageError, CoverageReport, FileCoverage};
use super::{Diagnostic, Phase, Severity};

#[derive(Debug, Error)]
pub enum ToolchainError {
    #[error("could not run `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("sandbox I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("`{command}` exited with status {status}: {output}")]
    Failed { command: String, status: i32, output: String },
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error("adapter configuration: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ToolchainError + '_ {
    move |source| ToolchainError::Io { path: path.to_path_buf(), source }
}

/// A test source file relative to the sandbox root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFile {
    pub path: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRun {
    pub path: String,
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Private working copy of a project.
#[derive(Debug)]
pub struct Sandbox {
    root: PathBuf,
}

const SKIPPED_DIRS: &[&str] = &["target", "build", "node_modules", "__pycache__", ".git", ".venv", "venv"];

impl Sandbox {
    /// Copy `project` into the empty or new directory `dir`.
    pub fn create(project: &Path, dir: &Path) -> Result<Self, ToolchainError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let walker = walkdir::WalkDir::new(project).sort_by_file_name().into_iter().filter_entry(|e| {
            e.depth() == 0 || !e.file_name().to_str().is_some_and(|n| SKIPPED_DIRS.contains(&n) || n.starts_with('.'))
        });
        for entry in walker {
            let entry = entry.map_err(|e| ToolchainError::Io {
                path: project.to_path_buf(),
                source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
            })?;
            let rel = entry.path().strip_prefix(project).expect("walk stays under root");
            let dest = dir.join(rel);
            if entry.file_type().is_dir() {
                std::fs::create_dir_all(&dest).map_err(io_err(&dest))?;
            } else if entry.file_type().is_file() {
                std::fs::copy(entry.path(), &dest).map_err(io_err(&dest))?;
            }
        }
        Ok(Sandbox { root: dir.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, file: &TestFile) -> Result<PathBuf, ToolchainError> {
        let path = self.root.join(&file.path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        std::fs::write(&path, &file.text).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn remove(&self, file: &TestFile) {
        let _ = std::fs::remove_file(self.root.join(&file.path));
    }
}

/// Build, execute and measure tests inside a sandbox.
pub trait ToolchainAdapter: Send + Sync {
    /// Compile (Java) or lint (Python) one test file.
    fn static_check(&self, sandbox: &Sandbox, test: &TestFile) -> Result<Vec<Diagnostic>, ToolchainError>;
    fn run(&self, sandbox: &Sandbox, tests: &[TestFile]) -> Result<Vec<TestRun>, ToolchainError>;
    fn coverage(&self, sandbox: &Sandbox, suite: &[TestFile]) -> Result<CoverageReport, ToolchainError>;
}

impl<T: ToolchainAdapter + ?Sized> ToolchainAdapter for &T {
    fn static_check(&self, sandbox: &Sandbox, test: &TestFile) -> Result<Vec<Diagnostic>, ToolchainError> {
        (**self).static_check(sandbox, test)
    }
    fn run(&self, sandbox: &Sandbox, tests: &[TestFile]) -> Result<Vec<TestRun>, ToolchainError> {
        (**self).run(sandbox, tests)
    }
    fn coverage(&self, sandbox: &Sandbox, suite: &[TestFile]) -> Result<CoverageReport, ToolchainError> {
        (**self).coverage(sandbox, suite)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticRule {
    /// Fires when the test text contains this fragment.
    pub when: String,
    pub phase: Phase,
    pub message: String,
    /// Lint category such as `error` or `warning`.
    #[serde(default)]
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRule {
    pub when: String,
    #[serde(default = "default_failure_phase")]
    pub phase: Phase,
    pub message: String,
}

fn default_failure_phase() -> Phase {
    Phase::Assertion
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRule {
    pub when: String,
    /// Lines executed per file when a matching test is in the suite.
    pub lines: BTreeMap<String, Vec<u32>>,
    #[serde(default)]
    pub branches: BTreeMap<String, Vec<u32>>,
}

/// Content-driven stand-in for real build tools.
///
/// Rules match on substrings of the test text. Coverage is the union of the
/// lines of every rule matched by a passing suite member, over the
/// configured instrumentable lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FakeToolchain {
    pub static_rules: Vec<StaticRule>,
    pub failures: Vec<FailureRule>,
    /// Instrumentable lines per file.
    pub instrumentable: BTreeMap<String, Vec<u32>>,
    /// Branch outcomes per `file` and line.
    pub branch_points: BTreeMap<String, BTreeMap<u32, u32>>,
    pub coverage: Vec<CoverageRule>,
}

fn first_line_containing(text: &str, fragment: &str) -> Option<u32> {
    text.lines().position(|l| l.contains(fragment)).map(|i| i as u32 + 1)
}

impl FakeToolchain {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl ToolchainAdapter for FakeToolchain {
    fn static_check(&self, sandbox: &Sandbox, test: &TestFile) -> Result<Vec<Diagnostic>, ToolchainError> {
        sandbox.write(test)?;
        Ok(self
            .static_rules
            .iter()
            .filter(|r| test.text.contains(&r.when))
            .map(|r| {
                let line = first_line_containing(&test.text, &r.when);
                match r.phase {
                    Phase::Lint => Diagnostic::lint(
                        &test.path,
                        line,
                        r.category.as_deref().unwrap_or("error"),
                        &r.message,
                    ),
                    phase => Diagnostic::new(phase, &test.path, line, &r.message),
                }
            })
            .collect())
    }

    fn run(&self, sandbox: &Sandbox, tests: &[TestFile]) -> Result<Vec<TestRun>, ToolchainError> {
        let mut out = Vec::new();
        for t in tests {
            sandbox.write(t)?;
            let diagnostics: Vec<Diagnostic> = self
                .failures
                .iter()
                .filter(|r| t.text.contains(&r.when))
                .map(|r| Diagnostic::new(r.phase, &t.path, first_line_containing(&t.text, &r.when), &r.message))
                .collect();
            out.push(TestRun { path: t.path.clone(), passed: diagnostics.is_empty(), diagnostics });
        }
        Ok(out)
    }

    fn coverage(&self, sandbox: &Sandbox, suite: &[TestFile]) -> Result<CoverageReport, ToolchainError> {
        let runs = self.run(sandbox, suite)?;
        let passing: Vec<&TestFile> = suite.iter().zip(&runs).filter(|(_, r)| r.passed).map(|(t, _)| t).collect();
        let mut report = CoverageReport::default();
        for (file, lines) in &self.instrumentable {
            let mut fc = FileCoverage::default();
            for l in lines {
                fc.lines.insert(*l, 0);
            }
            for (l, total) in self.branch_points.get(file).into_iter().flatten() {
                fc.branches.insert(*l, (0, *total));
            }
            report.files.insert(file.clone(), fc);
        }
        for rule in &self.coverage {
            if !passing.iter().any(|t| t.text.contains(&rule.when)) {
                continue;
            }
            for (file, lines) in &rule.lines {
                let fc = report.files.entry(file.clone()).or_default();
                for l in lines {
                    if let Some(h) = fc.lines.get_mut(l) {
                        *h += 1;
                    }
                }
            }
            for (file, lines) in &rule.branches {
                let fc = report.files.entry(file.clone()).or_default();
                for l in lines {
                    if let Some((c, t)) = fc.branches.get_mut(l) {
                        *c = (*c + 1).min(*t);
                    }
                }
            }
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckFormat {
    /// `File.java:12: error: message`
    Javac,
    /// pylint with `--msg-template='{path}:{line}:{column}: {msg_id}: {msg} ({symbol})'`
    Pylint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageFormat {
    Jacoco,
    CoveragePy,
}

/// External commands, one argument per entry.
///
/// Placeholders: `{sandbox}`, `{test}` (test path), `{test_class}` (dotted
/// Java class or Python module), and `{tests}` which expands to one
/// argument per suite file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubprocessConfig {
    pub check: Vec<String>,
    pub check_format: CheckFormat,
    pub run: Vec<String>,
    /// Commands run in order; the last one must leave `coverage_report`.
    pub coverage: Vec<Vec<String>>,
    pub coverage_report: String,
    pub coverage_format: CoverageFormat,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct SubprocessAdapter {
    pub config: SubprocessConfig,
}

struct Output {
    status: i32,
    text: String,
}

fn dotted(path: &str) -> String {
    let stem = path.rsplit_once('.').map_or(path, |(s, _)| s);
    let stem = stem.strip_prefix("src/test/java/").unwrap_or(stem);
    stem.replace(['/', '\\'], ".")
}

impl SubprocessAdapter {
    pub fn new(config: SubprocessConfig) -> Self {
        SubprocessAdapter { config }
    }

    fn expand(&self, template: &[String], sandbox: &Sandbox, tests: &[TestFile]) -> Vec<String> {
        let root = sandbox.root().display().to_string();
        let mut args = Vec::new();
        for arg in template {
            if arg == "{tests}" {
                args.extend(tests.iter().map(|t| t.path.clone()));
                continue;
            }
            let first = tests.first();
            args.push(
                arg.replace("{sandbox}", &root)
                    .replace("{test}", first.map_or("", |t| t.path.as_str()))
                    .replace("{test_class}", &first.map(|t| dotted(&t.path)).unwrap_or_default()),
            );
        }
        args
    }

    fn exec(&self, args: &[String], sandbox: &Sandbox) -> Result<Output, ToolchainError> {
        let (program, rest) = args.split_first().ok_or_else(|| ToolchainError::Config("empty command".into()))?;
        let out = Command::new(program)
            .args(rest)
            .current_dir(sandbox.root())
            .envs(&self.config.env)
            .output()
            .map_err(|source| ToolchainError::Spawn { command: args.join(" "), source })?;
        let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
        text.push_str(&String::from_utf8_lossy(&out.stderr));
        Ok(Output { status: out.status.code().unwrap_or(-1), text })
    }
}

static JAVAC_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^(.+?\.java):(\d+): (error|warning): (.*)$").unwrap());
static PYLINT_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^(.+?\.py):(\d+):\d+: ([A-Z])\d+: (.*)$").unwrap());

fn pylint_category(letter: &str) -> &'static str {
    match letter {
        "E" => "error",
        "F" => "fatal",
        "W" => "warning",
        "C" => "convention",
        "R" => "refactor",
        _ => "info",
    }
}

/// Structured diagnostics from compiler or linter output.
pub fn parse_check_output(format: CheckFormat, output: &str) -> Vec<Diagnostic> {
    match format {
        CheckFormat::Javac => JAVAC_LINE
            .captures_iter(output)
            .map(|c| {
                let mut d = Diagnostic::new(Phase::Compile, &c[1], c[2].parse().ok(), &c[4]);
                if &c[3] == "warning" {
                    d.severity = Severity::Warning;
                }
                d
            })
            .collect(),
        CheckFormat::Pylint => PYLINT_LINE
            .captures_iter(output)
            .map(|c| Diagnostic::lint(&c[1], c[2].parse().ok(), pylint_category(&c[3]), &c[4]))
            .collect(),
    }
}

fn tail(text: &str, lines: usize) -> String {
    let all: Vec<&str> = text.lines().collect();
    all[all.len().saturating_sub(lines)..].join("\n")
}

fn failure_phase(output: &str) -> Phase {
    if output.contains("AssertionError") || output.contains("AssertionFailedError") || output.contains("assert ") {
        Phase::Assertion
    } else {
        Phase::Runtime
    }
}

impl ToolchainAdapter for SubprocessAdapter {
    fn static_check(&self, sandbox: &Sandbox, test: &TestFile) -> Result<Vec<Diagnostic>, ToolchainError> {
        sandbox.write(test)?;
        let args = self.expand(&self.config.check, sandbox, std::slice::from_ref(test));
        let out = self.exec(&args, sandbox)?;
        let mut diags = parse_check_output(self.config.check_format, &out.text);
        if out.status != 0 && self.config.check_format == CheckFormat::Javac && diags.is_empty() {
            diags.push(Diagnostic::new(Phase::Compile, &test.path, None, &tail(&out.text, 20)));
        }
        Ok(diags)
    }

    fn run(&self, sandbox: &Sandbox, tests: &[TestFile]) -> Result<Vec<TestRun>, ToolchainError> {
        let mut runs = Vec::new();
        for t in tests {
            sandbox.write(t)?;
            let args = self.expand(&self.config.run, sandbox, std::slice::from_ref(t));
            let out = self.exec(&args, sandbox)?;
            let diagnostics = if out.status == 0 {
                Vec::new()
            } else {
                vec![Diagnostic::new(failure_phase(&out.text), &t.path, None, &tail(&out.text, 40))]
            };
            runs.push(TestRun { path: t.path.clone(), passed: out.status == 0, diagnostics });
        }
        Ok(runs)
    }

    fn coverage(&self, sandbox: &Sandbox, suite: &[TestFile]) -> Result<CoverageReport, ToolchainError> {
        for t in suite {
            sandbox.write(t)?;
        }
        for cmd in &self.config.coverage {
            let args = self.expand(cmd, sandbox, suite);
            let out = self.exec(&args, sandbox)?;
            if out.status != 0 {
                return Err(ToolchainError::Failed { command: args.join(" "), status: out.status, output: tail(&out.text, 20) });
            }
        }
        let path = sandbox.root().join(&self.config.coverage_report);
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(match self.config.coverage_format {
            CoverageFormat::Jacoco => parse_jacoco_xml(&text)?,
            CoverageFormat::CoveragePy => parse_coverage_py_json(&text)?,
        })
    }
}
