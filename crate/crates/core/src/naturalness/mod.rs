//! Naturalness of test suites: assertion quality, test-name and
//! variable-name meaningfulness.

mod assertions;
mod names;
mod similarity;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assertions::{assertion_metrics, AssertionMetrics, TestAssertions};
pub use names::{
    focal_class_name, infer_focal_methods, score_variable, split_test_name, test_name_score, variable_name_score,
    variable_name_score_with, DataStructureTypes, NameScore, NameTokens, TestVariables, VarGroup, VariableScore,
};
pub use similarity::{best_match, levenshtein, segments, similarity, split_camel, split_identifier};

use crate::code_model::{parse_unit, Callable, CodeModel, CodeUnit, Language, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0} contains no test methods")]
pub struct NotATestFile(pub String);

#[derive(Debug, Error)]
pub enum NaturalnessError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
}

const JAVA_TEST_ANNOTATIONS: &[&str] = &["Test", "ParameterizedTest", "RepeatedTest", "TestFactory", "TestTemplate"];

/// Test methods: JUnit-annotated methods (or `test*` methods when nothing is
/// annotated) for Java; `test*` functions and methods of `Test*` classes
/// for Python.
pub fn test_methods(unit: &CodeUnit) -> Vec<&Callable> {
    match unit.language {
        Language::Java => {
            let methods: Vec<&Callable> = unit.types.iter().flat_map(|t| t.methods()).collect();
            let annotated: Vec<&Callable> = methods
                .iter()
                .copied()
                .filter(|m| JAVA_TEST_ANNOTATIONS.iter().any(|a| m.has_annotation(a)))
                .collect();
            if annotated.is_empty() {
                methods.into_iter().filter(|m| m.name.starts_with("test") && !m.is_abstract).collect()
            } else {
                annotated
            }
        }
        Language::Python => unit
            .callables()
            .filter(|c| !c.is_constructor() && c.name.starts_with("test"))
            .filter(|c| {
                c.owner
                    .as_deref()
                    .is_none_or(|o| crate::code_model::simple_name(o).starts_with("Test") || o.ends_with("Test"))
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub focal_candidates: Vec<String>,
    pub name_score: NameScore,
    pub var_score: Option<f64>,
    pub variables: Vec<VariableScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: String,
    pub language: Language,
    pub assertion_metrics: AssertionMetrics,
    pub tests: Vec<TestReport>,
}

/// Score every test of one file against its focal code in `model`.
pub fn score_test_file(unit: &CodeUnit, model: Option<&CodeModel>) -> Result<FileReport, NotATestFile> {
    let metrics = assertion_metrics(unit)?;
    let scope = names::FocalScope::of(unit, model);
    let vars = variable_name_score(unit, model);
    let tests = test_methods(unit)
        .into_iter()
        .zip(vars)
        .map(|(t, v)| {
            let candidates = scope.candidates(t, unit.language);
            TestReport {
                name: t.name.clone(),
                name_score: test_name_score(&t.name, &candidates, &scope.identifiers, &scope.exceptions),
                focal_candidates: candidates,
                var_score: v.score,
                variables: v.variables,
            }
        })
        .collect();
    Ok(FileReport { path: unit.path.clone(), language: unit.language, assertion_metrics: metrics, tests })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub files: usize,
    pub tests: usize,
    /// Means over files.
    pub assertion_ratio: f64,
    pub pct_no_assertions: f64,
    pub pct_duplicate_assertions: f64,
    pub pct_null_assertions: f64,
    pub pct_exception_assertions: f64,
    /// Mean `NameScore.total` over tests.
    pub name_score: f64,
    /// Mean over tests that have scored variables.
    pub var_score: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl Aggregates {
    pub fn of<'a>(files: impl IntoIterator<Item = &'a FileReport> + Clone) -> Self {
        let list: Vec<&FileReport> = files.into_iter().collect();
        let m = |f: fn(&AssertionMetrics) -> f64| mean(list.iter().map(|r| f(&r.assertion_metrics)));
        let tests = || list.iter().flat_map(|f| f.tests.iter());
        Aggregates {
            files: list.len(),
            tests: tests().count(),
            assertion_ratio: m(|a| a.assertion_ratio),
            pct_no_assertions: m(|a| a.pct_no_assertions),
            pct_duplicate_assertions: m(|a| a.pct_duplicate_assertions),
            pct_null_assertions: m(|a| a.pct_null_assertions),
            pct_exception_assertions: m(|a| a.pct_exception_assertions),
            name_score: mean(tests().map(|t| t.name_score.total)),
            var_score: mean(tests().filter_map(|t| t.var_score)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    /// No test files were found.
    pub empty: bool,
    pub files: Vec<FileReport>,
    /// Files that were not parsed or held no tests, with the reason.
    pub skipped: BTreeMap<String, String>,
    pub aggregates: Aggregates,
    pub by_language: BTreeMap<Language, Aggregates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalnessReport {
    pub suites: Vec<SuiteReport>,
}

/// Parsed project sources per language, used as the focal code.
#[derive(Debug, Default)]
pub struct Projects {
    pub java: Option<CodeModel>,
    pub python: Option<CodeModel>,
}

impl Projects {
    pub fn load(root: &Path) -> Result<Self, ModelError> {
        Ok(Projects {
            java: Some(CodeModel::load_dir(root, Language::Java)?),
            python: Some(CodeModel::load_dir(root, Language::Python)?),
        })
    }

    pub fn model(&self, language: Language) -> Option<&CodeModel> {
        match language {
            Language::Java => self.java.as_ref(),
            Language::Python => self.python.as_ref(),
        }
    }
}

pub fn suite_report(name: &str, units: &[CodeUnit], projects: &Projects) -> SuiteReport {
    let mut files = Vec::new();
    let mut skipped = BTreeMap::new();
    for unit in units {
        match score_test_file(unit, projects.model(unit.language)) {
            Ok(f) => files.push(f),
            Err(e) => {
                skipped.insert(unit.path.clone(), e.to_string());
            }
        }
    }
    let mut by_language = BTreeMap::new();
    for lang in [Language::Java, Language::Python] {
        let of_lang: Vec<&FileReport> = files.iter().filter(|f| f.language == lang).collect();
        if !of_lang.is_empty() {
            by_language.insert(lang, Aggregates::of(of_lang.iter().copied()));
        }
    }
    SuiteReport {
        suite: name.to_string(),
        empty: files.is_empty(),
        aggregates: Aggregates::of(files.iter()),
        files,
        skipped,
        by_language,
    }
}

/// Parse the `.java` and `.py` files under `dir`, paths relative to it.
/// Files that do not parse are returned separately with the error.
pub fn load_suite(dir: &Path) -> Result<(Vec<CodeUnit>, BTreeMap<String, String>), NaturalnessError> {
    if !dir.is_dir() {
        return Err(NaturalnessError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    let mut units = Vec::new();
    let mut broken = BTreeMap::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| NaturalnessError::Io {
            path: dir.to_path_buf(),
            source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
        })?;
        let Some(language) = Language::from_path(entry.path()).filter(|_| entry.file_type().is_file()) else {
            continue;
        };
        let text = std::fs::read_to_string(entry.path())
            .map_err(|source| NaturalnessError::Io { path: entry.path().to_path_buf(), source })?;
        let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path()).to_string_lossy().replace('\\', "/");
        match parse_unit(&rel, &text, language) {
            Ok(u) => units.push(u),
            Err(e) => {
                broken.insert(rel, e.to_string());
            }
        }
    }
    Ok((units, broken))
}

/// Side-by-side report for named suite directories.
pub fn naturalness_report(suites: &[(String, PathBuf)], projects: &Projects) -> Result<NaturalnessReport, NaturalnessError> {
    let mut out = Vec::new();
    for (name, dir) in suites {
        let (units, broken) = load_suite(dir)?;
        let mut report = suite_report(name, &units, projects);
        report.skipped.extend(broken);
        out.push(report);
    }
    Ok(NaturalnessReport { suites: out })
}
