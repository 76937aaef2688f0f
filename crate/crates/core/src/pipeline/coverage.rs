use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{CodeModel, Span};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileCoverage {
    /// Hit count per instrumentable line; 0 means not executed.
    pub lines: BTreeMap<u32, u64>,
    /// `(covered, total)` branch outcomes per line.
    pub branches: BTreeMap<u32, (u32, u32)>,
}

impl FileCoverage {
    pub fn covered_lines(&self) -> BTreeSet<u32> {
        self.lines.iter().filter(|(_, h)| **h > 0).map(|(l, _)| *l).collect()
    }

    pub fn is_covered(&self, line: u32) -> bool {
        self.lines.get(&line).is_some_and(|h| *h > 0)
    }

    fn merge(&mut self, other: &FileCoverage) {
        for (l, h) in &other.lines {
            *self.lines.entry(*l).or_insert(0) += h;
        }
        for (l, (c, t)) in &other.branches {
            let e = self.branches.entry(*l).or_insert((0, 0));
            e.1 = e.1.max(*t);
            e.0 = (e.0.max(*c)).min(e.1);
        }
    }
}

/// Ratio with an empty denominator counted as fully covered.
fn ratio(covered: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        covered as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCoverage {
    pub covered_lines: usize,
    pub total_lines: usize,
    pub covered_branches: usize,
    pub total_branches: usize,
}

impl RegionCoverage {
    pub fn line_rate(&self) -> f64 {
        ratio(self.covered_lines, self.total_lines)
    }

    pub fn branch_rate(&self) -> f64 {
        ratio(self.covered_branches, self.total_branches)
    }
}

/// Line and branch hits keyed by source file path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub files: BTreeMap<String, FileCoverage>,
}

#[derive(Debug, Error)]
pub enum CoverageError {
    #[error("malformed coverage XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("malformed coverage JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad coverage attribute `{attr}` = `{value}`")]
    Attribute { attr: String, value: String },
}

fn path_matches(key: &str, path: &str) -> bool {
    key == path || path.ends_with(&format!("/{key}")) || key.ends_with(&format!("/{path}"))
}

impl CoverageReport {
    pub fn merge(&mut self, other: &CoverageReport) {
        for (path, fc) in &other.files {
            self.files.entry(path.clone()).or_default().merge(fc);
        }
    }

    /// Coverage of `path`, matching report keys by path suffix so that
    /// package-relative keys line up with project-relative model paths.
    pub fn file(&self, path: &str) -> Option<&FileCoverage> {
        self.files.get(path).or_else(|| self.files.iter().find(|(k, _)| path_matches(k, path)).map(|(_, v)| v))
    }

    pub fn region(&self, path: &str, start_line: u32, end_line: u32) -> RegionCoverage {
        let mut r = RegionCoverage { covered_lines: 0, total_lines: 0, covered_branches: 0, total_branches: 0 };
        let Some(fc) = self.file(path) else { return r };
        for (_, hits) in fc.lines.range(start_line..=end_line) {
            r.total_lines += 1;
            if *hits > 0 {
                r.covered_lines += 1;
            }
        }
        for (_, (c, t)) in fc.branches.range(start_line..=end_line) {
            r.covered_branches += *c as usize;
            r.total_branches += *t as usize;
        }
        r
    }

    /// Instrumentable lines of the region that no test executed.
    pub fn uncovered_lines(&self, path: &str, start_line: u32, end_line: u32) -> Vec<u32> {
        self.file(path)
            .map(|fc| fc.lines.range(start_line..=end_line).filter(|(_, h)| **h == 0).map(|(l, _)| *l).collect())
            .unwrap_or_default()
    }
}

fn attr_u64(node: roxmltree::Node<'_, '_>, name: &str) -> Result<u64, CoverageError> {
    let value = node.attribute(name).unwrap_or("0");
    value.parse().map_err(|_| CoverageError::Attribute { attr: name.to_string(), value: value.to_string() })
}

/// JaCoCo XML: one `<sourcefile>` per file under its `<package>`, with
/// `<line nr mi ci mb cb>` entries. Keys are `package/File.java`.
pub fn parse_jacoco_xml(text: &str) -> Result<CoverageReport, CoverageError> {
    let opts = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    let doc = roxmltree::Document::parse_with_options(text, opts)?;
    let mut report = CoverageReport::default();
    for pkg in doc.descendants().filter(|n| n.has_tag_name("package")) {
        let pkg_name = pkg.attribute("name").unwrap_or("");
        for sf in pkg.children().filter(|n| n.has_tag_name("sourcefile")) {
            let file = sf.attribute("name").unwrap_or("");
            let key = if pkg_name.is_empty() { file.to_string() } else { format!("{pkg_name}/{file}") };
            let fc = report.files.entry(key).or_default();
            for line in sf.children().filter(|n| n.has_tag_name("line")) {
                let nr = attr_u64(line, "nr")? as u32;
                let ci = attr_u64(line, "ci")?;
                let (mb, cb) = (attr_u64(line, "mb")? as u32, attr_u64(line, "cb")? as u32);
                fc.lines.insert(nr, ci);
                if mb + cb > 0 {
                    fc.branches.insert(nr, (cb, mb + cb));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Deserialize)]
struct PyCovFile {
    #[serde(default)]
    executed_lines: Vec<u32>,
    #[serde(default)]
    missing_lines: Vec<u32>,
    #[serde(default)]
    executed_branches: Vec<(i64, i64)>,
    #[serde(default)]
    missing_branches: Vec<(i64, i64)>,
}

#[derive(Deserialize)]
struct PyCovDoc {
    files: BTreeMap<String, PyCovFile>,
}

/// coverage.py `json` report; branch arcs are grouped by source line.
pub fn parse_coverage_py_json(text: &str) -> Result<CoverageReport, CoverageError> {
    let doc: PyCovDoc = serde_json::from_str(text)?;
    let mut report = CoverageReport::default();
    for (path, f) in doc.files {
        let mut fc = FileCoverage::default();
        for l in f.missing_lines {
            fc.lines.insert(l, 0);
        }
        for l in f.executed_lines {
            fc.lines.insert(l, 1);
        }
        for (from, _) in &f.executed_branches {
            let e = fc.branches.entry(*from as u32).or_insert((0, 0));
            e.0 += 1;
            e.1 += 1;
        }
        for (from, _) in &f.missing_branches {
            fc.branches.entry(*from as u32).or_insert((0, 0)).1 += 1;
        }
        report.files.insert(path.replace('\\', "/"), fc);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodCoverage {
    pub file: String,
    pub owner: Option<String>,
    pub key: String,
    pub start_line: u32,
    pub end_line: u32,
    pub covered: bool,
}

fn body_lines(span: &Span, body: Option<&Span>) -> (u32, u32) {
    let s = body.unwrap_or(span);
    (s.start_line, s.end_line)
}

/// A callable counts as covered when any executed line falls inside its
/// body; callables without a body use their full span.
pub fn infer_method_coverage(report: &CoverageReport, model: &CodeModel) -> Vec<MethodCoverage> {
    let mut out = Vec::new();
    for unit in model.units() {
        let fc = report.file(&unit.path);
        for c in unit.callables() {
            let (start, end) = body_lines(&c.span, c.body_span.as_ref());
            let covered = fc.is_some_and(|fc| fc.lines.range(start..=end).any(|(_, h)| *h > 0));
            out.push(MethodCoverage {
                file: unit.path.clone(),
                owner: c.owner.clone(),
                key: c.key(),
                start_line: start,
                end_line: end,
                covered,
            });
        }
    }
    out
}
