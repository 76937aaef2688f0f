use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Parse,
    Compile,
    Lint,
    Runtime,
    Assertion,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Parse => "parse",
            Phase::Compile => "compile",
            Phase::Lint => "lint",
            Phase::Runtime => "runtime",
            Phase::Assertion => "assertion",
        }
    }

    /// Static phases are checked before the test is executed.
    pub fn is_static(self) -> bool {
        matches!(self, Phase::Parse | Phase::Compile | Phase::Lint)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

/// One finding from a compiler, linter or test run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub phase: Phase,
    pub message: String,
    pub file: String,
    pub line: Option<u32>,
    pub severity: Severity,
    /// Lint category (`error`, `fatal`, `warning`, `convention`, `refactor`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

impl Diagnostic {
    pub fn new(phase: Phase, file: &str, line: Option<u32>, message: &str) -> Self {
        Diagnostic {
            phase,
            message: message.to_string(),
            file: file.to_string(),
            line,
            severity: Severity::Error,
            category: None,
        }
    }

    pub fn lint(file: &str, line: Option<u32>, category: &str, message: &str) -> Self {
        let severity = match category {
            "error" | "fatal" => Severity::Error,
            "warning" => Severity::Warning,
            _ => Severity::Info,
        };
        Diagnostic {
            phase: Phase::Lint,
            message: message.to_string(),
            file: file.to_string(),
            line,
            severity,
            category: Some(category.to_string()),
        }
    }

    /// Only errors ask for a repair; for lint that means the error/fatal
    /// categories.
    pub fn triggers_repair(&self) -> bool {
        match self.phase {
            Phase::Lint => matches!(self.category.as_deref(), Some("error" | "fatal")),
            _ => self.severity == Severity::Error,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{l}: {}: {}", self.file, self.phase, self.message),
            None => write!(f, "{}: {}: {}", self.file, self.phase, self.message),
        }
    }
}
