use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Diagnostic;
use crate::code_model::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Raw,
    Sanitized,
    Compiling,
    Passing,
    Failing,
    Discarded,
}

impl Status {
    fn rank(self) -> u8 {
        match self {
            Status::Raw => 0,
            Status::Sanitized => 1,
            Status::Compiling => 2,
            Status::Passing | Status::Failing => 3,
            Status::Discarded => 4,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Status::Passing | Status::Failing | Status::Discarded)
    }

    /// raw → sanitized → compiling → passing|failing, and anything →
    /// discarded.
    pub fn can_become(self, next: Status) -> bool {
        if self == Status::Discarded {
            return false;
        }
        next == Status::Discarded || (self.rank() + 1 == next.rank() && next != Status::Discarded)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Raw => "raw",
            Status::Sanitized => "sanitized",
            Status::Compiling => "compiling",
            Status::Passing => "passing",
            Status::Failing => "failing",
            Status::Discarded => "discarded",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Phase names used in history and attempt counts.
pub mod phase {
    pub const GENERATE: &str = "generate";
    pub const SANITIZE: &str = "sanitize";
    pub const COMPILE: &str = "compile";
    pub const LINT: &str = "lint";
    pub const RUNTIME: &str = "runtime";
    pub const COVERAGE: &str = "coverage";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub phase: String,
    pub status: Status,
    pub diagnostic: Option<Diagnostic>,
    pub prompt_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("illegal status transition {from} -> {to}")]
pub struct IllegalTransition {
    pub from: Status,
    pub to: Status,
}

use thiserror::Error;

/// One generated test file and its lifecycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestArtifact {
    pub id: String,
    pub target_id: String,
    pub language: Language,
    /// Path of the test file relative to the test root.
    pub path: String,
    pub text: String,
    pub status: Status,
    history: Vec<HistoryEntry>,
    pub attempt_counts: BTreeMap<String, u32>,
}

impl TestArtifact {
    pub fn new(id: &str, target_id: &str, language: Language, raw_text: &str, prompt_hash: Option<String>) -> Self {
        TestArtifact {
            id: id.to_string(),
            target_id: target_id.to_string(),
            language,
            path: String::new(),
            text: raw_text.to_string(),
            status: Status::Raw,
            history: vec![HistoryEntry {
                phase: phase::GENERATE.to_string(),
                status: Status::Raw,
                diagnostic: None,
                prompt_hash,
            }],
            attempt_counts: BTreeMap::new(),
        }
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// Append a history entry without changing status.
    pub fn note(&mut self, phase: &str, diagnostic: Option<Diagnostic>, prompt_hash: Option<String>) {
        self.history.push(HistoryEntry { phase: phase.to_string(), status: self.status, diagnostic, prompt_hash });
    }

    pub fn advance(&mut self, phase: &str, to: Status, diagnostic: Option<Diagnostic>) -> Result<(), IllegalTransition> {
        if !self.status.can_become(to) {
            return Err(IllegalTransition { from: self.status, to });
        }
        self.status = to;
        self.history.push(HistoryEntry { phase: phase.to_string(), status: to, diagnostic, prompt_hash: None });
        Ok(())
    }

    pub fn discard(&mut self, phase: &str, diagnostic: Option<Diagnostic>) {
        if self.status != Status::Discarded {
            self.status = Status::Discarded;
            self.history.push(HistoryEntry { phase: phase.to_string(), status: Status::Discarded, diagnostic, prompt_hash: None });
        }
    }

    pub fn attempts(&self, phase: &str) -> u32 {
        self.attempt_counts.get(phase).copied().unwrap_or(0)
    }

    pub(crate) fn count_attempt(&mut self, phase: &str) {
        *self.attempt_counts.entry(phase.to_string()).or_insert(0) += 1;
    }

    /// Statuses recorded in history never move backwards.
    pub fn history_is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[0].status == w[1].status || w[0].status.can_become(w[1].status))
    }
}

/// Passing and failing artifacts; discarded ones are dropped.
pub fn split_outcomes(suite: &[TestArtifact]) -> (Vec<&TestArtifact>, Vec<&TestArtifact>) {
    let passing = suite.iter().filter(|a| a.status == Status::Passing).collect();
    let failing = suite.iter().filter(|a| a.status == Status::Failing).collect();
    (passing, failing)
}
