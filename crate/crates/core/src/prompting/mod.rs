//! Generation, repair and coverage prompts assembled from named slots.

mod context;
mod templates;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::code_model::Language;
use crate::pipeline::Diagnostic;

pub use context::{ContextOptions, FocalContext, FocalUnit};
pub use templates::{TemplateError, Templates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptKind {
    Generation,
    Repair,
    Coverage,
}

impl PromptKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::Generation => "generation",
            PromptKind::Repair => "repair",
            PromptKind::Coverage => "coverage",
        }
    }
}

/// Prompt sections; declaration order is rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    /// Example focal/test pairs (Python).
    Fewshot,
    /// Relevant constructors.
    A,
    /// Accessor methods.
    B,
    /// Free-form guidance.
    C,
    /// Focal class and method, or focal module.
    D,
    /// Private-method call chains.
    E,
    /// Mocked fields and types with the test skeleton.
    F,
    /// Constructor and static call stubs.
    G,
    /// API call stubs.
    H,
    /// Diagnostics or uncovered lines.
    Feedback,
}

impl Slot {
    pub const ALL: [Slot; 10] =
        [Slot::Fewshot, Slot::A, Slot::B, Slot::C, Slot::D, Slot::E, Slot::F, Slot::G, Slot::H, Slot::Feedback];

    pub fn id(self) -> &'static str {
        match self {
            Slot::Fewshot => "fewshot",
            Slot::A => "a",
            Slot::B => "b",
            Slot::C => "c",
            Slot::D => "d",
            Slot::E => "e",
            Slot::F => "f",
            Slot::G => "g",
            Slot::H => "h",
            Slot::Feedback => "feedback",
        }
    }
}

/// Slots removed, in this order, when a prompt is over budget.
pub const TRUNCATION_ORDER: [Slot; 8] = [Slot::E, Slot::B, Slot::A, Slot::Fewshot, Slot::C, Slot::H, Slot::G, Slot::F];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub kind: PromptKind,
    pub language: Language,
    pub mocking: bool,
    pub system_preamble: String,
    pub sections: BTreeMap<Slot, String>,
    /// One-line description of the focal method or module.
    pub focal: String,
    /// Slots dropped to meet the token budget.
    pub dropped: Vec<Slot>,
}

impl PromptBundle {
    pub fn slots(&self) -> Vec<Slot> {
        self.sections.keys().copied().collect()
    }

    pub fn has(&self, slot: Slot) -> bool {
        self.sections.contains_key(&slot)
    }

    pub fn section(&self, slot: Slot) -> Option<&str> {
        self.sections.get(&slot).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("focal section alone needs {needed} tokens, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("no uncovered lines to target")]
    EmptyUncovered,
}

pub const DEFAULT_BUDGET_TOKENS: usize = 6000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptConfig {
    pub templates: Templates,
    pub budget_tokens: usize,
    /// Content of slot c; absent unless configured.
    pub guidance: Option<String>,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig { templates: Templates::bundled(), budget_tokens: DEFAULT_BUDGET_TOKENS, guidance: None }
    }
}

/// Rough token count: one token per four characters.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

pub fn render_with(bundle: &PromptBundle, templates: &Templates) -> String {
    let mut parts = vec![bundle.system_preamble.clone()];
    for slot in Slot::ALL {
        if let Some(content) = bundle.sections.get(&slot) {
            parts.push(templates.section(slot, content));
        }
    }
    let mut text = parts.join("\n\n");
    text.push('\n');
    text
}

/// Render with the bundled templates.
pub fn render(bundle: &PromptBundle) -> String {
    render_with(bundle, &Templates::bundled())
}

fn fit_budget(bundle: &mut PromptBundle, cfg: &PromptConfig) -> Result<(), PromptError> {
    let fits = |b: &PromptBundle| estimate_tokens(&render_with(b, &cfg.templates)) <= cfg.budget_tokens;
    for slot in TRUNCATION_ORDER {
        if fits(bundle) {
            return Ok(());
        }
        if bundle.sections.remove(&slot).is_some() {
            bundle.dropped.push(slot);
        }
    }
    if fits(bundle) {
        return Ok(());
    }
    let needed = estimate_tokens(&render_with(bundle, &cfg.templates));
    Err(PromptError::BudgetExceeded { needed, budget: cfg.budget_tokens })
}

fn bundle_for(ctx: &FocalContext<'_>, kind: PromptKind, cfg: &PromptConfig) -> PromptBundle {
    let mocking = ctx.mock_plan.is_some();
    let mut sections = ctx.sections();
    if let Some(g) = cfg.guidance.as_ref().filter(|g| !g.trim().is_empty()) {
        sections.insert(Slot::C, g.clone());
    }
    PromptBundle {
        kind,
        language: ctx.language,
        mocking,
        system_preamble: cfg.templates.preamble(kind, ctx.language, mocking),
        sections,
        focal: ctx.focal_summary(),
        dropped: Vec::new(),
    }
}

pub fn build_generation_prompt(ctx: &FocalContext<'_>, cfg: &PromptConfig) -> Result<PromptBundle, PromptError> {
    let mut bundle = bundle_for(ctx, PromptKind::Generation, cfg);
    fit_budget(&mut bundle, cfg)?;
    Ok(bundle)
}

fn fenced(language: Language, text: &str) -> String {
    format!("```{}\n{}\n```", language.as_str(), text.trim_end())
}

/// Prior context plus a feedback section describing the failure.
pub fn build_repair_prompt(
    prior: &PromptBundle,
    failing_test: &str,
    diagnostic: &Diagnostic,
    cfg: &PromptConfig,
) -> PromptBundle {
    let mut feedback = String::new();
    let _ = writeln!(feedback, "The {} step reported:", diagnostic.phase);
    let _ = writeln!(feedback, "{}", diagnostic.message.trim_end());
    let quoted = diagnostic.line.and_then(|n| failing_test.lines().nth((n as usize).checked_sub(1)?).map(|l| (n, l)));
    if let Some((n, line)) = quoted {
        let _ = writeln!(feedback, "\nThe problem is on line {n} of the test:\n{line}");
    }
    let _ = writeln!(feedback, "\nFocal: {}", prior.focal);
    let _ = write!(feedback, "\nCurrent test:\n{}", fenced(prior.language, failing_test));
    let mut sections = prior.sections.clone();
    sections.insert(Slot::Feedback, feedback);
    PromptBundle {
        kind: PromptKind::Repair,
        language: prior.language,
        mocking: prior.mocking,
        system_preamble: cfg.templates.preamble(PromptKind::Repair, prior.language, prior.mocking),
        sections,
        focal: prior.focal.clone(),
        dropped: prior.dropped.clone(),
    }
}

fn uncovered_feedback(focal: &str, lines: &[(u32, String)], shown: usize) -> String {
    let mut out = format!("Lines of {focal} not executed by the existing tests:\n");
    for (n, text) in &lines[..shown] {
        let _ = writeln!(out, "{n}: {text}");
    }
    if shown < lines.len() {
        let _ = writeln!(out, "({} more uncovered lines not shown)", lines.len() - shown);
    }
    out
}

/// Context plus the uncovered lines, listed verbatim with line numbers.
///
/// Over budget, the list is cut to its longest fitting prefix before any
/// context slot is dropped.
pub fn build_coverage_prompt(
    ctx: &FocalContext<'_>,
    uncovered: &[(u32, String)],
    cfg: &PromptConfig,
) -> Result<PromptBundle, PromptError> {
    if uncovered.is_empty() {
        return Err(PromptError::EmptyUncovered);
    }
    let mut bundle = bundle_for(ctx, PromptKind::Coverage, cfg);
    let with = |bundle: &PromptBundle, shown: usize| {
        let mut b = bundle.clone();
        b.sections.insert(Slot::Feedback, uncovered_feedback(&bundle.focal, uncovered, shown));
        b
    };
    let fits = |b: &PromptBundle| estimate_tokens(&render_with(b, &cfg.templates)) <= cfg.budget_tokens;
    let mut drop_order = TRUNCATION_ORDER.iter();
    loop {
        if fits(&with(&bundle, uncovered.len())) {
            return Ok(with(&bundle, uncovered.len()));
        }
        // largest prefix that fits; fitting is monotone in the prefix length
        let (mut lo, mut hi) = (1, uncovered.len());
        if fits(&with(&bundle, lo)) {
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if fits(&with(&bundle, mid)) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            return Ok(with(&bundle, lo));
        }
        match drop_order.next() {
            Some(slot) => {
                if bundle.sections.remove(slot).is_some() {
                    bundle.dropped.push(*slot);
                }
            }
            None => {
                let needed = estimate_tokens(&render_with(&with(&bundle, 1), &cfg.templates));
                return Err(PromptError::BudgetExceeded { needed, budget: cfg.budget_tokens });
            }
        }
    }
}
