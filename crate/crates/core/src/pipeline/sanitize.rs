use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::code_model::{parse_unit, CodeUnit, Language};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("completion contains no usable test code")]
pub struct Unsalvageable;

static FENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?ms)^[ \t]*```[ \t]*([A-Za-z0-9_+-]*)[^\n]*\n(.*?)^[ \t]*```").unwrap());

const JAVA_TEST_IMPORTS: &str = "import org.junit.jupiter.api.Test;\nimport static org.junit.jupiter.api.Assertions.*;\n";

fn has_test_content(unit: &CodeUnit) -> bool {
    match unit.language {
        Language::Java => !unit.types.is_empty(),
        Language::Python => !unit.types.is_empty() || !unit.functions.is_empty(),
    }
}

fn parses_as_tests(text: &str, language: Language) -> bool {
    parse_unit("<completion>", text, language).is_ok_and(|u| has_test_content(&u))
}

/// Java snippets made only of methods get a wrapper class.
fn wrap_java_methods(text: &str) -> Option<String> {
    let mut imports = String::new();
    let mut body = String::new();
    for line in text.lines() {
        let t = line.trim_start();
        if t.starts_with("import ") || t.starts_with("package ") {
            imports.push_str(line);
            imports.push('\n');
        } else {
            body.push_str("    ");
            body.push_str(line);
            body.push('\n');
        }
    }
    if imports.is_empty() && text.contains("@Test") {
        imports.push_str(JAVA_TEST_IMPORTS);
    }
    let wrapped = format!("{imports}\npublic class GeneratedTest {{\n{body}}}\n");
    let unit = parse_unit("<completion>", &wrapped, Language::Java).ok()?;
    let has_methods = unit.types.first().is_some_and(|t| !t.callables.is_empty());
    has_methods.then_some(wrapped)
}

fn accept(text: &str, language: Language) -> Option<String> {
    if parses_as_tests(text, language) {
        return Some(text.to_string());
    }
    if language == Language::Java {
        return wrap_java_methods(text);
    }
    None
}

fn looks_like_code_start(line: &str, language: Language) -> bool {
    let t = line.trim_start();
    let starts: &[&str] = match language {
        Language::Java => &["package ", "import ", "@", "public ", "class ", "final ", "abstract ", "void ", "private ", "protected ", "static "],
        Language::Python => &["import ", "from ", "def ", "class ", "@", "async def "],
    };
    starts.iter().any(|s| t.starts_with(s))
}

/// Longest line range that starts at a code-looking line and parses.
fn longest_region(text: &str, language: Language) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let starts: Vec<usize> = (0..lines.len()).filter(|&i| looks_like_code_start(lines[i], language)).collect();
    let mut best: Option<(usize, String)> = None;
    for &start in &starts {
        for end in (start + 1..=lines.len()).rev() {
            let len = end - start;
            if best.as_ref().is_some_and(|(l, _)| *l >= len) {
                break;
            }
            let last = lines[end - 1].trim();
            if last.is_empty() || (language == Language::Java && !last.ends_with('}')) {
                continue;
            }
            let candidate = lines[start..end].join("\n") + "\n";
            if let Some(ok) = accept(&candidate, language) {
                best = Some((len, ok));
                break;
            }
        }
    }
    best.map(|(_, t)| t)
}

/// Extract test code from a raw completion.
///
/// Fenced blocks tagged for `language` are tried first, then untagged ones,
/// then the whole text, then the longest parseable region. Java method-only
/// snippets are wrapped in a class.
pub fn sanitize(raw: &str, language: Language) -> Result<String, Unsalvageable> {
    if raw.trim().is_empty() {
        return Err(Unsalvageable);
    }
    let blocks: Vec<(String, String)> =
        FENCE.captures_iter(raw).map(|c| (c[1].to_lowercase(), c[2].to_string())).collect();
    let tagged = blocks.iter().filter(|(tag, _)| language.fence_tags().contains(&tag.as_str()));
    let untagged = blocks.iter().filter(|(tag, _)| tag.is_empty());
    for (_, body) in tagged.chain(untagged) {
        if let Some(ok) = accept(body, language) {
            return Ok(ok);
        }
    }
    if let Some(ok) = accept(raw, language) {
        return Ok(ok);
    }
    for (_, body) in &blocks {
        if let Some(ok) = longest_region(body, language) {
            return Ok(ok);
        }
    }
    longest_region(raw, language).ok_or(Unsalvageable)
}
