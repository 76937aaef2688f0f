use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::{test_methods, NotATestFile};
use crate::code_model::{parse_tree, Callable, CodeUnit, Language};

/// Assertion counts for one test method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestAssertions {
    pub name: String,
    pub statements: usize,
    pub assertions: usize,
    pub has_duplicate: bool,
    pub has_null: bool,
    pub has_exception: bool,
}

impl TestAssertions {
    pub fn ratio(&self) -> f64 {
        if self.statements == 0 {
            0.0
        } else {
            self.assertions as f64 / self.statements as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionMetrics {
    /// Mean over tests of assertion statements per executable statement.
    pub assertion_ratio: f64,
    pub pct_no_assertions: f64,
    /// The next three are over tests with at least one assertion.
    pub pct_duplicate_assertions: f64,
    pub pct_null_assertions: f64,
    pub pct_exception_assertions: f64,
    pub tests: Vec<TestAssertions>,
}

fn pct(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

pub fn assertion_metrics(test_file: &CodeUnit) -> Result<AssertionMetrics, NotATestFile> {
    let tests = test_methods(test_file);
    if tests.is_empty() {
        return Err(NotATestFile(test_file.path.clone()));
    }
    let tree = parse_tree(&test_file.source_text, test_file.language);
    let per_test: Vec<TestAssertions> =
        tests.iter().map(|t| count_test(t, tree.root_node(), &test_file.source_text, test_file.language)).collect();
    let with: Vec<&TestAssertions> = per_test.iter().filter(|t| t.assertions > 0).collect();
    Ok(AssertionMetrics {
        assertion_ratio: per_test.iter().map(TestAssertions::ratio).sum::<f64>() / per_test.len() as f64,
        pct_no_assertions: pct(per_test.len() - with.len(), per_test.len()),
        pct_duplicate_assertions: pct(with.iter().filter(|t| t.has_duplicate).count(), with.len()),
        pct_null_assertions: pct(with.iter().filter(|t| t.has_null).count(), with.len()),
        pct_exception_assertions: pct(with.iter().filter(|t| t.has_exception).count(), with.len()),
        tests: per_test,
    })
}

#[derive(Default)]
struct Tally {
    statements: usize,
    assertions: Vec<String>,
    null: bool,
    exception: bool,
}

fn count_test(test: &Callable, root: Node<'_>, src: &str, language: Language) -> TestAssertions {
    let mut tally = Tally::default();
    if let Some(body) = test.body_span {
        if let Some(node) = root.descendant_for_byte_range(body.start_byte, body.end_byte) {
            match language {
                Language::Java => java_walk(node, src, &mut tally),
                Language::Python => python_walk(node, src, &mut tally),
            }
        }
    }
    if language == Language::Java {
        if let Some(decl) = root.descendant_for_byte_range(test.span.start_byte, test.span.end_byte) {
            if java_expects_exception(decl, src) {
                tally.assertions.push("@Test(expected)".into());
                tally.exception = true;
            }
        }
    }
    let mut seen = BTreeSet::new();
    let has_duplicate = tally.assertions.iter().any(|a| !seen.insert(a.clone()));
    TestAssertions {
        name: test.name.clone(),
        statements: tally.statements,
        assertions: tally.assertions.len(),
        has_duplicate,
        has_null: tally.null,
        has_exception: tally.exception,
    }
}

fn normalized(node: Node<'_>, src: &str) -> String {
    src[node.byte_range()].split_whitespace().collect()
}

fn text<'s>(node: Node<'_>, src: &'s str) -> &'s str {
    &src[node.byte_range()]
}

fn any_descendant(node: Node<'_>, pred: &dyn Fn(Node<'_>) -> bool) -> bool {
    if pred(node) {
        return true;
    }
    let mut cursor = node.walk();
    let children: Vec<Node<'_>> = node.children(&mut cursor).collect();
    children.into_iter().any(|c| any_descendant(c, pred))
}

const JAVA_NULL_FORMS: &[&str] = &["assertNull", "assertNotNull", "isNull", "isNotNull", "nullValue", "notNullValue"];
const JAVA_EXCEPTION_FORMS: &[&str] =
    &["assertThrows", "assertThrowsExactly", "assertThatThrownBy", "assertThatExceptionOfType", "expectThrows"];

/// Method names along an invocation chain, outermost first.
fn java_chain_names(mut node: Node<'_>, src: &str) -> Vec<String> {
    let mut names = Vec::new();
    while node.kind() == "method_invocation" {
        if let Some(n) = node.child_by_field_name("name") {
            names.push(text(n, src).to_string());
        }
        match node.child_by_field_name("object") {
            Some(obj) => node = obj,
            None => break,
        }
    }
    names
}

fn is_null_operand(n: Node<'_>) -> bool {
    n.kind() == "null_literal" || n.kind() == "none"
}

/// Name of the invoked method or function, last attribute segment for Python.
fn call_name<'s>(call: Node<'_>, src: &'s str) -> Option<&'s str> {
    match call.kind() {
        "method_invocation" => call.child_by_field_name("name").map(|n| text(n, src)),
        "call" => {
            let f = call.child_by_field_name("function")?;
            let f = if f.kind() == "attribute" { f.child_by_field_name("attribute")? } else { f };
            Some(text(f, src))
        }
        _ => None,
    }
}

/// A null/None literal passed straight to an assertion or compared against.
fn null_is_operand(node: Node<'_>, src: &str) -> bool {
    if matches!(node.kind(), "lambda_expression" | "lambda") {
        return false;
    }
    if is_null_operand(node) {
        let direct = node.parent().is_some_and(|p| match p.kind() {
            "binary_expression" | "comparison_operator" => true,
            "argument_list" => p
                .parent()
                .and_then(|call| call_name(call, src))
                .is_some_and(|n| n.starts_with("assert") || n.starts_with("is") || n == "fail"),
            _ => false,
        });
        if direct {
            return true;
        }
    }
    let mut cursor = node.walk();
    let children: Vec<Node<'_>> = node.children(&mut cursor).collect();
    children.into_iter().any(|c| null_is_operand(c, src))
}

fn java_assertion(stmt: Node<'_>, expr: Node<'_>, src: &str, tally: &mut Tally) {
    let names = java_chain_names(expr, src);
    if names.iter().any(|n| n.starts_with("assert") || n == "fail") {
        tally.assertions.push(normalized(stmt, src));
        tally.null |= names.iter().any(|n| JAVA_NULL_FORMS.contains(&n.as_str())) || null_is_operand(expr, src);
        tally.exception |= names.iter().any(|n| JAVA_EXCEPTION_FORMS.contains(&n.as_str()));
    }
}

fn java_walk(node: Node<'_>, src: &str, tally: &mut Tally) {
    match node.kind() {
        "expression_statement" => {
            tally.statements += 1;
            if let Some(expr) = node.named_child(0) {
                java_assertion(node, expr, src, tally);
            }
        }
        "local_variable_declaration" => {
            tally.statements += 1;
            let mut cursor = node.walk();
            let values: Vec<Node<'_>> = node
                .children_by_field_name("declarator", &mut cursor)
                .filter_map(|d| d.child_by_field_name("value"))
                .collect();
            if let Some(value) = values.first() {
                java_assertion(node, *value, src, tally);
            }
        }
        "assert_statement" => {
            tally.statements += 1;
            tally.assertions.push(normalized(node, src));
            tally.null |= null_is_operand(node, src);
        }
        "return_statement" | "throw_statement" | "yield_statement" => tally.statements += 1,
        "class_body" | "lambda_expression" => {}
        _ => {
            let mut cursor = node.walk();
            for child in node.named_children(&mut cursor) {
                java_walk(child, src, tally);
            }
        }
    }
}

fn java_expects_exception(decl: Node<'_>, src: &str) -> bool {
    let mut cursor = decl.walk();
    let Some(mods) = decl.named_children(&mut cursor).find(|c| c.kind() == "modifiers") else {
        return false;
    };
    any_descendant(mods, &|n| {
        n.kind() == "element_value_pair"
            && n.child_by_field_name("key").is_some_and(|k| text(k, src) == "expected")
    })
}

const PY_EXCEPTION_FORMS: &[&str] = &["raises", "assertRaises", "assertRaisesRegex", "assertRaisesRegexp"];
const PY_NULL_FORMS: &[&str] = &["assertIsNone", "assertIsNotNone"];

fn py_call_name<'s>(call: Node<'_>, src: &'s str) -> Option<&'s str> {
    if call.kind() != "call" {
        return None;
    }
    let f = call.child_by_field_name("function")?;
    match f.kind() {
        "identifier" => Some(text(f, src)),
        "attribute" => f.child_by_field_name("attribute").map(|a| text(a, src)),
        _ => None,
    }
}

fn py_exception_with(node: Node<'_>, src: &str) -> bool {
    any_descendant(node.child(1).unwrap_or(node), &|n| {
        n.kind() == "with_item"
            && n.child_by_field_name("value").is_some_and(|v| {
                let call = if v.kind() == "as_pattern" { v.named_child(0).unwrap_or(v) } else { v };
                py_call_name(call, src).is_some_and(|c| PY_EXCEPTION_FORMS.contains(&c))
            })
    })
}

fn python_walk(node: Node<'_>, src: &str, tally: &mut Tally) {
    match node.kind() {
        "expression_statement" => {
            tally.statements += 1;
            let Some(mut expr) = node.named_child(0) else { return };
            if expr.kind() == "assignment" {
                expr = expr.child_by_field_name("right").unwrap_or(expr);
            }
            if let Some(name) = py_call_name(expr, src) {
                if name.starts_with("assert") || name == "fail" || PY_EXCEPTION_FORMS.contains(&name) {
                    tally.assertions.push(normalized(node, src));
                    tally.null |= PY_NULL_FORMS.contains(&name) || null_is_operand(expr, src);
                    tally.exception |= PY_EXCEPTION_FORMS.contains(&name);
                }
            }
        }
        "assert_statement" => {
            tally.statements += 1;
            tally.assertions.push(normalized(node, src));
            tally.null |= null_is_operand(node, src);
        }
        "return_statement" | "raise_statement" | "delete_statement" | "global_statement" | "nonlocal_statement" => {
            tally.statements += 1
        }
        "with_statement" if py_exception_with(node, src) => {
            tally.statements += 1;
            let header = node.child_by_field_name("body").map_or(node.end_byte(), |b| b.start_byte());
            let text = src[node.start_byte()..header].split_whitespace().collect::<Vec<_>>().join(" ");
            tally.assertions.push(text);
            tally.exception = true;
            if let Some(body) = node.child_by_field_name("body") {
                python_walk(body, src, tally);
            }
        }
        "function_definition" | "class_definition" | "lambda" => {}
        _ => {
            let mut cursor = node.walk();
            for child in node.named_children(&mut cursor) {
                python_walk(child, src, tally);
            }
        }
    }
}
