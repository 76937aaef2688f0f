use tree_sitter::{Node, Parser, Tree};

use super::{parse_unit, Language, SyntaxError};

fn parser_for(language: Language) -> Parser {
    let mut parser = Parser::new();
    let lang: tree_sitter::Language = match language {
        Language::Java => tree_sitter_java::LANGUAGE.into(),
        Language::Python => tree_sitter_python::LANGUAGE.into(),
    };
    parser.set_language(&lang).expect("bundled grammar is compatible");
    parser
}

/// Raw tree-sitter tree; error nodes are left in place.
pub fn parse_tree(source: &str, language: Language) -> Tree {
    parser_for(language).parse(source, None).expect("parser has a language and no timeout")
}

pub(crate) fn parse_checked(path: &str, source: &str, language: Language) -> Result<Tree, SyntaxError> {
    let tree = parse_tree(source, language);
    let root = tree.root_node();
    if root.has_error() {
        let bad = first_error(root).unwrap_or(root);
        let pos = bad.start_position();
        let message = if bad.is_missing() {
            format!("missing `{}`", bad.kind())
        } else {
            let text = &source[bad.byte_range()];
            let snippet: String = text.chars().take(40).collect();
            format!("unexpected `{}`", snippet.trim())
        };
        return Err(SyntaxError {
            path: path.to_string(),
            line: pos.row as u32 + 1,
            column: pos.column as u32 + 1,
            message,
        });
    }
    Ok(tree)
}

fn first_error(node: Node<'_>) -> Option<Node<'_>> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if child.has_error() || child.is_missing() {
            if let Some(found) = first_error(child) {
                return Some(found);
            }
        }
    }
    None
}

/// Re-parse a callable body in isolation and return its call sites as
/// `(callee, arg_count)` pairs in source order.
///
/// `is_constructor` selects a constructor wrapper for Java bodies that
/// contain `this(...)`/`super(...)`; `indent` is the 1-based start column of
/// the body, needed for Python blocks.
pub fn snippet_call_sites(
    body: &str,
    language: Language,
    is_constructor: bool,
    indent: u32,
) -> Result<Vec<(String, usize)>, SyntaxError> {
    let wrapped = match language {
        Language::Java if is_constructor => format!("class Snippet__ {{ Snippet__() {body} }}"),
        Language::Java => format!("class Snippet__ {{ void snippet__() {body} }}"),
        Language::Python => {
            let pad = " ".repeat(indent.saturating_sub(1) as usize);
            format!("def snippet__():\n{pad}{body}\n")
        }
    };
    let unit = parse_unit("<snippet>", &wrapped, language)?;
    let callable = unit.callables().next().expect("wrapper declares one callable");
    Ok(callable
        .call_sites
        .iter()
        .map(|cs| (cs.callee_name.clone(), cs.arg_count))
        .collect())
}

pub(crate) fn text<'a>(node: Node<'_>, source: &'a str) -> &'a str {
    &source[node.byte_range()]
}

pub(crate) fn named_children<'t>(node: Node<'t>) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).collect()
}

/// Strip generic arguments and annotations; return (name, array dims).
pub(crate) fn erase_type(text: &str) -> (String, u8) {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '<' => depth += 1,
            '>' => depth = depth.saturating_sub(1),
            '@' if depth == 0 => {
                // annotation on a type use: skip identifier and optional args
                while matches!(chars.peek(), Some(ch) if ch.is_alphanumeric() || *ch == '_' || *ch == '.') {
                    chars.next();
                }
                if chars.peek() == Some(&'(') {
                    let mut parens = 0;
                    for ch in chars.by_ref() {
                        if ch == '(' {
                            parens += 1;
                        } else if ch == ')' {
                            parens -= 1;
                            if parens == 0 {
                                break;
                            }
                        }
                    }
                }
            }
            c if depth == 0 && !c.is_whitespace() => out.push(c),
            _ => {}
        }
    }
    let mut dims = 0u8;
    while let Some(stripped) = out.strip_suffix("[]") {
        out = stripped.to_string();
        dims += 1;
    }
    if let Some(stripped) = out.strip_suffix("...") {
        out = stripped.to_string();
        dims += 1;
    }
    (out, dims)
}
