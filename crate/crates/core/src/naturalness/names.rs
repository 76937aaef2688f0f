use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::similarity::{best_match, segments, similarity, split_identifier};
use super::test_methods;
use crate::code_model::{parse_tree, simple_name, Callable, CallableKind, CodeModel, CodeUnit, Language, TypeDecl};

const TEST_WORDS: &[&str] = &["test", "tests"];
const THROW_WORDS: &[&str] = &["throw", "throws", "thrown", "raise", "raises", "raised"];
const EXCEPTION_WORDS: &[&str] = &["exception", "error"];

/// A test name broken into what is matched against code identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameTokens {
    /// Candidate found in the name, if any.
    pub focal: Option<String>,
    pub tokens: Vec<String>,
    /// Adjacent-pair merges within a name segment.
    pub merged: Vec<String>,
    /// Exception phrases such as `throws`, `exception`; scored separately.
    pub exception_phrases: Vec<Vec<String>>,
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase()
}

/// Remove the first run of `needle` tokens, splitting the segment there.
fn remove_run(segs: &[Vec<String>], needle: &[String]) -> Option<Vec<Vec<String>>> {
    for (si, seg) in segs.iter().enumerate() {
        if seg.len() < needle.len() {
            continue;
        }
        for start in 0..=seg.len() - needle.len() {
            if seg[start..start + needle.len()] == *needle {
                let mut out: Vec<Vec<String>> = segs[..si].to_vec();
                out.push(seg[..start].to_vec());
                out.push(seg[start + needle.len()..].to_vec());
                out.extend(segs[si + 1..].iter().cloned());
                return Some(out);
            }
        }
    }
    None
}

pub fn split_test_name(test_name: &str, candidates: &[String]) -> NameTokens {
    let squashed = squash(test_name);
    let focal = candidates
        .iter()
        .filter(|c| !squash(c).is_empty() && squashed.contains(&squash(c)))
        .fold(None::<&String>, |best, c| match best {
            Some(b) if squash(b).len() >= squash(c).len() => Some(b),
            _ => Some(c),
        })
        .cloned();
    let mut segs = segments(test_name);
    if let Some(f) = &focal {
        let needle = split_identifier(f);
        segs = match remove_run(&segs, &needle) {
            Some(s) => s,
            // the candidate only matches across token boundaries
            None => segments(&squashed.replacen(&squash(f), "_", 1)),
        };
    }
    let mut out = NameTokens { focal, tokens: Vec::new(), merged: Vec::new(), exception_phrases: Vec::new() };
    for seg in segs {
        let seg: Vec<String> = seg.into_iter().filter(|t| !TEST_WORDS.contains(&t.as_str())).collect();
        let phrase_start = seg.iter().position(|t| THROW_WORDS.contains(&t.as_str())).or_else(|| {
            seg.last().filter(|t| EXCEPTION_WORDS.iter().any(|e| t.ends_with(e))).map(|_| 0)
        });
        let (plain, phrase) = seg.split_at(phrase_start.unwrap_or(seg.len()));
        if !phrase.is_empty() {
            out.exception_phrases.push(phrase.to_vec());
        }
        out.merged.extend(plain.windows(2).map(|w| format!("{}{}", w[0], w[1])));
        out.tokens.extend(plain.iter().cloned());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameScore {
    pub test_id: String,
    pub focal_match: bool,
    pub token_closeness: f64,
    pub total: f64,
}

/// An exception phrase is a full match when its non-verb part names, or is
/// part of, a thrown exception; otherwise its best similarity counts.
fn exception_phrase_score(phrase: &[String], exceptions: &[String]) -> f64 {
    let core: String = phrase.iter().filter(|t| !THROW_WORDS.contains(&t.as_str())).cloned().collect();
    let names: Vec<String> = exceptions.iter().map(|e| simple_name(e).to_lowercase()).collect();
    if names.is_empty() {
        return 0.0;
    }
    if core.is_empty() || names.iter().any(|n| n.contains(&core) || core.contains(n.as_str())) {
        return 1.0;
    }
    best_match(&core, names.iter().map(String::as_str)).map_or(0.0, |(_, s)| s)
}

pub fn test_name_score(
    test_name: &str,
    candidates: &[String],
    code_identifiers: &[String],
    thrown_exceptions: &[String],
) -> NameScore {
    let split = split_test_name(test_name, candidates);
    let pool: Vec<&str> = code_identifiers
        .iter()
        .chain(thrown_exceptions)
        .map(String::as_str)
        .collect();
    let mut scores: Vec<f64> = split
        .tokens
        .iter()
        .chain(&split.merged)
        .map(|t| best_match(t, pool.iter().copied()).map_or(0.0, |(_, s)| s))
        .collect();
    scores.extend(split.exception_phrases.iter().map(|p| exception_phrase_score(p, thrown_exceptions)));
    let token_closeness = if scores.is_empty() { 1.0 } else { scores.iter().sum::<f64>() / scores.len() as f64 };
    let focal_match = split.focal.is_some();
    NameScore {
        test_id: test_name.to_string(),
        focal_match,
        token_closeness,
        total: 0.5 * f64::from(u8::from(focal_match)) + 0.5 * token_closeness,
    }
}

const TEST_CLASS_AFFIXES: &[&str] = &["_ESTest", "ESTest", "TestCase", "Tests", "Test", "IT"];

/// Class under test guessed from a test class name (`OptionsTest` →
/// `Options`).
pub fn focal_class_name(test_class: &str) -> String {
    for affix in TEST_CLASS_AFFIXES {
        if let Some(stem) = test_class.strip_suffix(affix).filter(|s| !s.is_empty()) {
            return stem.to_string();
        }
    }
    test_class.strip_prefix("Test").filter(|s| !s.is_empty()).unwrap_or(test_class).to_string()
}

fn java_focal_class<'m>(test_file: &CodeUnit, model: &'m CodeModel) -> Option<&'m TypeDecl> {
    let test_class = test_file.types.iter().find(|t| t.enclosing.is_none())?;
    let name = focal_class_name(&test_class.simple_name);
    model.types().find(|t| t.simple_name == name && !t.is_anonymous)
}

fn python_focal_modules<'m>(test_file: &CodeUnit, model: &'m CodeModel) -> Vec<&'m CodeUnit> {
    let mut out: Vec<&CodeUnit> = Vec::new();
    for imp in &test_file.imports {
        let module = model.module(&imp.name).or_else(|| imp.name.rsplit_once('.').and_then(|(m, _)| model.module(m)));
        if let Some(m) = module.filter(|m| !out.iter().any(|o| o.path == m.path)) {
            out.push(m);
        }
    }
    out
}

fn is_assertion_helper(name: &str) -> bool {
    name.starts_with("assert") || matches!(name, "fail" | "raises" | "approx")
}

fn candidates_from<'c>(
    callables: impl Iterator<Item = &'c Callable>,
    language: Language,
    focal: Option<&TypeDecl>,
) -> Vec<String> {
    let testable: Option<BTreeSet<&str>> = focal.map(|decl| {
        decl.methods().filter(|m| !m.visibility.is_private()).map(|m| m.name.as_str()).collect()
    });
    let mut out: Vec<String> = Vec::new();
    for cs in callables.flat_map(|c| c.call_sites.iter()) {
        let keep = match language {
            Language::Java => testable.as_ref().is_some_and(|t| t.contains(cs.callee_name.as_str())),
            Language::Python => !is_assertion_helper(&cs.callee_name),
        };
        if keep && !out.contains(&cs.callee_name) {
            out.push(cs.callee_name.clone());
        }
    }
    out
}

/// Names that may be the method under test: calls into the focal class
/// for Java, every called name for Python.
pub fn infer_focal_methods(test_file: &CodeUnit, model: Option<&CodeModel>, language: Language) -> Vec<String> {
    let focal = model.and_then(|m| if language == Language::Java { java_focal_class(test_file, m) } else { None });
    candidates_from(test_methods(test_file).into_iter(), language, focal)
}

/// Per-file matching context: focal candidates per test, the identifier
/// pool and exceptions thrown by the focal code.
pub(crate) struct FocalScope<'m> {
    pub focal_class: Option<&'m TypeDecl>,
    pub identifiers: Vec<String>,
    pub exceptions: Vec<String>,
}

fn push_unique(out: &mut Vec<String>, s: &str) {
    if !s.is_empty() && !out.iter().any(|o| o == s) {
        out.push(s.to_string());
    }
}

fn harvest(callables: &[&Callable], out: &mut Vec<String>, exceptions: &mut Vec<String>) {
    for c in callables {
        if c.kind != CallableKind::Constructor {
            push_unique(out, &c.name);
        }
        for p in c.params.iter().filter(|p| p.name != "self" && p.name != "cls") {
            push_unique(out, &p.name);
        }
        for t in &c.throws {
            push_unique(exceptions, t.simple_name());
        }
        for cs in &c.call_sites {
            let n = simple_name(&cs.callee_name);
            if EXCEPTION_WORDS.iter().any(|e| n.to_lowercase().ends_with(e)) && n.starts_with(char::is_uppercase) {
                push_unique(exceptions, n);
            }
        }
    }
}

fn harvest_unit(unit: &CodeUnit, types: &[&TypeDecl], out: &mut Vec<String>, exceptions: &mut Vec<String>) {
    for t in types {
        push_unique(out, &t.simple_name);
        for f in &t.fields {
            push_unique(out, &f.name);
        }
        harvest(&t.callables.iter().collect::<Vec<_>>(), out, exceptions);
    }
    for imp in &unit.imports {
        push_unique(out, imp.alias.as_deref().unwrap_or(simple_name(&imp.name)));
    }
}

impl<'m> FocalScope<'m> {
    /// Identifiers of the focal class (Java) or imported project modules
    /// (Python) plus their imports; the whole project when no focal code
    /// is found.
    pub fn of(test_file: &CodeUnit, model: Option<&'m CodeModel>) -> Self {
        let mut scope = FocalScope { focal_class: None, identifiers: Vec::new(), exceptions: Vec::new() };
        let Some(model) = model else { return scope };
        let (ids, exc) = (&mut scope.identifiers, &mut scope.exceptions);
        match test_file.language {
            Language::Java => match java_focal_class(test_file, model) {
                Some(decl) => {
                    scope.focal_class = Some(decl);
                    if let Some(unit) = model.unit_of_type(&decl.qualified_name) {
                        harvest_unit(unit, &[decl], ids, exc);
                    }
                }
                None => {
                    for unit in model.units() {
                        harvest_unit(unit, &unit.types.iter().collect::<Vec<_>>(), ids, exc);
                    }
                }
            },
            Language::Python => {
                let mut modules = python_focal_modules(test_file, model);
                if modules.is_empty() {
                    modules = model.units().iter().collect();
                }
                for unit in modules {
                    harvest_unit(unit, &unit.types.iter().collect::<Vec<_>>(), ids, exc);
                    harvest(&unit.functions.iter().collect::<Vec<_>>(), ids, exc);
                }
            }
        }
        scope
    }

    pub fn candidates(&self, test: &Callable, language: Language) -> Vec<String> {
        candidates_from(std::iter::once(test), language, self.focal_class)
    }
}

// variable names

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarGroup {
    /// Strings, arrays, collections and boxed primitives.
    DataStructure,
    Other,
}

/// Type names treated as plain data holders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataStructureTypes(pub BTreeSet<String>);

impl Default for DataStructureTypes {
    fn default() -> Self {
        let names = [
            "String", "CharSequence", "StringBuilder", "Object", "List", "ArrayList", "LinkedList", "Collection",
            "Iterable", "Map", "HashMap", "TreeMap", "LinkedHashMap", "Set", "HashSet", "TreeSet", "LinkedHashSet",
            "Integer", "Long", "Double", "Float", "Short", "Byte", "Boolean", "Character", "int", "long", "double",
            "float", "short", "byte", "boolean", "char", "str", "list", "dict", "set", "tuple", "frozenset", "int",
            "float", "bool", "bytes", "List", "Dict", "Set", "Tuple", "Sequence", "Mapping",
        ];
        DataStructureTypes(names.iter().map(|s| s.to_string()).collect())
    }
}

impl DataStructureTypes {
    pub fn group(&self, type_name: Option<&str>, is_array: bool) -> VarGroup {
        match type_name {
            _ if is_array => VarGroup::DataStructure,
            Some(t) if !self.0.contains(t) => VarGroup::Other,
            _ => VarGroup::DataStructure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableScore {
    pub name: String,
    pub type_name: Option<String>,
    pub group: VarGroup,
    /// Called name and its formal parameter names.
    pub context: Vec<String>,
    pub best_match: Option<String>,
    pub score: f64,
}

/// Best similarity of a variable name against its initializer context and,
/// for non-data-structure types, the type name. A type name ending in the
/// variable name (`BasicParser parser`) is a full match.
pub fn score_variable(name: &str, type_name: Option<&str>, group: VarGroup, context: &[String]) -> Option<(String, f64)> {
    let mut best = best_match(name, context.iter().map(String::as_str)).map(|(m, s)| (m.to_string(), s));
    if group == VarGroup::Other {
        if let Some(t) = type_name {
            let s = if t.to_lowercase().ends_with(&name.to_lowercase()) { 1.0 } else { similarity(name, t) };
            if best.as_ref().is_none_or(|(_, b)| s > *b) {
                best = Some((t.to_string(), s));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVariables {
    pub test: String,
    pub variables: Vec<VariableScore>,
    /// Mean over scored variables; absent when there are none.
    pub score: Option<f64>,
}

struct Initializer {
    called: Option<String>,
    arity: usize,
    is_constructor: bool,
}

fn formal_params(model: Option<&CodeModel>, init: &Initializer) -> Vec<String> {
    let (Some(model), Some(called)) = (model, init.called.as_deref()) else { return Vec::new() };
    let matching: Vec<&Callable> = model
        .callables()
        .filter(|c| {
            if init.is_constructor {
                c.is_constructor() && c.owner.as_deref().is_some_and(|o| simple_name(o) == called)
            } else {
                !c.is_constructor() && c.name == called
            }
        })
        .collect();
    let chosen = matching.iter().find(|c| c.arity() == init.arity).or(matching.first());
    chosen
        .map(|c| c.params.iter().filter(|p| p.name != "self" && p.name != "cls").map(|p| p.name.clone()).collect())
        .unwrap_or_default()
}

fn text<'s>(node: Node<'_>, src: &'s str) -> &'s str {
    &src[node.byte_range()]
}

fn base_type(written: &str) -> (String, bool) {
    let is_array = written.contains('[');
    let no_generics = written.split('<').next().unwrap_or(written);
    let base = no_generics.trim_end_matches("[]").trim().trim_end_matches("...");
    (simple_name(base.trim_end_matches(|c| c == '[' || c == ']')).to_string(), is_array)
}

fn arg_count(args: Option<Node<'_>>) -> usize {
    args.map_or(0, |a| a.named_child_count())
}

fn java_initializer(value: Node<'_>, src: &str) -> Option<Initializer> {
    match value.kind() {
        "method_invocation" => Some(Initializer {
            called: value.child_by_field_name("name").map(|n| text(n, src).to_string()),
            arity: arg_count(value.child_by_field_name("arguments")),
            is_constructor: false,
        }),
        "object_creation_expression" => Some(Initializer {
            called: value.child_by_field_name("type").map(|t| base_type(text(t, src)).0),
            arity: arg_count(value.child_by_field_name("arguments")),
            is_constructor: true,
        }),
        "cast_expression" | "parenthesized_expression" => {
            let inner = value.child_by_field_name("value").or_else(|| value.named_child(0))?;
            java_initializer(inner, src)
        }
        _ => None,
    }
}

struct RawVariable {
    name: String,
    type_name: Option<String>,
    is_array: bool,
    init: Option<Initializer>,
}

fn collect_java_vars(node: Node<'_>, src: &str, out: &mut Vec<RawVariable>) {
    if node.kind() == "local_variable_declaration" {
        let written = node.child_by_field_name("type").map(|t| text(t, src)).unwrap_or("");
        let mut cursor = node.walk();
        for decl in node.children_by_field_name("declarator", &mut cursor) {
            let (Some(name), Some(value)) = (decl.child_by_field_name("name"), decl.child_by_field_name("value")) else {
                continue;
            };
            let init = java_initializer(value, src);
            let (mut type_name, mut is_array) = base_type(written);
            is_array |= decl.child_by_field_name("dimensions").is_some();
            if type_name == "var" {
                type_name = init.as_ref().filter(|i| i.is_constructor).and_then(|i| i.called.clone()).unwrap_or_default();
                is_array = false;
            }
            out.push(RawVariable {
                name: text(name, src).to_string(),
                type_name: Some(type_name).filter(|t| !t.is_empty()),
                is_array,
                init,
            });
        }
        return;
    }
    if matches!(node.kind(), "class_body" | "lambda_expression") {
        return;
    }
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        collect_java_vars(child, src, out);
    }
}

const PY_LITERALS: &[(&str, &str)] = &[
    ("string", "str"),
    ("concatenated_string", "str"),
    ("list", "list"),
    ("list_comprehension", "list"),
    ("dictionary", "dict"),
    ("dictionary_comprehension", "dict"),
    ("set", "set"),
    ("tuple", "tuple"),
    ("integer", "int"),
    ("float", "float"),
    ("true", "bool"),
    ("false", "bool"),
];

fn collect_python_vars(node: Node<'_>, src: &str, model: Option<&CodeModel>, out: &mut Vec<RawVariable>) {
    if node.kind() == "assignment" {
        let (Some(left), Some(right)) = (node.child_by_field_name("left"), node.child_by_field_name("right")) else {
            return;
        };
        if left.kind() != "identifier" {
            return;
        }
        let mut var = RawVariable { name: text(left, src).to_string(), type_name: None, is_array: false, init: None };
        if let Some((_, t)) = PY_LITERALS.iter().find(|(k, _)| *k == right.kind()) {
            var.type_name = Some(t.to_string());
        } else if right.kind() == "call" {
            let f = right.child_by_field_name("function");
            let called = f.and_then(|f| match f.kind() {
                "identifier" => Some(text(f, src).to_string()),
                "attribute" => f.child_by_field_name("attribute").map(|a| text(a, src).to_string()),
                _ => None,
            });
            let class = called.as_deref().and_then(|c| model?.types().find(|t| t.simple_name == c).map(|t| t.simple_name.clone()));
            let returned = called.as_deref().and_then(|c| {
                let f = model?.callables_named(c).find(|f| !f.is_constructor())?;
                f.return_type.as_ref().map(|r| base_type(&r.written).0).filter(|r| !r.is_empty())
            });
            var.type_name = class.clone().or(returned).or_else(|| {
                called.clone().filter(|c| DataStructureTypes::default().0.contains(c))
            });
            var.init = Some(Initializer {
                called,
                arity: arg_count(right.child_by_field_name("arguments")),
                is_constructor: class.is_some(),
            });
        }
        out.push(var);
        return;
    }
    if matches!(node.kind(), "function_definition" | "class_definition" | "lambda") {
        return;
    }
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        collect_python_vars(child, src, model, out);
    }
}

/// Variable-name scores per test method, with the default data-structure
/// type set.
pub fn variable_name_score(test_file: &CodeUnit, model: Option<&CodeModel>) -> Vec<TestVariables> {
    variable_name_score_with(test_file, model, &DataStructureTypes::default())
}

pub fn variable_name_score_with(
    test_file: &CodeUnit,
    model: Option<&CodeModel>,
    types: &DataStructureTypes,
) -> Vec<TestVariables> {
    let tree = parse_tree(&test_file.source_text, test_file.language);
    let src = test_file.source_text.as_str();
    let mut out = Vec::new();
    for test in test_methods(test_file) {
        let mut raw = Vec::new();
        if let Some(node) = test.body_span.and_then(|b| tree.root_node().descendant_for_byte_range(b.start_byte, b.end_byte)) {
            match test_file.language {
                Language::Java => collect_java_vars(node, src, &mut raw),
                Language::Python => collect_python_vars(node, src, model, &mut raw),
            }
        }
        let mut variables = Vec::new();
        for v in raw {
            let group = types.group(v.type_name.as_deref(), v.is_array);
            let mut context = Vec::new();
            if let Some(init) = &v.init {
                if let Some(c) = &init.called {
                    context.push(c.clone());
                }
                context.extend(formal_params(model, init));
            }
            let Some((best, score)) = score_variable(&v.name, v.type_name.as_deref(), group, &context) else {
                continue;
            };
            variables.push(VariableScore {
                name: v.name,
                type_name: v.type_name,
                group,
                context,
                best_match: Some(best),
                score,
            });
        }
        let score = (!variables.is_empty()).then(|| variables.iter().map(|v| v.score).sum::<f64>() / variables.len() as f64);
        out.push(TestVariables { test: test.name.clone(), variables, score });
    }
    out
}
