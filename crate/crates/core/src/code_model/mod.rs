//! Language-neutral facts about Java and Python sources.
//!
//! Parsing is delegated to tree-sitter grammars; this module only turns the
//! concrete syntax into declarations, call sites and type references. No
//! analysis lives here.

mod call_graph;
mod java;
mod model;
mod python;
mod syntax;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use call_graph::{build_class_call_graph, ClassCallGraph};
pub use model::{resolve_type, CodeModel, ModelError, Resolution};
pub use syntax::{parse_tree, snippet_call_sites};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Python,
}

impl Language {
    pub fn extension(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "py",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "python",
        }
    }

    pub fn fence_tags(self) -> &'static [&'static str] {
        match self {
            Language::Java => &["java"],
            Language::Python => &["python", "py", "python3"],
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "java" => Some(Language::Java),
            "py" => Some(Language::Python),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language `{0}` (expected `java` or `python`)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            "python" | "py" => Ok(Language::Python),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

/// Byte and line extent of a syntax node. Lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: u32,
    pub end_line: u32,
    pub start_col: u32,
}

impl Span {
    pub fn of(node: &tree_sitter::Node<'_>) -> Self {
        let start = node.start_position();
        let end = node.end_position();
        Span {
            start_byte: node.start_byte(),
            end_byte: node.end_byte(),
            start_line: start.row as u32 + 1,
            end_line: end.row as u32 + 1,
            start_col: start.column as u32 + 1,
        }
    }

    pub fn contains_line(&self, line: u32) -> bool {
        self.start_line <= line && line <= self.end_line
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }

    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start_byte..self.end_byte]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeKind {
    Class,
    Interface,
    AbstractClass,
    Enum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Public,
    Protected,
    Package,
    Private,
    NameMangled,
}

impl Visibility {
    pub fn is_private(self) -> bool {
        matches!(self, Visibility::Private | Visibility::NameMangled)
    }

    /// Python visibility follows the underscore naming convention. Dunder
    /// names such as `__init__` are public.
    pub fn from_python_name(name: &str) -> Self {
        if name.starts_with("__") && !name.ends_with("__") {
            Visibility::NameMangled
        } else if name.starts_with('_') && !name.starts_with("__") {
            Visibility::Protected
        } else {
            Visibility::Public
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeClass {
    Application,
    Library,
    Primitive,
    Unresolved,
}

/// A reference to a type, with generic arguments erased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeRef {
    pub qualified_name: String,
    /// Name as written in source, generics erased, without array brackets.
    pub written: String,
    pub array_dims: u8,
    pub classification: TypeClass,
}

impl TypeRef {
    /// An unresolved reference as it appears in source; `CodeModel::build`
    /// qualifies and classifies it.
    pub fn written(name: &str, array_dims: u8, language: Language) -> Self {
        let classification = if is_primitive(name, language) {
            TypeClass::Primitive
        } else {
            TypeClass::Unresolved
        };
        TypeRef {
            qualified_name: name.to_string(),
            written: name.to_string(),
            array_dims,
            classification,
        }
    }

    pub fn qualified(name: &str, classification: TypeClass) -> Self {
        TypeRef {
            qualified_name: name.to_string(),
            written: simple_name(name).to_string(),
            array_dims: 0,
            classification,
        }
    }

    pub fn simple_name(&self) -> &str {
        simple_name(&self.qualified_name)
    }

    pub fn is_application(&self) -> bool {
        self.classification == TypeClass::Application
    }

    pub fn is_void(&self) -> bool {
        self.qualified_name == "void" || self.qualified_name == "None"
    }

    pub fn display(&self) -> String {
        let mut s = self.written.clone();
        for _ in 0..self.array_dims {
            s.push_str("[]");
        }
        s
    }
}

/// Last segment of a dotted or `$`-nested name.
pub fn simple_name(name: &str) -> &str {
    name.rsplit(['.', '$']).next().unwrap_or(name)
}

pub(crate) fn is_primitive(name: &str, language: Language) -> bool {
    match language {
        Language::Java => matches!(
            name,
            "byte" | "short" | "int" | "long" | "float" | "double" | "boolean" | "char" | "void"
        ),
        Language::Python => matches!(name, "int" | "float" | "str" | "bool" | "bytes" | "None" | "complex"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallableKind {
    Constructor,
    Method,
    Function,
}

/// Syntactic shape of a body, used for accessor detection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyShape {
    /// No body (abstract or interface method).
    Absent,
    Empty,
    /// `return x;` / `return this.x;` / `return self.x`
    ReturnsName(String),
    /// `this.x = y;` / `x = y;` / `self.x = y` where `y` is a bare name.
    AssignsName { target: String, value: String },
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallSite {
    pub callee_name: String,
    /// Receiver expression as written (`c`, `this`, `self.conn`, `Util`).
    pub receiver: Option<String>,
    /// Static type of the receiver for instance calls.
    pub receiver_type: Option<TypeRef>,
    /// Constructed type for constructor calls, owner type for static calls.
    pub target_type: Option<TypeRef>,
    pub is_constructor_call: bool,
    pub is_static_call: bool,
    pub arg_count: usize,
    /// Key of the enclosing callable, see [`Callable::key`].
    pub enclosing: String,
    pub span: Span,
}

impl CallSite {
    /// The type Alg.-style classification uses for constructor/static calls.
    pub fn call_type(&self) -> Option<&TypeRef> {
        self.target_type.as_ref()
    }

    /// Receiver is the enclosing instance (or absent).
    pub fn is_self_call(&self) -> bool {
        matches!(self.receiver.as_deref(), None | Some("this") | Some("self") | Some("cls"))
    }

    pub fn display(&self) -> String {
        let args = vec!["_"; self.arg_count].join(", ");
        if self.is_constructor_call {
            format!("new {}({args})", self.callee_name)
        } else {
            match &self.receiver {
                Some(r) => format!("{r}.{}({args})", self.callee_name),
                None => format!("{}({args})", self.callee_name),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Callable {
    pub name: String,
    /// Qualified name of the declaring type, if any.
    pub owner: Option<String>,
    pub kind: CallableKind,
    pub visibility: Visibility,
    pub is_static: bool,
    pub is_abstract: bool,
    pub params: Vec<Param>,
    /// `None` for constructors.
    pub return_type: Option<TypeRef>,
    /// Annotation (Java) or decorator (Python) names, without `@`.
    pub annotations: Vec<String>,
    pub throws: Vec<TypeRef>,
    pub call_sites: Vec<CallSite>,
    pub span: Span,
    pub body_span: Option<Span>,
    pub body_shape: BodyShape,
}

impl Callable {
    /// Stable identity: `Owner#name(T1,T2)` using written parameter types.
    pub fn key(&self) -> String {
        callable_key(self.owner.as_deref(), &self.name, &self.params)
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn is_constructor(&self) -> bool {
        self.kind == CallableKind::Constructor
    }

    pub fn has_annotation(&self, name: &str) -> bool {
        self.annotations.iter().any(|a| a == name || a.ends_with(&format!(".{name}")))
    }

    /// Human-readable signature, e.g. `public Options addOption(String opt)`.
    pub fn signature(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|p| {
                if p.ty.written.is_empty() {
                    p.name.clone()
                } else {
                    format!("{} {}", p.ty.display(), p.name)
                }
            })
            .collect::<Vec<_>>()
            .join(", ");
        let mut out = String::new();
        match self.visibility {
            Visibility::Public => out.push_str("public "),
            Visibility::Protected => out.push_str("protected "),
            Visibility::Private => out.push_str("private "),
            Visibility::Package | Visibility::NameMangled => {}
        }
        if self.is_static {
            out.push_str("static ");
        }
        if let Some(ret) = &self.return_type {
            if !ret.written.is_empty() {
                out.push_str(&ret.display());
                out.push(' ');
            }
        }
        let name = match (&self.kind, &self.owner) {
            (CallableKind::Constructor, Some(owner)) => simple_name(owner).to_string(),
            _ => self.name.clone(),
        };
        out.push_str(&name);
        out.push('(');
        out.push_str(&params);
        out.push(')');
        out
    }
}

impl Callable {
    /// Python-style signature: `Circle(r: float)` for initializers,
    /// `def area(self) -> float` otherwise.
    pub fn python_signature(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|p| {
                if p.ty.written.is_empty() {
                    p.name.clone()
                } else {
                    format!("{}: {}", p.name, p.ty.written)
                }
            })
            .collect::<Vec<_>>()
            .join(", ");
        match (&self.kind, &self.owner) {
            (CallableKind::Constructor, Some(owner)) => format!("{}({params})", simple_name(owner)),
            _ => {
                let mut s = format!("def {}({params})", self.name);
                if let Some(ret) = self.return_type.as_ref().filter(|r| !r.written.is_empty()) {
                    s.push_str(" -> ");
                    s.push_str(&ret.written);
                }
                s
            }
        }
    }

    pub fn signature_for(&self, language: Language) -> String {
        match language {
            Language::Java => self.signature(),
            Language::Python => self.python_signature(),
        }
    }
}

pub(crate) fn callable_key(owner: Option<&str>, name: &str, params: &[Param]) -> String {
    let types = params.iter().map(|p| p.ty.display()).collect::<Vec<_>>().join(",");
    match owner {
        Some(o) => format!("{o}#{name}({types})"),
        None => format!("#{name}({types})"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub declared_type: TypeRef,
    pub owner: String,
    pub visibility: Visibility,
    pub is_static: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDecl {
    pub qualified_name: String,
    pub simple_name: String,
    pub kind: TypeKind,
    pub superclass: Option<TypeRef>,
    pub interfaces: Vec<TypeRef>,
    pub fields: Vec<FieldDecl>,
    pub callables: Vec<Callable>,
    pub visibility: Visibility,
    pub annotations: Vec<String>,
    pub is_anonymous: bool,
    /// Qualified name of the lexically enclosing type for nested types.
    pub enclosing: Option<String>,
    pub span: Span,
}

impl TypeDecl {
    pub fn is_abstract(&self) -> bool {
        matches!(self.kind, TypeKind::AbstractClass | TypeKind::Interface)
    }

    pub fn constructors(&self) -> impl Iterator<Item = &Callable> {
        self.callables.iter().filter(|c| c.is_constructor())
    }

    pub fn methods(&self) -> impl Iterator<Item = &Callable> {
        self.callables.iter().filter(|c| !c.is_constructor())
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn supertypes(&self) -> impl Iterator<Item = &TypeRef> {
        self.superclass.iter().chain(self.interfaces.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Import {
    /// Fully qualified imported name; for wildcard imports the package.
    pub name: String,
    pub is_static: bool,
    pub is_wildcard: bool,
    pub alias: Option<String>,
}

impl Import {
    pub fn simple(name: &str) -> Self {
        Import { name: name.to_string(), is_static: false, is_wildcard: false, alias: None }
    }
}

/// One parsed source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeUnit {
    pub path: String,
    pub language: Language,
    /// Java package or Python module name.
    pub namespace: Option<String>,
    pub imports: Vec<Import>,
    /// All type declarations, nested ones flattened.
    pub types: Vec<TypeDecl>,
    /// Top-level functions (Python only).
    pub functions: Vec<Callable>,
    pub source_text: String,
}

impl CodeUnit {
    pub fn parse(path: &str, source_text: &str, language: Language) -> Result<Self, SyntaxError> {
        parse_unit(path, source_text, language)
    }

    pub fn callables(&self) -> impl Iterator<Item = &Callable> {
        self.types.iter().flat_map(|t| t.callables.iter()).chain(self.functions.iter())
    }

    pub fn declaration_count(&self) -> usize {
        self.types.len() + self.callables().count()
    }

    pub fn line(&self, line: u32) -> Option<&str> {
        self.source_text.lines().nth(line.checked_sub(1)? as usize)
    }

    pub fn type_decl(&self, qualified_name: &str) -> Option<&TypeDecl> {
        self.types.iter().find(|t| t.qualified_name == qualified_name)
    }

    /// Source text of a top-level type including nested members.
    pub fn type_source(&self, decl: &TypeDecl) -> &str {
        decl.span.text(&self.source_text)
    }

    pub(crate) fn type_refs_mut(&mut self) -> Vec<&mut TypeRef> {
        let mut out: Vec<&mut TypeRef> = Vec::new();
        fn callable_refs<'a>(c: &'a mut Callable, out: &mut Vec<&'a mut TypeRef>) {
            for p in &mut c.params {
                out.push(&mut p.ty);
            }
            if let Some(r) = &mut c.return_type {
                out.push(r);
            }
            for t in &mut c.throws {
                out.push(t);
            }
            for cs in &mut c.call_sites {
                if let Some(r) = &mut cs.receiver_type {
                    out.push(r);
                }
                if let Some(r) = &mut cs.target_type {
                    out.push(r);
                }
            }
        }
        for t in &mut self.types {
            if let Some(s) = &mut t.superclass {
                out.push(s);
            }
            for i in &mut t.interfaces {
                out.push(i);
            }
            for f in &mut t.fields {
                out.push(&mut f.declared_type);
            }
            for c in &mut t.callables {
                callable_refs(c, &mut out);
            }
        }
        for c in &mut self.functions {
            callable_refs(c, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}:{column}: syntax error: {message}")]
pub struct SyntaxError {
    pub path: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

/// Parse one source file into declarations, imports and call sites.
///
/// Type references are left as written; [`CodeModel::build`] qualifies them.
pub fn parse_unit(path: &str, source_text: &str, language: Language) -> Result<CodeUnit, SyntaxError> {
    let tree = syntax::parse_checked(path, source_text, language)?;
    let unit = match language {
        Language::Java => java::extract(path, source_text, &tree),
        Language::Python => python::extract(path, source_text, &tree),
    };
    Ok(unit)
}

/// Python module name for a path relative to the project root.
pub fn python_module_name(path: &str) -> String {
    let trimmed = path.trim_start_matches("./");
    let trimmed = trimmed.strip_prefix("src/").unwrap_or(trimmed);
    let no_ext = trimmed.strip_suffix(".py").unwrap_or(trimmed);
    let no_init = no_ext.strip_suffix("/__init__").unwrap_or(no_ext);
    no_init.replace(['/', '\\'], ".")
}

#[cfg(test)]
mod tests;
