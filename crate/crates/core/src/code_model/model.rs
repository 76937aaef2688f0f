use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{
    is_primitive, parse_unit, Callable, CodeUnit, Import, Language, SyntaxError, TypeClass, TypeDecl, TypeRef,
};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("type `{0}` is declared more than once")]
    DuplicateType(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Outcome of resolving a [`TypeRef`] against a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution<'m> {
    Application(&'m TypeDecl),
    Library,
    Primitive,
    Unresolved,
}

impl Resolution<'_> {
    pub fn classification(&self) -> TypeClass {
        match self {
            Resolution::Application(_) => TypeClass::Application,
            Resolution::Library => TypeClass::Library,
            Resolution::Primitive => TypeClass::Primitive,
            Resolution::Unresolved => TypeClass::Unresolved,
        }
    }
}

/// Immutable collection of parsed units with a name index.
#[derive(Debug, Clone, Default)]
pub struct CodeModel {
    units: Vec<CodeUnit>,
    types: BTreeMap<String, (usize, usize)>,
    modules: BTreeMap<String, usize>,
}

const JAVA_LANG: &[&str] = &[
    "Object", "String", "Integer", "Long", "Short", "Byte", "Double", "Float", "Boolean", "Character", "Number",
    "Math", "System", "Thread", "Runnable", "Iterable", "Comparable", "CharSequence", "StringBuilder",
    "StringBuffer", "Exception", "RuntimeException", "Error", "Throwable", "IllegalArgumentException",
    "IllegalStateException", "NullPointerException", "UnsupportedOperationException",
    "IndexOutOfBoundsException", "ArrayIndexOutOfBoundsException", "ArithmeticException", "ClassCastException",
    "NumberFormatException", "CloneNotSupportedException", "InterruptedException", "Class", "Void", "Enum",
    "Record", "Override", "Deprecated", "SuppressWarnings", "FunctionalInterface", "AutoCloseable", "Cloneable",
    "AssertionError", "SecurityException", "ReflectiveOperationException", "ClassNotFoundException",
];

const PY_LIBRARY: &[&str] = &[
    "list", "dict", "set", "frozenset", "tuple", "object", "type", "Any", "List", "Dict", "Set", "Tuple",
    "Sequence", "Mapping", "Iterable", "Iterator", "Callable", "Union", "Exception", "ValueError", "TypeError",
    "KeyError", "IndexError", "RuntimeError", "AttributeError",
];

impl CodeModel {
    /// Qualify and classify every type reference, then index declarations.
    pub fn build(mut units: Vec<CodeUnit>) -> Result<Self, ModelError> {
        units.sort_by(|a, b| a.path.cmp(&b.path));
        let mut types = BTreeMap::new();
        let mut modules = BTreeMap::new();
        for (ui, unit) in units.iter().enumerate() {
            if unit.language == Language::Python {
                if let Some(m) = &unit.namespace {
                    modules.insert(m.clone(), ui);
                }
            }
            for (ti, decl) in unit.types.iter().enumerate() {
                if types.insert(decl.qualified_name.clone(), (ui, ti)).is_some() {
                    return Err(ModelError::DuplicateType(decl.qualified_name.clone()));
                }
            }
        }
        let mut model = CodeModel { units: Vec::new(), types, modules };
        let mut resolved = Vec::with_capacity(units.len());
        for mut unit in units {
            let scope = Scope::of(&unit);
            for r in unit.type_refs_mut() {
                let (q, class) = model.qualify(&scope, &r.written, r.classification);
                r.qualified_name = q;
                r.classification = class;
            }
            resolved.push(unit);
        }
        model.units = resolved;
        Ok(model)
    }

    /// Parse every `.java` or `.py` file under `root` (paths stored relative to it).
    pub fn load_dir(root: &Path, language: Language) -> Result<Self, ModelError> {
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(root)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| !is_ignored_dir(e))
        {
            let entry = entry.map_err(|e| ModelError::Io {
                path: root.to_path_buf(),
                source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
            })?;
            if entry.file_type().is_file() && Language::from_path(entry.path()) == Some(language) {
                files.push(entry.into_path());
            }
        }
        let units = files
            .par_iter()
            .map(|path| {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ModelError::Io { path: path.clone(), source })?;
                let rel = relative_path(root, path);
                Ok(parse_unit(&rel, &text, language)?)
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Self::build(units)
    }

    pub fn units(&self) -> &[CodeUnit] {
        &self.units
    }

    pub fn unit(&self, path: &str) -> Option<&CodeUnit> {
        self.units.iter().find(|u| u.path == path)
    }

    pub fn type_decl(&self, qualified_name: &str) -> Option<&TypeDecl> {
        let (u, t) = self.types.get(qualified_name)?;
        Some(&self.units[*u].types[*t])
    }

    pub fn unit_of_type(&self, qualified_name: &str) -> Option<&CodeUnit> {
        self.types.get(qualified_name).map(|(u, _)| &self.units[*u])
    }

    pub fn types(&self) -> impl Iterator<Item = &TypeDecl> {
        self.units.iter().flat_map(|u| u.types.iter())
    }

    /// Python module by dotted name.
    pub fn module(&self, name: &str) -> Option<&CodeUnit> {
        self.modules.get(name).map(|i| &self.units[*i])
    }

    pub fn callables(&self) -> impl Iterator<Item = &Callable> {
        self.units.iter().flat_map(|u| u.callables())
    }

    /// Callables named `name`, in declaration order across units.
    pub fn callables_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Callable> + 'a {
        self.callables().filter(move |c| c.name == name)
    }

    /// Declaration of a referenced type, if it is an application type.
    pub fn decl_of(&self, r: &TypeRef) -> Option<&TypeDecl> {
        self.type_decl(&r.qualified_name)
    }

    fn qualify(&self, scope: &Scope, written: &str, prior: TypeClass) -> (String, TypeClass) {
        if written.is_empty() {
            return (String::new(), TypeClass::Unresolved);
        }
        if prior == TypeClass::Primitive || is_primitive(written, scope.language) {
            return (written.to_string(), TypeClass::Primitive);
        }
        if self.types.contains_key(written) {
            return (written.to_string(), TypeClass::Application);
        }
        match scope.language {
            Language::Java => self.qualify_java(scope, written),
            Language::Python => self.qualify_python(scope, written),
        }
    }

    fn qualify_java(&self, scope: &Scope, written: &str) -> (String, TypeClass) {
        if let Some((head, rest)) = written.split_once('.') {
            // Outer.Inner style reference to a nested type
            let (q, class) = self.qualify_java(scope, head);
            if class == TypeClass::Application {
                let nested = format!("{q}${}", rest.replace('.', "$"));
                if self.types.contains_key(&nested) {
                    return (nested, TypeClass::Application);
                }
            }
            for (i, _) in written.match_indices('.').collect::<Vec<_>>().into_iter().rev() {
                let candidate = format!("{}${}", &written[..i], written[i + 1..].replace('.', "$"));
                if self.types.contains_key(&candidate) {
                    return (candidate, TypeClass::Application);
                }
            }
            return (written.to_string(), TypeClass::Library);
        }
        // nested or sibling type in the same file
        if let Some((_, q)) = scope.local_types.iter().find(|(simple, _)| simple == written) {
            return (q.clone(), TypeClass::Application);
        }
        for import in scope.imports.iter().filter(|i| !i.is_wildcard && !i.is_static) {
            if super::simple_name(&import.name) == written || import.name.ends_with(&format!(".{written}")) {
                let q = import.name.clone();
                if self.types.contains_key(&q) {
                    return (q, TypeClass::Application);
                }
                // import of a nested type: a.b.Outer.Inner
                if let Some((outer, inner)) = q.rsplit_once('.') {
                    let nested = format!("{outer}${inner}");
                    if self.types.contains_key(&nested) {
                        return (nested, TypeClass::Application);
                    }
                }
                return (q, TypeClass::Library);
            }
        }
        let same_pkg = match &scope.namespace {
            Some(p) => format!("{p}.{written}"),
            None => written.to_string(),
        };
        if self.types.contains_key(&same_pkg) {
            return (same_pkg, TypeClass::Application);
        }
        for import in scope.imports.iter().filter(|i| i.is_wildcard && !i.is_static) {
            let q = format!("{}.{written}", import.name);
            if self.types.contains_key(&q) {
                return (q, TypeClass::Application);
            }
        }
        if JAVA_LANG.contains(&written) {
            return (format!("java.lang.{written}"), TypeClass::Library);
        }
        (written.to_string(), TypeClass::Unresolved)
    }

    fn qualify_python(&self, scope: &Scope, written: &str) -> (String, TypeClass) {
        if PY_LIBRARY.contains(&written) {
            return (written.to_string(), TypeClass::Library);
        }
        if let Some(m) = &scope.namespace {
            let local = format!("{m}.{written}");
            if self.types.contains_key(&local) {
                return (local, TypeClass::Application);
            }
        }
        let (head, rest) = match written.split_once('.') {
            Some((h, r)) => (h, Some(r)),
            None => (written, None),
        };
        for import in scope.imports.iter().filter(|i| !i.is_wildcard) {
            let bound = import.alias.as_deref().unwrap_or_else(|| {
                if rest.is_some() {
                    import.name.split('.').next().unwrap_or(&import.name)
                } else {
                    super::simple_name(&import.name)
                }
            });
            if bound != head {
                continue;
            }
            let base = if import.alias.is_some() || rest.is_none() {
                import.name.clone()
            } else {
                head.to_string()
            };
            let q = match rest {
                Some(r) => format!("{base}.{r}"),
                None => base,
            };
            let class = if self.types.contains_key(&q) { TypeClass::Application } else { TypeClass::Library };
            return (q, class);
        }
        for import in scope.imports.iter().filter(|i| i.is_wildcard) {
            let q = format!("{}.{written}", import.name);
            if self.types.contains_key(&q) {
                return (q, TypeClass::Application);
            }
        }
        (written.to_string(), TypeClass::Unresolved)
    }
}

/// Classify a reference against the model; application iff declared there.
pub fn resolve_type<'m>(r: &TypeRef, model: &'m CodeModel) -> Resolution<'m> {
    if let Some(decl) = model.type_decl(&r.qualified_name) {
        return Resolution::Application(decl);
    }
    let name = r.qualified_name.as_str();
    if r.classification == TypeClass::Primitive
        || is_primitive(name, Language::Java)
        || is_primitive(name, Language::Python)
    {
        return Resolution::Primitive;
    }
    if r.classification == TypeClass::Library
        || name.contains('.')
        || JAVA_LANG.contains(&name)
        || PY_LIBRARY.contains(&name)
    {
        return Resolution::Library;
    }
    Resolution::Unresolved
}

struct Scope {
    language: Language,
    namespace: Option<String>,
    imports: Vec<Import>,
    /// (simple name, qualified name) of named types declared in the unit
    local_types: Vec<(String, String)>,
}

impl Scope {
    fn of(unit: &CodeUnit) -> Self {
        Scope {
            language: unit.language,
            namespace: unit.namespace.clone(),
            imports: unit.imports.clone(),
            local_types: unit
                .types
                .iter()
                .filter(|t| !t.is_anonymous)
                .map(|t| (t.simple_name.clone(), t.qualified_name.clone()))
                .collect(),
        }
    }
}

fn is_ignored_dir(entry: &walkdir::DirEntry) -> bool {
    entry.depth() > 0
        && entry.file_type().is_dir()
        && entry.file_name().to_str().is_some_and(|n| {
            n.starts_with('.')
                || matches!(n, "target" | "build" | "node_modules" | "__pycache__" | "venv" | "site-packages")
        })
}

pub(crate) fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}
