//! Focal-context analyses: testing scope, relevant constructors, accessors,
//! private call chains and mocking scope for Java; module scope, imported
//! constructors and few-shot examples for Python.

mod java;
mod mock;
mod python;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::code_model::TypeRef;

pub use java::{
    collect_auxiliary_methods, collect_relevant_constructors, compute_testing_scope, constructor_closure,
    find_private_call_chains, is_overridden, is_service_entry_class, AuxiliaryMethods, CallChain,
    ConstructorOptions, ConstructorSig, FocalTarget,
};
pub use mock::{
    StubKind,
    build_mock_skeleton, identify_mocked_fields_and_types, identify_mocking_scope, plan_mocks, EmptyPlan,
    MockPlan, MockedFieldsAndTypes, MockingScope, StubSlot, TestSkeleton, COMPLETION_MARKER,
};
pub use python::{
    collect_imported_constructors, compute_module_scope, select_fewshot_examples, ConfigError, FewShotConfig,
    FewShotExample, ModuleTarget,
};

#[derive(Debug, Error)]
pub enum AllowlistError {
    #[error("line {line}: invalid entry `{entry}`")]
    InvalidEntry { line: usize, entry: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// A set of type names matched exactly or by package prefix (`pkg.*`).
///
/// Used for both the mockable-API allowlist and service-entry base types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeAllowlist {
    exact: BTreeSet<String>,
    prefixes: BTreeSet<String>,
}

impl TypeAllowlist {
    pub fn new<I, S>(entries: I) -> Result<Self, AllowlistError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = TypeAllowlist::default();
        for (i, entry) in entries.into_iter().enumerate() {
            list.add(i + 1, entry.as_ref())?;
        }
        Ok(list)
    }

    /// One entry per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, AllowlistError> {
        let mut list = TypeAllowlist::default();
        for (i, line) in text.lines().enumerate() {
            let entry = line.split('#').next().unwrap_or("").trim();
            if !entry.is_empty() {
                list.add(i + 1, entry)?;
            }
        }
        Ok(list)
    }

    pub fn load(path: &Path) -> Result<Self, AllowlistError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| AllowlistError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    fn add(&mut self, line: usize, entry: &str) -> Result<(), AllowlistError> {
        let invalid = || AllowlistError::InvalidEntry { line, entry: entry.to_string() };
        let (name, is_prefix) = match entry.strip_suffix(".*") {
            Some(p) => (p, true),
            None => (entry, false),
        };
        let valid = !name.is_empty()
            && name
                .split(['.', '$'])
                .all(|seg| !seg.is_empty() && seg.chars().all(|c| c.is_alphanumeric() || c == '_'));
        if !valid {
            return Err(invalid());
        }
        if is_prefix {
            self.prefixes.insert(format!("{name}."));
        } else {
            self.exact.insert(name.to_string());
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty() && self.prefixes.is_empty()
    }

    pub fn contains_name(&self, qualified_name: &str) -> bool {
        if qualified_name.is_empty() {
            return false;
        }
        let dotted = qualified_name.replace('$', ".");
        [qualified_name, dotted.as_str()]
            .iter()
            .any(|n| self.exact.contains(*n) || self.prefixes.iter().any(|p| n.starts_with(p.as_str())))
    }

    /// Primitive types are never members.
    pub fn contains(&self, ty: &TypeRef) -> bool {
        ty.classification != crate::code_model::TypeClass::Primitive && self.contains_name(&ty.qualified_name)
    }
}

impl fmt::Display for TypeAllowlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.exact {
            writeln!(f, "{e}")?;
        }
        for p in &self.prefixes {
            writeln!(f, "{p}*")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::TypeClass;

    #[test]
    fn allowlist_prefix_and_exact() {
        let list = TypeAllowlist::parse("# apis\njava.sql.*\ncom.ext.Client  # http\n\n").unwrap();
        assert!(list.contains_name("java.sql.Connection"));
        assert!(list.contains_name("java.sql.x.Deep"));
        assert!(!list.contains_name("java.sqlx.Connection"));
        assert!(list.contains_name("com.ext.Client"));
        assert!(!list.contains_name("com.ext.ClientFactory"));
        assert!(!list.contains_name("com.ext.Client$Inner"));
        assert!(!list.contains(&TypeRef::qualified("int", TypeClass::Primitive)));
    }

    #[test]
    fn allowlist_rejects_garbage() {
        let err = TypeAllowlist::parse("ok.Name\nbad name\n").unwrap_err();
        assert!(matches!(err, AllowlistError::InvalidEntry { line: 2, .. }));
        assert!(TypeAllowlist::parse(".*").is_err());
    }
}
