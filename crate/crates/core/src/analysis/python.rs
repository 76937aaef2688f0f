use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::java::usable_constructors;
use super::ConstructorSig;
use crate::code_model::{parse_unit, Callable, CodeModel, CodeUnit, Language, SyntaxError, TypeDecl};

/// A whole Python module as a single generation target.
#[derive(Debug, Clone)]
pub struct ModuleTarget<'m> {
    pub module: &'m CodeUnit,
    pub classes: Vec<&'m TypeDecl>,
    /// Methods of every class followed by module-level functions.
    pub callables: Vec<&'m Callable>,
}

impl ModuleTarget<'_> {
    pub fn member_count(&self) -> usize {
        self.classes.len() + self.callables.len()
    }

    pub fn name(&self) -> &str {
        self.module.namespace.as_deref().unwrap_or(&self.module.path)
    }
}

/// Every declaration of the module, underscore-prefixed ones included.
pub fn compute_module_scope(module: &CodeUnit) -> ModuleTarget<'_> {
    ModuleTarget { module, classes: module.types.iter().collect(), callables: module.callables().collect() }
}

fn imported_module<'m>(name: &str, model: &'m CodeModel) -> Option<&'m CodeUnit> {
    model.module(name).or_else(|| name.rsplit_once('.').and_then(|(m, _)| model.module(m)))
}

/// Initializer signatures of the classes in every in-project module the
/// given module imports.
pub fn collect_imported_constructors(module: &CodeUnit, model: &CodeModel) -> Vec<ConstructorSig> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for import in &module.imports {
        let Some(unit) = imported_module(&import.name, model) else { continue };
        if unit.path == module.path || !seen.insert(unit.path.as_str()) {
            continue;
        }
        for decl in &unit.types {
            out.extend(usable_constructors(decl, Language::Python));
        }
    }
    out
}

/// Where few-shot test examples come from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FewShotConfig {
    #[default]
    Bundled,
    Disabled,
    /// `<name>.focal.py` / `<name>.test.py` pairs; all pairs in name order
    /// unless `names` lists them explicitly.
    Corpus { dir: PathBuf, names: Option<Vec<String>> },
}

/// A focal module and a test for it, both Python.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotExample {
    pub name: String,
    pub focal_snippet: String,
    pub test_snippet: String,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("few-shot file {0} does not exist")]
    Missing(PathBuf),
    #[error("few-shot file {path} does not parse: {error}")]
    Unparsable { path: PathBuf, error: SyntaxError },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

const BUNDLED: [(&str, &str, &str); 2] = [
    ("stack", include_str!("../../fewshot/stack.focal.py"), include_str!("../../fewshot/stack.test.py")),
    (
        "temperature",
        include_str!("../../fewshot/temperature.focal.py"),
        include_str!("../../fewshot/temperature.test.py"),
    ),
];

fn read_checked(path: &Path) -> Result<String, ConfigError> {
    if !path.is_file() {
        return Err(ConfigError::Missing(path.to_path_buf()));
    }
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_unit(&path.display().to_string(), &text, Language::Python)
        .map_err(|error| ConfigError::Unparsable { path: path.to_path_buf(), error })?;
    Ok(text)
}

pub fn select_fewshot_examples(config: &FewShotConfig) -> Result<Vec<FewShotExample>, ConfigError> {
    match config {
        FewShotConfig::Disabled => Ok(Vec::new()),
        FewShotConfig::Bundled => Ok(BUNDLED
            .iter()
            .map(|(name, focal, test)| FewShotExample {
                name: name.to_string(),
                focal_snippet: focal.to_string(),
                test_snippet: test.to_string(),
            })
            .collect()),
        FewShotConfig::Corpus { dir, names } => {
            let names = match names {
                Some(n) => n.clone(),
                None => {
                    let entries =
                        std::fs::read_dir(dir).map_err(|source| ConfigError::Io { path: dir.clone(), source })?;
                    let mut found = BTreeSet::new();
                    for entry in entries.flatten() {
                        let file = entry.file_name().to_string_lossy().into_owned();
                        if let Some(stem) = file.strip_suffix(".focal.py") {
                            found.insert(stem.to_string());
                        }
                    }
                    found.into_iter().collect()
                }
            };
            names
                .iter()
                .map(|name| {
                    Ok(FewShotExample {
                        name: name.clone(),
                        focal_snippet: read_checked(&dir.join(format!("{name}.focal.py")))?,
                        test_snippet: read_checked(&dir.join(format!("{name}.test.py")))?,
                    })
                })
                .collect()
        }
    }
}
