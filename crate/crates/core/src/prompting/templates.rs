use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::{PromptKind, Slot};
use crate::code_model::Language;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template {0} is missing")]
    Missing(String),
    #[error("template {file} lacks placeholder {placeholder}")]
    NoPlaceholder { file: String, placeholder: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../../templates/v1/", $name, ".txt")))),*]
    };
}

const BUNDLED: [(&str, &str); 16] = bundled![
    "preamble.generation.java",
    "preamble.generation.python",
    "preamble.repair.java",
    "preamble.repair.python",
    "preamble.coverage.java",
    "preamble.coverage.python",
    "slot.fewshot",
    "slot.a",
    "slot.b",
    "slot.c",
    "slot.d",
    "slot.e",
    "slot.f",
    "slot.g",
    "slot.h",
    "slot.feedback",
];

/// Prompt wording: one preamble per (kind, language) and one section
/// template per slot, each containing its `{{slot}}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    files: BTreeMap<String, String>,
}

impl Templates {
    pub fn bundled() -> Self {
        Templates { files: BUNDLED.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    /// Load `<name>.txt` files from `dir`; every bundled name must exist.
    pub fn load_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut files = BTreeMap::new();
        for (name, _) in BUNDLED {
            let path = dir.join(format!("{name}.txt"));
            if !path.is_file() {
                return Err(TemplateError::Missing(path.display().to_string()));
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|source| TemplateError::Io { path: path.display().to_string(), source })?;
            if let Some(slot) = name.strip_prefix("slot.") {
                let placeholder = format!("{{{{{slot}}}}}");
                if !text.contains(&placeholder) {
                    return Err(TemplateError::NoPlaceholder { file: path.display().to_string(), placeholder });
                }
            }
            files.insert(name.to_string(), text);
        }
        Ok(Templates { files })
    }

    pub fn preamble(&self, kind: PromptKind, language: Language, mocking: bool) -> String {
        let text = &self.files[&format!("preamble.{}.{}", kind.as_str(), language.as_str())];
        text.replace("{{mocking}}", if mocking { " and Mockito" } else { "" }).trim_end().to_string()
    }

    pub fn section(&self, slot: Slot, content: &str) -> String {
        let text = &self.files[&format!("slot.{}", slot.id())];
        text.replace(&format!("{{{{{}}}}}", slot.id()), content.trim_end()).trim_end().to_string()
    }
}

impl Default for Templates {
    fn default() -> Self {
        Self::bundled()
    }
}
