use std::path::{Path, PathBuf};

use polytest_core::code_model::Language;
use polytest_core::llm::SamplingConfig;
use polytest_core::pipeline::SubprocessConfig;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    #[default]
    Live,
    Record,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatewayConfig {
    #[serde(default)]
    pub mode: GatewayMode,
    /// Recorded exchanges; required for record and replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub max_iters: u32,
    pub max_rounds: u32,
    pub target_coverage: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_iters: 3, max_rounds: 4, target_coverage: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AdapterConfig {
    /// Rule-driven stand-in described by a JSON file.
    Fake { path: PathBuf },
    Subprocess(SubprocessConfig),
}

fn default_output() -> PathBuf {
    PathBuf::from("polytest-out")
}

fn default_workers() -> usize {
    4
}

/// Everything a `generate` run needs. Loaded from TOML; flags override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub project_root: PathBuf,
    pub language: Language,
    /// Globs over qualified class names (Java) or module names (Python);
    /// empty selects everything.
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_allowlist: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_entries: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guidance: Option<String>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub model: SamplingConfig,
    #[serde(default)]
    pub gateway: GatewayConfig,
    pub adapter: AdapterConfig,
}

const SECRET_KEYS: &[&str] = &["api_key", "apikey", "key", "token", "secret", "password"];

/// Path-valued keys, resolved against the config file's directory.
const PATH_KEYS: &[&[&str]] = &[
    &["project_root"],
    &["output_dir"],
    &["mock_allowlist"],
    &["service_entries"],
    &["gateway", "session"],
    &["adapter", "path"],
];

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn find_secret(table: &Table, prefix: &str) -> Option<String> {
    for (k, v) in table {
        let key = format!("{prefix}{k}");
        if SECRET_KEYS.contains(&k.to_ascii_lowercase().as_str()) {
            return Some(key);
        }
        if let Value::Table(t) = v {
            if let Some(found) = find_secret(t, &format!("{key}.")) {
                return Some(found);
            }
        }
    }
    None
}

fn slot<'t>(table: &'t mut Table, path: &[&str]) -> Option<&'t mut Value> {
    let (last, parents) = path.split_last()?;
    let mut t = table;
    for p in parents {
        t = t.get_mut(*p)?.as_table_mut()?;
    }
    t.get_mut(*last)
}

fn resolve_paths(table: &mut Table, base: &Path) {
    for key in PATH_KEYS {
        if let Some(Value::String(s)) = slot(table, key) {
            if Path::new(s.as_str()).is_relative() {
                *s = base.join(s.as_str()).to_string_lossy().into_owned();
            }
        }
    }
}

/// Set `path` in `table`, creating intermediate tables.
pub fn set_key(table: &mut Table, path: &[&str], value: Value) {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut t = table;
    for p in parents {
        let entry = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        if !entry.is_table() {
            *entry = Value::Table(Table::new());
        }
        t = entry.as_table_mut().expect("just made a table");
    }
    t.insert(last.to_string(), value);
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(config_err)?;
        Self::from_table(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parse a config file, resolving its relative paths against the
    /// file's directory.
    pub fn read_table(path: &Path) -> Result<Table, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut table: Table = text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve_paths(&mut table, base);
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_table(Self::read_table(path)?)
    }

    pub fn from_table(table: Table) -> Result<Self, CliError> {
        if let Some(key) = find_secret(&table, "") {
            return Err(CliError::Config(format!(
                "`{key}` looks like a secret; set it in the environment variable named by model.api_key_env"
            )));
        }
        let cfg: RunConfig = table.try_into().map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let b = &self.budgets;
        if b.max_iters == 0 || b.max_rounds == 0 {
            return Err(CliError::Config("budgets.max_iters and budgets.max_rounds must be positive".into()));
        }
        if !(b.target_coverage > 0.0 && b.target_coverage <= 1.0) {
            return Err(CliError::Config(format!("budgets.target_coverage {} outside (0, 1]", b.target_coverage)));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be positive".into()));
        }
        if self.gateway.mode != GatewayMode::Live && self.gateway.session.is_none() {
            return Err(CliError::Config("record and replay modes need a session directory".into()));
        }
        self.model.validate().map_err(CliError::Config)
    }
}
