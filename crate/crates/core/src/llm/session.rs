use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{prompt_sha256, ChatModel, Completion, GatewayError, SamplingConfig};

/// One recorded exchange; stored as `<prompt_sha256>[.<n>].json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub prompt_sha256: String,
    pub prompt: String,
    pub completion: String,
    pub model_id: String,
    pub timestamp: String,
}

fn session_err(path: &Path, e: impl std::fmt::Display) -> GatewayError {
    GatewayError::Session { path: path.display().to_string(), message: e.to_string() }
}

/// Forwards to an inner model and writes every exchange to `dir`.
///
/// The n-th call with the same prompt is stored as occurrence n; replay
/// serves occurrences in call order. Recording again overwrites.
pub struct RecordingModel<M: ChatModel> {
    inner: M,
    dir: PathBuf,
    calls: Mutex<BTreeMap<String, usize>>,
}

impl<M: ChatModel> RecordingModel<M> {
    pub fn new(inner: M, dir: &Path) -> Result<Self, GatewayError> {
        std::fs::create_dir_all(dir).map_err(|e| session_err(dir, e))?;
        Ok(RecordingModel { inner, dir: dir.to_path_buf(), calls: Mutex::default() })
    }
}

impl<M: ChatModel> ChatModel for RecordingModel<M> {
    fn complete(&self, prompt: &str, cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        let completion = self.inner.complete(prompt, cfg)?;
        let hash = prompt_sha256(prompt);
        let n = {
            let mut calls = self.calls.lock().unwrap();
            let n = calls.entry(hash.clone()).or_insert(0);
            *n += 1;
            *n - 1
        };
        let name = match n {
            0 => format!("{hash}.json"),
            n => format!("{hash}.{n}.json"),
        };
        let entry = SessionEntry {
            prompt_sha256: hash,
            prompt: prompt.to_string(),
            completion: completion.text.clone(),
            model_id: cfg.model_id.clone(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(&entry).map_err(|e| session_err(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| session_err(&path, e))?;
        Ok(completion)
    }
}

/// Serves recorded completions by prompt hash; unseen prompts fail.
#[derive(Debug, Default)]
pub struct ReplayModel {
    entries: BTreeMap<String, Vec<SessionEntry>>,
    cursor: Mutex<BTreeMap<String, usize>>,
}

impl ReplayModel {
    pub fn load(dir: &Path) -> Result<Self, GatewayError> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| session_err(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        // `<hash>.json` sorts before `<hash>.1.json`
        files.sort_by_key(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let (hash, n) = match stem.split_once('.') {
                Some((h, n)) => (h.to_string(), n.parse::<usize>().unwrap_or(usize::MAX)),
                None => (stem, 0),
            };
            (hash, n)
        });
        let mut entries: BTreeMap<String, Vec<SessionEntry>> = BTreeMap::new();
        for path in files {
            let text = std::fs::read_to_string(&path).map_err(|e| session_err(&path, e))?;
            let entry: SessionEntry = serde_json::from_str(&text).map_err(|e| session_err(&path, e))?;
            entries.entry(entry.prompt_sha256.clone()).or_default().push(entry);
        }
        Ok(ReplayModel { entries, cursor: Mutex::default() })
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ChatModel for ReplayModel {
    fn complete(&self, prompt: &str, _cfg: &SamplingConfig) -> Result<Completion, GatewayError> {
        let hash = prompt_sha256(prompt);
        let list = self.entries.get(&hash).ok_or_else(|| GatewayError::ReplayMiss { hash: hash.clone() })?;
        let mut cursor = self.cursor.lock().unwrap();
        let n = cursor.entry(hash).or_insert(0);
        let entry = &list[(*n).min(list.len() - 1)];
        *n += 1;
        Ok(Completion::canned(&entry.completion))
    }
}
