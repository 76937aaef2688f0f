//! The bundled Java and Python fixture projects with their scripted model
//! replies and fake toolchain configurations.

use std::path::{Path, PathBuf};

use polytest_core::code_model::{CodeModel, Language};
use polytest_core::llm::{ChatModel, ScriptedModel};
use polytest_core::pipeline::{build_contexts, enumerate_targets, run_pipeline, FakeToolchain, PipelineConfig, RunResult};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub struct Fixture {
    pub name: &'static str,
    pub root: PathBuf,
    pub language: Language,
    pub model: CodeModel,
    pub toolchain: FakeToolchain,
}

impl Fixture {
    pub fn load(name: &'static str, language: Language) -> Fixture {
        let dir = fixtures_dir();
        let root = dir.join(name);
        let model = CodeModel::load_dir(&root, language).expect("fixture parses");
        let toolchain_text = std::fs::read_to_string(dir.join(format!("{name}.toolchain.json"))).unwrap();
        Fixture { name, root, language, model, toolchain: FakeToolchain::from_json(&toolchain_text).unwrap() }
    }

    pub fn java_shop() -> Fixture {
        Self::load("java-shop", Language::Java)
    }

    pub fn python_geo() -> Fixture {
        Self::load("python-geo", Language::Python)
    }

    pub fn scripted(&self) -> ScriptedModel {
        let text = std::fs::read_to_string(fixtures_dir().join(format!("{}.script.json", self.name))).unwrap();
        ScriptedModel::from_json(&text).unwrap()
    }

    pub fn session_dir(&self) -> PathBuf {
        fixtures_dir().join("sessions").join(self.name)
    }

    pub fn config(&self) -> PipelineConfig {
        PipelineConfig { workers: 1, run_id: Some(format!("{}-fixture", self.name)), ..PipelineConfig::default() }
    }

    pub fn run(&self, gateway: &dyn ChatModel, cfg: &PipelineConfig) -> RunResult {
        let targets = enumerate_targets(&self.model, self.language, &|_| true);
        let contexts = build_contexts(targets, &self.model, &cfg.context).unwrap();
        run_pipeline(&self.root, &self.model, self.language, &contexts, gateway, &self.toolchain, cfg).unwrap()
    }
}
