//! Regenerate the recorded sessions under tests/fixtures/sessions from the
//! scripted fixture models.
//!
//! cargo run -p polytest-core --example record_sessions

#[path = "../tests/common/fixtures.rs"]
mod fixtures;

use fixtures::Fixture;
use polytest_core::llm::RecordingModel;

fn main() {
    for fixture in [Fixture::java_shop(), Fixture::python_geo()] {
        let dir = fixture.session_dir();
        if dir.exists() {
            std::fs::remove_dir_all(&dir).expect("clear old session");
        }
        let recorder = RecordingModel::new(fixture.scripted(), &dir).expect("session dir");
        let run = fixture.run(&recorder, &fixture.config());
        let files = std::fs::read_dir(&dir).map(|d| d.count()).unwrap_or(0);
        println!("{}: {} targets, {} passing, {} exchanges", fixture.name, run.targets.len(), run.passing_count(), files);
    }
}
