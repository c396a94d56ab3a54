use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use awm::evaluation::{cumulative_csv, EvalReport};
use awm::memory::WorkflowStore;
use awm::types::{write_experiences, Experience};

/// Output directory of one invocation.
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> anyhow::Result<RunDir> {
        fs::create_dir_all(root).with_context(|| format!("creating run directory {}", root.display()))?;
        Ok(RunDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_experiences(&self, name: &str, experiences: &[Experience]) -> anyhow::Result<PathBuf> {
        self.write(name, &write_experiences(experiences))
    }

    pub fn write_store(&self, store: &WorkflowStore) -> anyhow::Result<PathBuf> {
        self.write("memory.md", &store.to_file_text())
    }

    /// Summary text, JSON report, per-example scores and the cumulative curve.
    pub fn write_report(&self, report: &EvalReport) -> anyhow::Result<()> {
        self.write("report.txt", &report.summary())?;
        self.write("report.json", &serde_json::to_string_pretty(report)?)?;
        self.write("scores.csv", &report.scores_csv())?;
        self.write("curve.csv", &cumulative_csv(&report.cumulative_sr))?;
        Ok(())
    }
}
