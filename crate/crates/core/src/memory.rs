//! Per-website workflow store and memory rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::induction::same_pattern;
use crate::types::{AgentMemory, Workflow};
use crate::workflow_text::{parse_workflow_file, render_workflow, render_workflow_file, WorkflowParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    /// Seeded once, then frozen.
    Offline,
    /// Starts empty and grows from judged test episodes.
    #[default]
    Online,
    /// Seeded from training workflows, then grows online.
    #[serde(alias = "offline+online")]
    OfflinePlusOnline,
}

impl MemoryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MemoryMode::Offline => "offline",
            MemoryMode::Online => "online",
            MemoryMode::OfflinePlusOnline => "offline+online",
        }
    }
}

impl fmt::Display for MemoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MemoryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<MemoryMode, String> {
        match s {
            "offline" => Ok(MemoryMode::Offline),
            "online" => Ok(MemoryMode::Online),
            "offline+online" | "offline_plus_online" => Ok(MemoryMode::OfflinePlusOnline),
            other => Err(format!("unknown memory mode `{other}`")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MemoryError {
    #[error("`{op}` is not allowed in {mode} mode")]
    Mode { mode: MemoryMode, op: &'static str },
    #[error("checkpoint {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint block {block}: {source}")]
    Parse {
        block: usize,
        #[source]
        source: WorkflowParseError,
    },
}

/// Workflows grouped by website, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct WorkflowStore {
    by_website: BTreeMap<String, Vec<Workflow>>,
    mode: MemoryMode,
    checkpoint: Option<PathBuf>,
}

impl WorkflowStore {
    pub fn new(mode: MemoryMode) -> WorkflowStore {
        WorkflowStore {
            by_website: BTreeMap::new(),
            mode,
            checkpoint: None,
        }
    }

    /// Rewrite `path` after every successful mutation.
    pub fn with_checkpoint(mut self, path: impl Into<PathBuf>) -> WorkflowStore {
        self.checkpoint = Some(path.into());
        self
    }

    pub fn mode(&self) -> MemoryMode {
        self.mode
    }

    pub fn workflows(&self, website: &str) -> &[Workflow] {
        self.by_website.get(website).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn websites(&self) -> impl Iterator<Item = &str> {
        self.by_website.keys().map(String::as_str)
    }

    pub fn all(&self) -> impl Iterator<Item = &Workflow> {
        self.by_website.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_website.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends workflows that are not duplicates of stored ones; returns how
    /// many were added. Rejected in offline mode.
    pub fn add_workflows(&mut self, website: &str, workflows: &[Workflow]) -> Result<usize, MemoryError> {
        if self.mode == MemoryMode::Offline {
            return Err(MemoryError::Mode {
                mode: self.mode,
                op: "add_workflows",
            });
        }
        let added = self.insert(website, workflows);
        if added > 0 {
            self.write_checkpoint()?;
        }
        Ok(added)
    }

    /// Pre-populates the store with training workflows. Seeding the same set
    /// twice adds nothing the second time.
    pub fn seed_offline<'a, I>(&mut self, per_website: I) -> Result<usize, MemoryError>
    where
        I: IntoIterator<Item = (&'a str, &'a [Workflow])>,
    {
        if self.mode == MemoryMode::Online {
            return Err(MemoryError::Mode {
                mode: self.mode,
                op: "seed_offline",
            });
        }
        let mut added = 0;
        for (website, workflows) in per_website {
            added += self.insert(website, workflows);
        }
        self.write_checkpoint()?;
        Ok(added)
    }

    fn insert(&mut self, website: &str, workflows: &[Workflow]) -> usize {
        let existing = self.by_website.entry(website.to_string()).or_default();
        let mut added = 0;
        for w in workflows {
            let mut w = w.clone();
            w.website = website.to_string();
            if existing.iter().any(|e| same_pattern(e, &w)) {
                continue;
            }
            if existing.iter().any(|e| e.id == w.id) {
                let base = w.id.clone();
                let mut k = 2;
                while existing.iter().any(|e| e.id == format!("{base}-{k}")) {
                    k += 1;
                }
                w.id = format!("{base}-{k}");
            }
            existing.push(w);
            added += 1;
        }
        added
    }

    /// The memory text for one website: `base_docs` alone when it has no
    /// workflows, otherwise `base_docs` followed by a `Workflows:` section.
    pub fn render_memory(&self, website: &str, base_docs: &str) -> String {
        let workflows = self.workflows(website);
        if workflows.is_empty() {
            return base_docs.to_string();
        }
        let rendered: Vec<String> = workflows.iter().map(render_workflow).collect();
        format!("{base_docs}\n\nWorkflows:\n{}", rendered.join("\n\n"))
    }

    pub fn memory(&self, website: &str, base_docs: &str) -> AgentMemory {
        AgentMemory {
            website: website.to_string(),
            base_docs: base_docs.to_string(),
            workflows: self.workflows(website).to_vec(),
        }
    }

    pub fn to_file_text(&self) -> String {
        render_workflow_file(&self.all().cloned().collect::<Vec<_>>())
    }

    pub fn save(&self, path: &Path) -> Result<(), MemoryError> {
        std::fs::write(path, self.to_file_text()).map_err(|source| MemoryError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Loads a workflow file; websites come from the block headers.
    pub fn load(path: &Path, mode: MemoryMode) -> Result<WorkflowStore, MemoryError> {
        let text = std::fs::read_to_string(path).map_err(|source| MemoryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_file_text(&text, mode)
    }

    pub fn from_file_text(text: &str, mode: MemoryMode) -> Result<WorkflowStore, MemoryError> {
        let workflows = parse_workflow_file(text, "").map_err(|(block, source)| MemoryError::Parse { block, source })?;
        let mut store = WorkflowStore::new(mode);
        for w in workflows {
            let site = w.website.clone();
            store.insert(&site, &[w]);
        }
        Ok(store)
    }

    fn write_checkpoint(&self) -> Result<(), MemoryError> {
        match &self.checkpoint {
            Some(path) => self.save(path),
            None => Ok(()),
        }
    }
}
