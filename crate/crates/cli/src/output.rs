//! Artifact writing with provenance, and the `.partial` marker for failed runs.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use euphkit::provenance::Provenance;

pub const PARTIAL_MARKER: &str = ".partial";
pub const SIDECAR_SUFFIX: &str = ".provenance.json";

pub struct Output {
    pub dir: PathBuf,
    pub provenance: Provenance,
    pub prefix: String,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: PathBuf, provenance: Provenance, prefix: String) -> Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating output dir {}", dir.display()))?;
        Ok(Output {
            dir,
            provenance,
            prefix,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn report_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}{name}", self.prefix))
    }

    /// Records a file written by a library call and adds its sidecar.
    pub fn track(&mut self, path: &Path) -> Result<()> {
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(SIDECAR_SUFFIX);
        let sidecar = PathBuf::from(sidecar);
        std::fs::write(&sidecar, serde_json::to_string_pretty(&self.provenance)? + "\n")
            .with_context(|| format!("writing {}", sidecar.display()))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    pub fn text(&mut self, path: PathBuf, contents: &str) -> Result<PathBuf> {
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.track(&path)?;
        Ok(path)
    }

    /// JSON objects get an embedded `provenance` key (kept if already
    /// present); other JSON values get a sidecar.
    pub fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        let embedded = match &mut v {
            Value::Object(map) => {
                map.entry("provenance").or_insert(serde_json::to_value(&self.provenance)?);
                true
            }
            _ => false,
        };
        std::fs::write(&path, serde_json::to_string_pretty(&v)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        if embedded {
            self.written.push(path.clone());
        } else {
            self.track(&path)?;
        }
        Ok(path)
    }

    pub fn clear_partial(&self) {
        let _ = std::fs::remove_file(self.dir.join(PARTIAL_MARKER));
    }

    pub fn mark_partial(&self, stage: &str, error: &anyhow::Error) -> Result<()> {
        let marker = serde_json::json!({
            "failed_stage": stage,
            "error": crate::describe(error),
            "written": self.written,
            "provenance": self.provenance,
        });
        std::fs::write(self.dir.join(PARTIAL_MARKER), serde_json::to_string_pretty(&marker)? + "\n")?;
        Ok(())
    }
}
