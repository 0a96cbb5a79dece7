//! Declarative pipeline configuration (JSON). Precedence: flags > file > defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use euphkit::corpus::CsvColumns;
use euphkit::embedding::{EmbedderKind, EmbedderSpec};
use euphkit::harness::LinearOptions;
use euphkit::sensitivity::DEFAULT_THRESHOLD;
use euphkit::{SplitPlan, TrainConfig, VaguenessConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    /// Completed review queue to merge.
    pub review: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// Word-vector table (TSV) for sensitivity scoring and the reference backend.
    pub vectors: Option<PathBuf>,
    /// Table for the file-backed sentence embedder.
    pub sentence_vectors: Option<PathBuf>,
    pub results: Vec<PathBuf>,
    pub scores: Option<PathBuf>,
    pub errors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    ReferenceLinear,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSpec {
    pub id: String,
    pub kind: BackendKind,
    /// Shell command for external backends.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub languages: Option<Vec<String>>,
    /// Default optimizer options for reference-linear variants.
    #[serde(default)]
    pub options: Option<LinearOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed; split and model seeds derive from it.
    pub seed: u64,
    pub out: PathBuf,
    /// Prefix for report file names (`<prefix>table4.csv`, ...).
    pub report_prefix: String,
    pub paths: Paths,
    pub csv_columns: Option<CsvColumns>,
    /// Defaults to a file-backed embedder over `paths.sentence_vectors`.
    pub sentence_embedder: Option<EmbedderSpec>,
    pub vagueness: VaguenessConfig,
    pub lexicon_threshold: f64,
    pub split: SplitPlan,
    pub train: TrainConfig,
    pub error_threshold: usize,
    pub backends: Vec<BackendSpec>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            out: PathBuf::from("out"),
            report_prefix: String::new(),
            paths: Paths::default(),
            csv_columns: None,
            sentence_embedder: None,
            vagueness: VaguenessConfig::default(),
            lexicon_threshold: DEFAULT_THRESHOLD,
            split: SplitPlan::default(),
            train: TrainConfig::default(),
            error_threshold: euphkit::analysis::DEFAULT_ERROR_THRESHOLD,
            backends: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Applies the root seed and validates every section.
    pub fn finish(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(o) = out {
            self.out = o;
        }
        self.split.seed = self.seed;
        self.train.seed = self.seed;
        self.vagueness.validate()?;
        self.split.validate()?;
        self.train.validate()?;
        if !(self.lexicon_threshold > 0.0 && self.lexicon_threshold < 1.0) {
            bail!("lexicon_threshold {} outside (0, 1)", self.lexicon_threshold);
        }
        for b in &self.backends {
            if b.kind == BackendKind::External && b.command.is_none() {
                bail!("external backend `{}` needs a command", b.id);
            }
        }
        Ok(self)
    }

    pub fn sentence_spec(&self) -> Result<EmbedderSpec> {
        if let Some(spec) = &self.sentence_embedder {
            return Ok(spec.clone());
        }
        let path = self
            .paths
            .sentence_vectors
            .as_ref()
            .context("no sentence embedder configured (set paths.sentence_vectors or --sentence-vectors)")?;
        Ok(EmbedderSpec::file(EmbedderKind::Sentence, path.to_string_lossy()))
    }
}

/// `Some(flag)` wins over the configured value.
pub fn pick(flag: Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| configured.clone())
        .with_context(|| format!("no {what} path given (flag or config `paths`)"))
}
