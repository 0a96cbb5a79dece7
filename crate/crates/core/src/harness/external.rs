//! Adapter for classifiers that run outside this process (for example a
//! transformer fine-tuning script).
//!
//! For every run the harness creates a work directory containing
//! `train.jsonl` and `test.jsonl` (one example per line, canonical schema,
//! `text` already marker-stripped when configured) and `config.json`
//! (the `TrainConfig` plus `"seed"`). It then runs the configured command
//! through `sh -c` with the directory in `EUPHKIT_WORKDIR`. The command must
//! write `predictions.jsonl`, one `{"id": …, "label": 0|1}` object per test
//! example, and exit with status 0.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::Command;

use serde::Deserialize;

use super::{model_text, Capabilities, ClassifierBackend, TrainConfig, TrainedModel};
use crate::corpus::{Example, Label};
use crate::error::{Error, Result};

pub const EXTERNAL_WORKDIR_ENV: &str = "EUPHKIT_WORKDIR";

#[derive(Debug, Clone)]
pub struct ExternalBackend {
    id: String,
    command: String,
    languages: Option<Vec<String>>,
}

impl ExternalBackend {
    pub fn new(id: impl Into<String>, command: impl Into<String>) -> Self {
        ExternalBackend {
            id: id.into(),
            command: command.into(),
            languages: None,
        }
    }

    pub fn with_languages(mut self, languages: Vec<String>) -> Self {
        self.languages = Some(languages);
        self
    }
}

impl ClassifierBackend for ExternalBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            fine_tunable: true,
            deterministic: false,
            parallel_safe: false,
            languages: self.languages.clone(),
        }
    }

    fn resolved_config(&self, config: &TrainConfig) -> serde_json::Value {
        serde_json::json!({
            "backend": self.id,
            "command": self.command,
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "strip_markers": config.strip_markers,
            "options": config.options,
        })
    }

    fn fit(&self, train: &[&Example], config: &TrainConfig, seed: u64) -> Result<Box<dyn TrainedModel>> {
        Ok(Box::new(PendingRun {
            backend: self.clone(),
            train: train.iter().map(|e| (*e).clone()).collect(),
            config: config.clone(),
            seed,
        }))
    }
}

/// The external engine trains and predicts in one invocation, so fitting
/// only records the inputs.
struct PendingRun {
    backend: ExternalBackend,
    train: Vec<Example>,
    config: TrainConfig,
    seed: u64,
}

fn write_examples<'a>(path: &Path, examples: impl Iterator<Item = &'a Example>, strip: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ex in examples {
        let mut ex = ex.clone();
        ex.text = model_text(&ex, strip);
        serde_json::to_writer(&mut w, &ex)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

impl TrainedModel for PendingRun {
    fn predict_batch(&self, examples: &[&Example]) -> Result<Vec<Label>> {
        let id = self.backend.id.as_str();
        let dir = tempfile::tempdir().map_err(|e| Error::backend(id, format!("work dir: {e}")))?;
        let strip = self.config.strip_markers;
        write_examples(&dir.path().join("train.jsonl"), self.train.iter(), strip)?;
        write_examples(&dir.path().join("test.jsonl"), examples.iter().copied(), strip)?;
        let mut cfg = serde_json::to_value(&self.config)?;
        cfg["seed"] = self.seed.into();
        fs::write(dir.path().join("config.json"), serde_json::to_vec_pretty(&cfg)?)
            .map_err(|e| Error::io(dir.path(), e))?;

        let status = Command::new("sh")
            .arg("-c")
            .arg(&self.backend.command)
            .env(EXTERNAL_WORKDIR_ENV, dir.path())
            .status()
            .map_err(|e| Error::backend(id, format!("cannot start command: {e}")))?;
        if !status.success() {
            return Err(Error::backend(id, format!("command exited with {status}")));
        }

        #[derive(Deserialize)]
        struct Row {
            id: String,
            label: Label,
        }
        let path = dir.path().join("predictions.jsonl");
        let file = File::open(&path).map_err(|e| Error::backend(id, format!("no predictions: {e}")))?;
        let mut by_id = HashMap::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line)?;
            by_id.insert(row.id, row.label);
        }
        examples
            .iter()
            .map(|e| {
                by_id
                    .get(&e.id)
                    .copied()
                    .ok_or_else(|| Error::backend(id, format!("no prediction for `{}`", e.id)))
            })
            .collect()
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::harness::{predict, train};

    fn ex(i: usize, euph: Label) -> Example {
        Example {
            id: format!("e{i}"),
            language: "en".into(),
            text: format!("a <b{i}> c"),
            pet: format!("b{i}"),
            euph_label: euph,
            vague_label: None,
            source: String::new(),
            country: None,
        }
    }

    #[test]
    fn command_contract() {
        // Labels every test example 1; checks that the inputs exist.
        let cmd = r#"cd "$EUPHKIT_WORKDIR" && test -s train.jsonl && test -s config.json &&
            sed 's/^{"id":"\([^"]*\)".*/{"id":"\1","label":1}/' test.jsonl > predictions.jsonl"#;
        let b = ExternalBackend::new("ext", cmd);
        let data = [ex(0, Label::One), ex(1, Label::Zero), ex(2, Label::Zero)];
        let refs: Vec<&Example> = data.iter().collect();
        let m = train(&b, &refs[..2], &TrainConfig::default(), 0).unwrap();
        let p = predict(m.as_ref(), &refs[2..]).unwrap();
        assert_eq!(p["e2"], Label::One);
    }

    #[test]
    fn failing_command() {
        let b = ExternalBackend::new("ext", "exit 3");
        let data = [ex(0, Label::One), ex(1, Label::Zero)];
        let refs: Vec<&Example> = data.iter().collect();
        let m = train(&b, &refs, &TrainConfig::default(), 0).unwrap();
        assert!(matches!(predict(m.as_ref(), &refs), Err(Error::Backend { .. })));
    }
}
