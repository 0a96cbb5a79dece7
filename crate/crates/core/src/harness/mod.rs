//! Classifier backends and multi-run experiments.
//!
//! A [`ClassifierBackend`] turns a training set into a [`TrainedModel`].
//! [`run_experiment`] builds splits from a [`SplitPlan`], trains and
//! evaluates one model per run, and collects predictions, macro metrics and
//! per-example misclassification counts into [`RunResults`].

mod external;
mod metrics;
mod reference;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Example, Label};
use crate::error::{Error, Result};
use crate::provenance::Provenance;
use crate::splits::{build_dataset, SplitKind, SplitPlan};

pub use external::{ExternalBackend, EXTERNAL_WORKDIR_ENV};
pub use metrics::{aggregate, evaluate, Aggregate, ClassMetrics, Confusion, Metrics};
pub use reference::{LinearOptions, ReferenceLinear, REFERENCE_LINEAR_ID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub backend_id: String,
    pub seed: u64,
    pub n_runs: usize,
    /// Feed marker-free text to the backend.
    pub strip_markers: bool,
    /// Backend-specific settings, passed through untouched.
    pub options: BTreeMap<String, serde_json::Value>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 1e-5,
            batch_size: 16,
            backend_id: REFERENCE_LINEAR_ID.into(),
            seed: 0,
            n_runs: 10,
            strip_markers: false,
            options: BTreeMap::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.n_runs == 0 {
            return Err(Error::TrainConfig("epochs, batch_size and n_runs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::TrainConfig(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if self.backend_id.is_empty() {
            return Err(Error::TrainConfig("empty backend_id".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub fine_tunable: bool,
    /// Identical (train set, config, seed) reproduce identical predictions.
    pub deterministic: bool,
    /// Several models may train concurrently.
    pub parallel_safe: bool,
    /// `None` means any language.
    pub languages: Option<Vec<String>>,
}

pub trait TrainedModel: Send + Sync {
    fn predict_batch(&self, examples: &[&Example]) -> Result<Vec<Label>>;
}

pub trait ClassifierBackend: Send + Sync {
    fn id(&self) -> &str;

    fn capabilities(&self) -> Capabilities;

    /// Full configuration the backend will actually use, recorded in results.
    fn resolved_config(&self, config: &TrainConfig) -> serde_json::Value;

    fn fit(&self, train: &[&Example], config: &TrainConfig, seed: u64) -> Result<Box<dyn TrainedModel>>;
}

/// Text handed to a backend: marker-inclusive unless `strip_markers` is set.
pub fn model_text(example: &Example, strip_markers: bool) -> String {
    if strip_markers {
        example.clean_text()
    } else {
        example.text.clone()
    }
}

/// Checks the training-set preconditions, then fits.
pub fn train(
    backend: &dyn ClassifierBackend,
    train_set: &[&Example],
    config: &TrainConfig,
    seed: u64,
) -> Result<Box<dyn TrainedModel>> {
    if train_set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let labels: BTreeSet<Label> = train_set.iter().map(|e| e.euph_label).collect();
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    if let Some(langs) = backend.capabilities().languages {
        if let Some(ex) = train_set.iter().find(|e| !langs.contains(&e.language)) {
            return Err(Error::backend(
                backend.id(),
                format!("language `{}` not supported", ex.language),
            ));
        }
    }
    backend.fit(train_set, config, seed)
}

/// One label per example, keyed by id. Duplicate ids are rejected.
pub fn predict(model: &dyn TrainedModel, examples: &[&Example]) -> Result<BTreeMap<String, Label>> {
    let mut seen = HashSet::with_capacity(examples.len());
    if let Some(dup) = examples.iter().find(|e| !seen.insert(e.id.as_str())) {
        return Err(Error::DuplicateId(dup.id.clone()));
    }
    if examples.is_empty() {
        return Ok(BTreeMap::new());
    }
    let labels = model.predict_batch(examples)?;
    if labels.len() != examples.len() {
        return Err(Error::backend("model", format!("{} predictions for {} examples", labels.len(), examples.len())));
    }
    Ok(examples.iter().map(|e| e.id.clone()).zip(labels).collect())
}

/// Backends selectable by id.
#[derive(Default, Clone)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn ClassifierBackend>>,
}

impl BackendRegistry {
    pub fn register(&mut self, backend: Arc<dyn ClassifierBackend>) {
        self.backends.insert(backend.id().to_string(), backend);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn ClassifierBackend>> {
        self.backends
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownBackend(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPrediction {
    pub id: String,
    pub gold: Label,
    pub pred: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub split_seed: u64,
    pub model_seed: u64,
    pub train_ids: Vec<String>,
    pub predictions: Vec<TestPrediction>,
    pub metrics: Metrics,
}

impl RunRecord {
    pub fn confusion(&self) -> Confusion {
        Confusion::from_pairs(self.predictions.iter().map(|p| (p.gold, p.pred)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisclassCount {
    pub misclassified: usize,
    /// Runs in which the example was in the test set.
    pub in_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub provenance: Provenance,
    pub backend_id: String,
    pub backend_config: serde_json::Value,
    /// Corpus language when monolingual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    pub plan: SplitPlan,
    pub train_config: TrainConfig,
    /// Holdout runs re-sample the balanced dataset with seed `plan.seed + i`.
    pub resampled_per_run: bool,
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
    pub misclass_counts: BTreeMap<String, MisclassCount>,
}

impl RunResults {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

pub fn misclass_counts(runs: &[RunRecord]) -> BTreeMap<String, MisclassCount> {
    let mut counts: BTreeMap<String, MisclassCount> = BTreeMap::new();
    for run in runs {
        for p in &run.predictions {
            let c = counts.entry(p.id.clone()).or_default();
            c.in_test += 1;
            if p.gold != p.pred {
                c.misclassified += 1;
            }
        }
    }
    counts
}

/// Recomputes every run's metrics from its stored predictions, then the
/// aggregate and misclassification counts.
pub fn replay(results: &RunResults) -> RunResults {
    let mut out = results.clone();
    for run in &mut out.runs {
        run.metrics = Metrics::from_confusion(run.confusion());
    }
    out.aggregate = aggregate(out.runs.iter().map(|r| &r.metrics));
    out.misclass_counts = misclass_counts(&out.runs);
    out
}

fn run_once(
    corpus: &Corpus,
    backend: &dyn ClassifierBackend,
    config: &TrainConfig,
    index: usize,
    split_seed: u64,
    (train_ids, test_ids): (Vec<String>, Vec<String>),
) -> Result<RunRecord> {
    let train_set: HashSet<&str> = train_ids.iter().map(String::as_str).collect();
    if let Some(id) = test_ids.iter().find(|id| train_set.contains(id.as_str())) {
        return Err(Error::Leakage(id.clone()));
    }
    let model_seed = config.seed.wrapping_add(index as u64);
    let train_examples = corpus.select(&train_ids)?;
    let test_examples = corpus.select(&test_ids)?;
    let model = train(backend, &train_examples, config, model_seed)?;
    let preds = predict(model.as_ref(), &test_examples)?;
    let gold: BTreeMap<String, Label> = test_examples.iter().map(|e| (e.id.clone(), e.euph_label)).collect();
    let metrics = evaluate(&preds, &gold)?;
    Ok(RunRecord {
        index,
        split_seed,
        model_seed,
        train_ids,
        predictions: test_ids
            .iter()
            .map(|id| TestPrediction {
                id: id.clone(),
                gold: gold[id],
                pred: preds[id],
            })
            .collect(),
        metrics,
    })
}

/// Holdout plans run `config.n_runs` times, re-sampling with split seed
/// `plan.seed + i`; k-fold plans run once per fold. Model seeds are
/// `config.seed + i`. Any failing run fails the whole experiment.
/// Run index, seed, (train ids, test ids).
type Job = (usize, u64, (Vec<String>, Vec<String>));

pub fn run_experiment(
    corpus: &Corpus,
    plan: &SplitPlan,
    config: &TrainConfig,
    backend: &dyn ClassifierBackend,
) -> Result<RunResults> {
    plan.validate()?;
    config.validate()?;

    let jobs: Vec<Job> = match plan.kind {
        SplitKind::BalancedHoldout => (0..config.n_runs)
            .map(|i| {
                let seed = plan.seed.wrapping_add(i as u64);
                let ds = build_dataset(corpus, &SplitPlan { seed, ..plan.clone() })?;
                let run = ds.split.runs().remove(0);
                Ok((i, seed, run))
            })
            .collect::<Result<_>>()?,
        SplitKind::StratifiedKfold => build_dataset(corpus, plan)?
            .split
            .runs()
            .into_iter()
            .enumerate()
            .map(|(i, run)| (i, plan.seed, run))
            .collect(),
    };

    let exec = |(i, seed, run): &Job| {
        run_once(corpus, backend, config, *i, *seed, run.clone())
    };
    let runs: Vec<RunRecord> = if backend.capabilities().parallel_safe {
        jobs.par_iter().map(exec).collect::<Result<_>>()?
    } else {
        jobs.iter().map(exec).collect::<Result<_>>()?
    };

    let backend_config = backend.resolved_config(config);
    let provenance = Provenance::new(
        &serde_json::json!({ "plan": plan, "train": config, "backend": backend_config }),
        plan.seed,
    );
    Ok(RunResults {
        provenance,
        backend_id: backend.id().to_string(),
        backend_config,
        language: corpus.language_tag.clone(),
        plan: plan.clone(),
        train_config: config.clone(),
        resampled_per_run: plan.kind == SplitKind::BalancedHoldout,
        aggregate: aggregate(runs.iter().map(|r| &r.metrics)),
        misclass_counts: misclass_counts(&runs),
        runs,
    })
}
