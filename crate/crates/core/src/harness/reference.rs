//! Deterministic baseline classifier: logistic regression over lexicon-hit
//! counts, the mean word vector of the text, and PET indicators, fitted by
//! full-batch gradient descent.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Capabilities, ClassifierBackend, TrainConfig, TrainedModel};
use crate::corpus::{Example, Label};
use crate::embedding::{embed_word, VectorTable};
use crate::error::{Error, Result};
use crate::sensitivity::{LexiconScorer, SensitiveLexicon};
use crate::splits::{rng, Stage};
use crate::text;

pub const REFERENCE_LINEAR_ID: &str = "reference-linear";

/// Optimizer settings. Any field can be overridden through `TrainConfig::options`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearOptions {
    pub iterations: usize,
    pub step_size: f64,
    pub l2: f64,
    /// Initial weights are drawn uniformly from `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub pet_features: bool,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions {
            iterations: 300,
            step_size: 0.5,
            l2: 1e-3,
            init_scale: 0.01,
            pet_features: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceLinear {
    id: String,
    table: Arc<VectorTable>,
    lexicon: SensitiveLexicon,
    options: LinearOptions,
}

impl ReferenceLinear {
    pub fn new(table: Arc<VectorTable>, lexicon: SensitiveLexicon) -> Result<Self> {
        lexicon.validate()?;
        if table.is_empty() {
            return Err(Error::backend(REFERENCE_LINEAR_ID, "empty vector table"));
        }
        Ok(ReferenceLinear {
            id: REFERENCE_LINEAR_ID.into(),
            table,
            lexicon,
            options: LinearOptions::default(),
        })
    }

    pub fn with_options(mut self, options: LinearOptions) -> Self {
        self.options = options;
        self
    }

    /// Registers a variant (e.g. different default options) under another id.
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    fn options_for(&self, config: &TrainConfig) -> Result<LinearOptions> {
        let mut value = serde_json::to_value(self.options)?;
        let obj = value.as_object_mut().expect("options serialize to an object");
        for (k, v) in &config.options {
            obj.insert(k.clone(), v.clone());
        }
        serde_json::from_value(value).map_err(|e| Error::backend(REFERENCE_LINEAR_ID, format!("bad options: {e}")))
    }

    fn dense_features(&self, scorer: &LexiconScorer<'_>, ex: &Example) -> Result<Vec<f64>> {
        let tokens = text::tokenize(&ex.clean_text());
        let (hits, _) = scorer.hits(&tokens)?;
        let raw: u64 = hits.iter().sum();
        let mut f: Vec<f64> = hits.iter().map(|&h| h as f64).collect();
        f.push(raw as f64);
        f.push(if tokens.is_empty() { 0.0 } else { raw as f64 / tokens.len() as f64 });
        let mut mean = vec![0.0; self.table.dim()];
        let mut n = 0usize;
        for v in tokens.iter().filter_map(|t| embed_word(t, &self.table)) {
            mean.iter_mut().zip(v.as_slice()).for_each(|(m, c)| *m += c);
            n += 1;
        }
        if n > 0 {
            mean.iter_mut().for_each(|m| *m /= n as f64);
        }
        f.extend(mean);
        Ok(f)
    }
}

impl ClassifierBackend for ReferenceLinear {
    fn id(&self) -> &str {
        &self.id
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            fine_tunable: false,
            deterministic: true,
            parallel_safe: true,
            languages: None,
        }
    }

    fn resolved_config(&self, config: &TrainConfig) -> serde_json::Value {
        serde_json::json!({
            "backend": self.id,
            "options": self.options_for(config).ok(),
            "lexicon": self.lexicon,
            "vector_dim": self.table.dim(),
            "vector_entries": self.table.len(),
        })
    }

    fn fit(&self, train: &[&Example], config: &TrainConfig, seed: u64) -> Result<Box<dyn TrainedModel>> {
        let opts = self.options_for(config)?;
        let scorer = LexiconScorer::new(&self.lexicon, &self.table)?;
        let dense = train
            .iter()
            .map(|ex| self.dense_features(&scorer, ex))
            .collect::<Result<Vec<_>>>()?;
        let n_dense = dense.first().map_or(0, Vec::len);

        let n = dense.len() as f64;
        let mut mean = vec![0.0; n_dense];
        for row in &dense {
            mean.iter_mut().zip(row).for_each(|(m, x)| *m += x / n);
        }
        let mut scale = vec![0.0; n_dense];
        for row in &dense {
            scale.iter_mut().zip(row).zip(&mean).for_each(|((s, x), m)| *s += (x - m).powi(2) / n);
        }
        scale.iter_mut().for_each(|s| *s = if *s > 1e-12 { s.sqrt() } else { 1.0 });

        let pets: BTreeMap<String, usize> = if opts.pet_features {
            let mut keys: Vec<String> = train.iter().map(|e| e.pet_key()).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
        } else {
            BTreeMap::new()
        };

        let mut model = LinearModel {
            owner: self.clone(),
            mean,
            scale,
            pets,
            weights: Vec::new(),
        };
        let width = model.width();
        let mut r = rng(seed, Stage::Model);
        model.weights = (0..width)
            .map(|_| r.random_range(-opts.init_scale..=opts.init_scale))
            .collect();

        let xs: Vec<Vec<f64>> = train
            .iter()
            .zip(&dense)
            .map(|(ex, d)| model.assemble(ex, d))
            .collect();
        let ys: Vec<f64> = train.iter().map(|e| e.euph_label.as_u8() as f64).collect();
        let bias = width - 1;
        let mut grad = vec![0.0; width];
        for _ in 0..opts.iterations {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (x, y) in xs.iter().zip(&ys) {
                let err = sigmoid(dot(&model.weights, x)) - y;
                grad.iter_mut().zip(x).for_each(|(g, xi)| *g += err * xi / n);
            }
            for (j, (w, g)) in model.weights.iter_mut().zip(&grad).enumerate() {
                let reg = if j == bias { 0.0 } else { opts.l2 * *w };
                *w -= opts.step_size * (g + reg);
            }
        }
        Ok(Box::new(model))
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct LinearModel {
    owner: ReferenceLinear,
    mean: Vec<f64>,
    scale: Vec<f64>,
    pets: BTreeMap<String, usize>,
    /// Standardized dense features, PET indicators, bias.
    weights: Vec<f64>,
}

impl LinearModel {
    fn width(&self) -> usize {
        self.mean.len() + self.pets.len() + 1
    }

    fn assemble(&self, ex: &Example, dense: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = dense
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        let base = x.len();
        x.resize(base + self.pets.len(), 0.0);
        if let Some(&i) = self.pets.get(&ex.pet_key()) {
            x[base + i] = 1.0;
        }
        x.push(1.0);
        x
    }
}

impl TrainedModel for LinearModel {
    fn predict_batch(&self, examples: &[&Example]) -> Result<Vec<Label>> {
        let scorer = LexiconScorer::new(&self.owner.lexicon, &self.owner.table)?;
        examples
            .iter()
            .map(|ex| {
                let d = self.owner.dense_features(&scorer, ex)?;
                Ok(Label::from_bool(dot(&self.weights, &self.assemble(ex, &d)) >= 0.0))
            })
            .collect()
    }
}
