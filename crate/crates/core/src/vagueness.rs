//! Vagueness labels from annotator paraphrases.
//!
//! Each annotated example carries several paraphrases of its PET. Responses
//! are embedded one by one, the mean cosine over all unordered response
//! pairs is thresholded into non-vague / vague / manual review, and the
//! resulting labels are spread to every corpus example that shares the
//! annotated example's (PET, euphemism label) pair.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_pet_span, Corpus, Label};
use crate::embedding::{cosine, SentenceEmbedder, Vector};
use crate::error::{Error, Result};
use crate::text;

/// Separator between paraphrases in the review queue's `paraphrases` column.
pub const PARAPHRASE_SEPARATOR: &str = " | ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseSet {
    pub example_id: String,
    pub pet: String,
    pub euph_label: Label,
    pub text: String,
    pub paraphrases: Vec<String>,
}

impl ParaphraseSet {
    pub fn validate(&self) -> Result<()> {
        if self.paraphrases.len() < 2 || self.paraphrases.iter().any(|p| p.trim().is_empty()) {
            return Err(Error::TooFewParaphrases(self.example_id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VaguenessConfig {
    pub hi_threshold: f64,
    pub lo_threshold: f64,
}

impl Default for VaguenessConfig {
    fn default() -> Self {
        VaguenessConfig {
            hi_threshold: 0.65,
            lo_threshold: 0.50,
        }
    }
}

impl VaguenessConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !(in_unit(self.lo_threshold) && in_unit(self.hi_threshold)) {
            return Err(Error::VaguenessConfig("thresholds must lie in (0, 1)".into()));
        }
        if self.lo_threshold >= self.hi_threshold {
            return Err(Error::VaguenessConfig(format!(
                "lo_threshold {} must be below hi_threshold {}",
                self.lo_threshold, self.hi_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    NonVague,
    Vague,
    ManualReview,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaguenessDecision {
    pub example_id: String,
    pub pet: String,
    pub euph_label: Label,
    pub score: f64,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_label: Option<Label>,
    /// Set when a conflicting (PET, label) pair sent this decision back to
    /// review regardless of its score.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub requeued: bool,
}

impl VaguenessDecision {
    /// The binary vagueness label, if decided.
    pub fn label(&self) -> Option<Label> {
        match self.outcome {
            Outcome::NonVague => Some(Label::Zero),
            Outcome::Vague => Some(Label::One),
            Outcome::ManualReview => self.resolved_label,
        }
    }
}

/// Mean cosine similarity over all unordered pairs of embedded responses.
/// Duplicate responses are kept.
pub fn mean_pairwise_similarity(set: &ParaphraseSet, embedder: &dyn SentenceEmbedder) -> Result<f64> {
    set.validate()?;
    let vectors = set
        .paraphrases
        .iter()
        .map(|p| embedder.embed(p))
        .collect::<Result<Vec<Vector>>>()?;
    mean_pairwise_cosine(&vectors)
}

/// Mean cosine over all `i < j` pairs of `vectors` (at least two).
pub fn mean_pairwise_cosine(vectors: &[Vector]) -> Result<f64> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::TooFewParaphrases(format!("{n} vector(s)")));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += cosine(&vectors[i], &vectors[j])?;
        }
    }
    Ok(sum / (n * (n - 1) / 2) as f64)
}

/// Strict inequalities on both sides: scores equal to a threshold go to review.
pub fn threshold_decision(score: f64, config: &VaguenessConfig) -> Outcome {
    if score > config.hi_threshold {
        Outcome::NonVague
    } else if score < config.lo_threshold {
        Outcome::Vague
    } else {
        Outcome::ManualReview
    }
}

/// Scores and thresholds every set, in input order.
pub fn score_sets(
    sets: &[ParaphraseSet],
    embedder: &dyn SentenceEmbedder,
    config: &VaguenessConfig,
) -> Result<Vec<VaguenessDecision>> {
    config.validate()?;
    let decide = |set: &ParaphraseSet| -> Result<VaguenessDecision> {
        let score = mean_pairwise_similarity(set, embedder)?;
        Ok(VaguenessDecision {
            example_id: set.example_id.clone(),
            pet: set.pet.clone(),
            euph_label: set.euph_label,
            score,
            outcome: threshold_decision(score, config),
            resolved_label: None,
            requeued: false,
        })
    };
    if embedder.allows_concurrent_calls() {
        sets.par_iter().map(decide).collect()
    } else {
        sets.iter().map(decide).collect()
    }
}

/// One row of the annotation CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRow {
    pub example_id: String,
    pub text: String,
    pub paraphrases: Vec<String>,
}

/// Reads `example_id,text,paraphrase_1,…,paraphrase_N`. Empty paraphrase cells are dropped.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
    };
    let id_col = col("example_id")?;
    let text_col = col("text")?;
    let para_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.trim().starts_with("paraphrase"))
        .map(|(i, _)| i)
        .collect();
    if para_cols.is_empty() {
        return Err(parse_err(1, "no `paraphrase_*` columns".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| text::nfc(rec.get(c).unwrap_or("").trim());
        let example_id = get(id_col);
        if example_id.is_empty() {
            return Err(parse_err(i + 2, "empty example_id".into()));
        }
        rows.push(AnnotationRow {
            example_id,
            text: get(text_col),
            paraphrases: para_cols.iter().map(|&c| get(c)).filter(|p| !p.is_empty()).collect(),
        });
    }
    Ok(rows)
}

/// Joins annotation rows with the corpus for PET and euphemism label.
pub fn paraphrase_sets(rows: &[AnnotationRow], corpus: &Corpus) -> Result<Vec<ParaphraseSet>> {
    rows.iter()
        .map(|row| {
            let ex = corpus
                .get(&row.example_id)
                .ok_or_else(|| Error::UnknownId(row.example_id.clone()))?;
            let text = if row.text.is_empty() { ex.text.clone() } else { row.text.clone() };
            let pet = extract_pet_span(&text).map(|s| s.pet).unwrap_or_else(|_| ex.pet.clone());
            let set = ParaphraseSet {
                example_id: row.example_id.clone(),
                pet,
                euph_label: ex.euph_label,
                text,
                paraphrases: row.paraphrases.clone(),
            };
            set.validate()?;
            Ok(set)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ReviewRow {
    example_id: String,
    text: String,
    paraphrases: String,
    score: String,
    label: String,
}

/// Writes every MANUAL_REVIEW decision as a CSV row with an empty `label` column.
pub fn emit_review_queue(
    decisions: &[VaguenessDecision],
    sets: &[ParaphraseSet],
    path: impl AsRef<Path>,
) -> Result<usize> {
    let path = path.as_ref();
    let by_id: HashMap<&str, &ParaphraseSet> = sets.iter().map(|s| (s.example_id.as_str(), s)).collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["example_id", "text", "paraphrases", "score", "label"])?;
    let mut n = 0;
    for d in decisions.iter().filter(|d| d.outcome == Outcome::ManualReview) {
        let (text, paras) = match by_id.get(d.example_id.as_str()) {
            Some(s) => (s.text.clone(), s.paraphrases.join(PARAPHRASE_SEPARATOR)),
            None => (String::new(), String::new()),
        };
        let label = d.resolved_label.map(|l| l.to_string()).unwrap_or_default();
        w.write_record([d.example_id.as_str(), &text, &paras, &format!("{:.6}", d.score), &label])?;
        n += 1;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}

/// Merges human labels from a completed review queue. Rows with an empty
/// label are skipped; any other non-binary value is an error. Returns the
/// number of labels merged.
pub fn merge_review(decisions: &mut [VaguenessDecision], path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let index: HashMap<String, usize> = decisions
        .iter()
        .enumerate()
        .map(|(i, d)| (d.example_id.clone(), i))
        .collect();
    let mut merged = 0;
    for (i, row) in rdr.deserialize::<ReviewRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        if row.label.trim().is_empty() {
            continue;
        }
        let label: Label = row
            .label
            .parse()
            .map_err(|_| Error::Review(format!("line {line}: label `{}` is not 0 or 1", row.label)))?;
        let &idx = index
            .get(&row.example_id)
            .ok_or_else(|| Error::Review(format!("line {line}: unknown example `{}`", row.example_id)))?;
        let d = &mut decisions[idx];
        if d.outcome != Outcome::ManualReview {
            return Err(Error::Review(format!(
                "line {line}: `{}` is not awaiting review",
                row.example_id
            )));
        }
        d.resolved_label = Some(label);
        merged += 1;
    }
    Ok(merged)
}

/// The vagueness label shared by all examples of one (PET, euphemism label) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetSenseLabel {
    pub pet: String,
    pub euph_label: Label,
    pub vague_label: Label,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncoveredReason {
    NoDecision,
    ConflictingDecisions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Uncovered {
    pub example_id: String,
    pub reason: UncoveredReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub pet: String,
    pub euph_label: Label,
    pub example_ids: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Generalization {
    pub labels: Vec<PetSenseLabel>,
    /// Input corpus with `vague_label` set on covered examples and cleared on uncovered ones.
    pub corpus: Corpus,
    pub uncovered: Vec<Uncovered>,
    pub conflicts: Vec<Conflict>,
}

impl Generalization {
    /// Copies of the decisions behind conflicting pairs, reset for another review round.
    pub fn requeue(&self, decisions: &[VaguenessDecision]) -> Vec<VaguenessDecision> {
        let ids: BTreeSet<&str> = self
            .conflicts
            .iter()
            .flat_map(|c| c.example_ids.iter().map(String::as_str))
            .collect();
        decisions
            .iter()
            .filter(|d| ids.contains(d.example_id.as_str()))
            .map(|d| VaguenessDecision {
                outcome: Outcome::ManualReview,
                resolved_label: None,
                requeued: true,
                ..d.clone()
            })
            .collect()
    }
}

/// Spreads each (PET, euphemism label) decision to every corpus example
/// sharing that pair. Pairs whose decisions disagree are not labeled.
pub fn generalize_labels(decisions: &[VaguenessDecision], corpus: &Corpus) -> Result<Generalization> {
    let mut by_pair: BTreeMap<(String, Label), Vec<&VaguenessDecision>> = BTreeMap::new();
    for d in decisions {
        if d.label().is_none() {
            return Err(Error::Unresolved(d.example_id.clone()));
        }
        by_pair.entry((text::pet_key(&d.pet), d.euph_label)).or_default().push(d);
    }

    let mut resolved: HashMap<(String, Label), Label> = HashMap::new();
    let mut conflicts = Vec::new();
    for ((pet, euph), ds) in &by_pair {
        let labels: BTreeSet<Label> = ds.iter().filter_map(|d| d.label()).collect();
        if labels.len() == 1 {
            resolved.insert((pet.clone(), *euph), *labels.iter().next().unwrap());
        } else {
            conflicts.push(Conflict {
                pet: pet.clone(),
                euph_label: *euph,
                example_ids: ds.iter().map(|d| d.example_id.clone()).collect(),
            });
        }
    }
    let conflicted: BTreeSet<(String, Label)> =
        conflicts.iter().map(|c| (c.pet.clone(), c.euph_label)).collect();

    let mut support: BTreeMap<(String, Label), usize> = BTreeMap::new();
    let mut uncovered = Vec::new();
    let mut examples = Vec::with_capacity(corpus.len());
    for ex in corpus.examples() {
        let mut ex = ex.clone();
        let key = (ex.pet_key(), ex.euph_label);
        match resolved.get(&key) {
            Some(&label) => {
                ex.vague_label = Some(label);
                *support.entry(key).or_default() += 1;
            }
            None => {
                ex.vague_label = None;
                uncovered.push(Uncovered {
                    example_id: ex.id.clone(),
                    reason: if conflicted.contains(&key) {
                        UncoveredReason::ConflictingDecisions
                    } else {
                        UncoveredReason::NoDecision
                    },
                });
            }
        }
        examples.push(ex);
    }

    let labels = resolved
        .iter()
        .map(|((pet, euph), &vague)| PetSenseLabel {
            pet: pet.clone(),
            euph_label: *euph,
            vague_label: vague,
            support: support.get(&(pet.clone(), *euph)).copied().unwrap_or(0),
        })
        .collect::<BTreeSet<_>>();

    Ok(Generalization {
        labels: labels.into_iter().collect(),
        corpus: Corpus::new(examples)?,
        uncovered,
        conflicts,
    })
}

impl PartialOrd for PetSenseLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PetSenseLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.pet, self.euph_label, self.vague_label, self.support).cmp(&(
            &other.pet,
            other.euph_label,
            other.vague_label,
            other.support,
        ))
    }
}

pub fn save_pet_labels(labels: &[PetSenseLabel], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["pet", "euph_label", "vague_label", "support"])?;
    for l in labels {
        w.write_record([
            l.pet.clone(),
            l.euph_label.to_string(),
            l.vague_label.to_string(),
            l.support.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn save_decisions(decisions: &[VaguenessDecision], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(file, decisions)?;
    Ok(())
}

pub fn load_decisions(path: impl AsRef<Path>) -> Result<Vec<VaguenessDecision>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}
