//! Post-hoc analysis of experiment results: per-slice metrics, frequently
//! misclassified examples, and the report tables (slice metrics, subgroup
//! sensitivity scores, per-language results).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::harness::{Aggregate, Confusion, Metrics, RunRecord, RunResults};
use crate::sensitivity::{subgroup_means, ScoredExample, SubgroupScoreTable};
use crate::splits::SubgroupKey;

/// Confusion matrix of one run restricted to each value of `key`.
pub fn slice_confusions(run: &RunRecord, corpus: &Corpus, key: SubgroupKey) -> Result<BTreeMap<Label, Confusion>> {
    let mut out: BTreeMap<Label, Confusion> = BTreeMap::new();
    for p in &run.predictions {
        let ex = corpus.get(&p.id).ok_or_else(|| Error::UnknownId(p.id.clone()))?;
        let value = key.get(ex).ok_or_else(|| Error::MissingLabel {
            id: ex.id.clone(),
            key: key.name().into(),
        })?;
        out.entry(value).or_default().record(p.gold, p.pred);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub value: Label,
    /// Runs in which the slice had at least one test example.
    pub runs: usize,
    pub mean: Aggregate,
    pub per_run: Vec<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub slice_key: SubgroupKey,
    pub slices: Vec<SliceRow>,
}

/// Per run, metrics on each slice of the test set; then the mean over runs.
pub fn slice_metrics(results: &RunResults, corpus: &Corpus, key: SubgroupKey) -> Result<SliceReport> {
    let mut per_slice: BTreeMap<Label, Vec<Metrics>> = BTreeMap::new();
    for run in &results.runs {
        for (value, c) in slice_confusions(run, corpus, key)? {
            per_slice.entry(value).or_default().push(Metrics::from_confusion(c));
        }
    }
    // label 1 (vague / euphemistic) first
    let slices = [Label::One, Label::Zero]
        .into_iter()
        .filter_map(|value| {
            per_slice.remove(&value).map(|per_run| SliceRow {
                value,
                runs: per_run.len(),
                mean: crate::harness::aggregate(&per_run),
                per_run,
            })
        })
        .collect();
    Ok(SliceReport { slice_key: key, slices })
}

fn slice_name(key: SubgroupKey, value: Label) -> &'static str {
    match (key, value) {
        (SubgroupKey::VagueLabel, Label::One) => "Vague",
        (SubgroupKey::VagueLabel, Label::Zero) => "Non-vague",
        (SubgroupKey::EuphLabel, Label::One) => "Euphemistic",
        (SubgroupKey::EuphLabel, Label::Zero) => "Non-euphemistic",
    }
}

impl SliceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slice,f1,p,r,runs\n");
        for s in &self.slices {
            let _ = writeln!(
                out,
                "{},{:.4},{:.4},{:.4},{}",
                slice_name(self.slice_key, s.value),
                s.mean.macro_f1,
                s.mean.macro_precision,
                s.mean.macro_recall,
                s.runs
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("|  | F1 | P | R |\n|---|---|---|---|\n");
        for s in &self.slices {
            let _ = writeln!(
                out,
                "| {} | {:.3} | {:.3} | {:.3} |",
                slice_name(self.slice_key, s.value),
                s.mean.macro_f1,
                s.mean.macro_precision,
                s.mean.macro_recall
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub id: String,
    pub misclassified: usize,
    pub in_test: usize,
    /// `misclassified / in_test`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSet {
    pub threshold: usize,
    pub entries: Vec<ErrorEntry>,
}

pub const DEFAULT_ERROR_THRESHOLD: usize = 10;

impl ErrorSet {
    pub fn ids(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,misclassified,in_test,rate\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{:.4}", e.id, e.misclassified, e.in_test, e.rate);
        }
        out
    }
}

/// Examples misclassified in at least `threshold` runs (inclusive).
pub fn frequent_errors(results: &RunResults, threshold: usize) -> ErrorSet {
    let entries = results
        .misclass_counts
        .iter()
        .filter(|(_, c)| c.in_test > 0 && c.misclassified >= threshold)
        .map(|(id, c)| ErrorEntry {
            id: id.clone(),
            misclassified: c.misclassified,
            in_test: c.in_test,
            rate: c.misclassified as f64 / c.in_test as f64,
        })
        .collect();
    ErrorSet { threshold, entries }
}

/// Reads one id per line; blank lines and `#` comments are skipped.
pub fn load_id_list(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ids = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let id = line.split('#').next().unwrap_or("").trim();
        if !id.is_empty() {
            ids.insert(id.to_string());
        }
    }
    Ok(ids)
}

/// Full-corpus vs frequent-error subgroup table. Every error id must be scored.
pub fn error_sensitivity_report(full: &[ScoredExample], error_ids: &BTreeSet<String>) -> Result<SubgroupScoreTable> {
    let scored: BTreeSet<&str> = full.iter().map(|s| s.result.example_id.as_str()).collect();
    let missing: Vec<&String> = error_ids.iter().filter(|id| !scored.contains(id.as_str())).collect();
    if let Some(first) = missing.first() {
        return Err(Error::Unscored(missing.len(), (*first).clone()));
    }
    Ok(subgroup_means(full, Some(error_ids)))
}

/// Language × backend grid of macro F1/P/R.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub languages: Vec<String>,
    pub backends: Vec<String>,
    pub cells: BTreeMap<String, BTreeMap<String, Aggregate>>,
}

pub const MIXED_LANGUAGE: &str = "mixed";

impl ResultsTable {
    pub fn insert(&mut self, language: &str, backend: &str, aggregate: Aggregate) {
        if !self.languages.iter().any(|l| l == language) {
            self.languages.push(language.to_string());
        }
        if !self.backends.iter().any(|b| b == backend) {
            self.backends.push(backend.to_string());
        }
        self.cells
            .entry(language.to_string())
            .or_default()
            .insert(backend.to_string(), aggregate);
    }

    pub fn get(&self, language: &str, backend: &str) -> Option<&Aggregate> {
        self.cells.get(language).and_then(|row| row.get(backend))
    }

    pub fn missing(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for l in &self.languages {
            for b in &self.backends {
                if self.get(l, b).is_none() {
                    out.push((l.clone(), b.clone()));
                }
            }
        }
        out
    }

    fn cell_values(&self, language: &str, backend: &str, decimals: usize) -> [String; 3] {
        match self.get(language, backend) {
            Some(a) => [a.macro_f1, a.macro_precision, a.macro_recall].map(|x| format!("{x:.decimals$}")),
            None => [String::new(), String::new(), String::new()],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("language");
        for b in &self.backends {
            let _ = write!(out, ",{b} f1,{b} p,{b} r");
        }
        out.push('\n');
        for l in &self.languages {
            out.push_str(l);
            for b in &self.backends {
                let _ = write!(out, ",{}", self.cell_values(l, b, 4).join(","));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Language |");
        for b in &self.backends {
            let _ = write!(out, " {b} F1 | {b} P | {b} R |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(3 * self.backends.len()));
        out.push('\n');
        for l in &self.languages {
            let _ = write!(out, "| {l} |");
            for b in &self.backends {
                for v in self.cell_values(l, b, 3) {
                    let _ = write!(out, " {v} |");
                }
            }
            out.push('\n');
        }
        let missing = self.missing();
        if !missing.is_empty() {
            let list: Vec<String> = missing.iter().map(|(l, b)| format!("{l} × {b}")).collect();
            let _ = writeln!(out, "\nMissing cells: {}.", list.join(", "));
        }
        out
    }
}

/// Builds the language × backend table from per-cell results, in input order.
pub fn render_results_table<'a>(results: impl IntoIterator<Item = &'a RunResults>) -> ResultsTable {
    let mut table = ResultsTable::default();
    for r in results {
        let lang = r.language.as_deref().unwrap_or(MIXED_LANGUAGE);
        table.insert(lang, &r.backend_id, r.aggregate);
    }
    table
}
