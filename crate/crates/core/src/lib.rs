//! Toolkit for euphemism disambiguation experiments.
//!
//! The crate covers the whole experimental pipeline:
//!
//! - [`corpus`]: PET corpora with angle-bracket markers, loading, validation and statistics.
//! - [`embedding`]: vectors, cosine similarity, word-vector tables and sentence-embedder backends.
//! - [`vagueness`]: vagueness labels derived from annotator paraphrase similarity.
//! - [`sensitivity`]: sensitive-word lexicon scoring.
//! - [`splits`]: balanced subgroup sampling, holdout and stratified k-fold splits.
//! - [`harness`]: classifier backends, multi-run experiments and macro metrics.
//! - [`analysis`]: slice metrics, frequent-error sets and report tables.
//!
//! [`synth`] builds synthetic corpora used by tests, benches and the CLI smoke runs.

pub mod analysis;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod provenance;
pub mod sensitivity;
pub mod splits;
pub mod synth;
pub mod text;
pub mod vagueness;

pub use corpus::{Corpus, CorpusStats, Example, Label, PetSpan};
pub use embedding::{cosine, Vector, VectorTable};
pub use error::{Error, Result};
pub use harness::{Metrics, RunResults, TrainConfig};
pub use sensitivity::{SensitiveLexicon, SensitivityResult};
pub use splits::{Dataset, SplitPlan};
pub use vagueness::{Outcome, VaguenessConfig, VaguenessDecision};
