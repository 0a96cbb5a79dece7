//! `euphkit` command-line entry point.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::PipelineConfig;
use euphkit::provenance::Provenance;
use output::Output;

#[derive(Parser, Debug)]
#[command(name = "euphkit", version, about = "Euphemism disambiguation and vagueness experiment pipeline")]
struct Cli {
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate, summarize or synthesize corpora.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Derive vagueness labels from annotator paraphrases.
    #[command(subcommand)]
    Vagueness(VaguenessCmd),
    /// Sensitive-word scoring and subgroup tables.
    #[command(subcommand)]
    Sensitivity(SensitivityCmd),
    /// Build split manifests.
    #[command(subcommand)]
    Split(SplitCmd),
    /// Run classification experiments.
    #[command(subcommand)]
    Run(RunCmd),
    /// Analyze persisted results.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CorpusArg {
    /// Corpus file (.jsonl, or .csv with `csv_columns` from the config).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum CorpusCmd {
    /// Load and validate; writes the accepted records as canonical JSONL.
    Validate(CorpusArg),
    /// Per-corpus or per-language statistics.
    Stats {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long)]
        by_language: bool,
    },
    /// Generate synthetic corpora.
    Synth {
        /// Statistics manifest; one corpus per row.
        #[arg(long, conflicts_with = "planted")]
        manifest: Option<PathBuf>,
        /// Planted-signal corpus with its vector table.
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value_t = 2000)]
        examples: usize,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct VagueInputs {
    #[command(flatten)]
    pub input: CorpusArg,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Vector table for the file-backed sentence embedder.
    #[arg(long)]
    pub sentence_vectors: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum VaguenessCmd {
    /// Score paraphrase sets and apply thresholds; writes decisions.json.
    Score(VagueInputs),
    /// Write the manual-review queue for undecided examples.
    Queue {
        #[arg(long)]
        decisions: PathBuf,
        #[command(flatten)]
        inputs: VagueInputs,
    },
    /// Merge a completed review queue into decisions.
    Merge {
        #[arg(long)]
        decisions: PathBuf,
        #[arg(long)]
        review: Option<PathBuf>,
    },
    /// Spread decisions to every example of each (PET, label) pair.
    Generalize {
        #[arg(long)]
        decisions: PathBuf,
        #[command(flatten)]
        input: CorpusArg,
    },
    /// score -> queue -> merge -> generalize.
    Pipeline {
        #[command(flatten)]
        inputs: VagueInputs,
        #[arg(long)]
        review: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct LexiconArgs {
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// One word per line; defaults to the built-in 22-word list.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TableArgs {
    /// Labeled corpus.
    #[command(flatten)]
    pub input: CorpusArg,
    /// Scores CSV from `sensitivity score`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Frequent-error ids (one per line) or errors CSV.
    #[arg(long)]
    pub errors: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SensitivityCmd {
    /// Score every example; writes sensitivity.csv.
    Score {
        #[command(flatten)]
        input: CorpusArg,
        #[command(flatten)]
        lexicon: LexiconArgs,
    },
    /// Subgroup mean scores (Full rows, plus Err rows with --errors).
    Table(TableArgs),
}

#[derive(Subcommand, Debug)]
pub enum SplitCmd {
    /// Balanced subgroup sample with a train/test holdout.
    Balanced(CorpusArg),
    /// Stratified k-fold (with the configured per-PET cap).
    Kfold {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Cap examples per (PET, label) pair.
    Cap {
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long)]
        cap: usize,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: CorpusArg,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Backend ids to run (repeatable); defaults to the configured one.
    #[arg(long = "backend")]
    pub backends: Vec<String>,
    #[arg(long)]
    pub runs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum RunCmd {
    /// Repeated balanced holdout runs.
    Holdout(RunArgs),
    /// Stratified k-fold, per language.
    Kfold {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Recompute metrics of a results file and check they match.
    Replay {
        #[arg(long)]
        results: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCmd {
    /// Metrics per vagueness (or euphemism) slice.
    Slices {
        #[arg(long)]
        results: PathBuf,
        #[command(flatten)]
        input: CorpusArg,
        #[arg(long, default_value = "vague_label")]
        key: String,
    },
    /// Examples misclassified in at least `threshold` runs.
    Errors {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        threshold: Option<usize>,
    },
    /// Full-corpus vs frequent-error sensitivity table.
    SensitivityTable(TableArgs),
    /// Language x backend table of macro F1/P/R.
    ResultsTable {
        #[arg(long, num_args = 1..)]
        results: Vec<PathBuf>,
    },
}

/// Execution context: configuration, output sink and current stage.
pub struct Ctx {
    pub cfg: PipelineConfig,
    pub out: Output,
    pub stage: String,
}

impl Ctx {
    /// Runs one named stage; errors carry the stage name.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Ctx) -> Result<T>) -> Result<T> {
        self.stage = name.to_string();
        f(self).with_context(|| format!("stage `{name}` failed"))
    }
}

/// Joins the error chain, skipping causes already spelled out by the
/// message above them.
pub fn describe(e: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if text.contains(&msg) {
            continue;
        }
        if !text.is_empty() {
            text.push_str(": ");
        }
        text.push_str(&msg);
    }
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli
        .config
        .as_deref()
        .map(PipelineConfig::load)
        .unwrap_or_else(|| Ok(PipelineConfig::default()))
        .and_then(|c| c.finish(cli.seed, cli.out.clone()))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: stage `config` failed: {}", describe(&e));
            return ExitCode::from(2);
        }
    };
    let provenance = Provenance::new(&cfg, cfg.seed);
    let out = match Output::new(cfg.out.clone(), provenance, cfg.report_prefix.clone()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: stage `output` failed: {}", describe(&e));
            return ExitCode::from(2);
        }
    };
    let mut ctx = Ctx {
        cfg,
        out,
        stage: "start".into(),
    };
    ctx.out.clear_partial();
    match commands::dispatch(&mut ctx, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if let Err(m) = ctx.out.mark_partial(&ctx.stage, &e) {
                eprintln!("error: could not write partial marker: {m:#}");
            }
            ExitCode::FAILURE
        }
    }
}
