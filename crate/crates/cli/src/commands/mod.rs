//! Subcommand implementations. Each command is a sequence of named stages.

mod analyze;
mod corpus;
mod run;
mod sensitivity;
mod split;
mod vagueness;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};

use euphkit::analysis::load_id_list;
use euphkit::corpus::{load_corpus, Format};
use euphkit::embedding::{load_vector_table, VectorTable};
use euphkit::harness::{BackendRegistry, ExternalBackend, ReferenceLinear};
use euphkit::{Corpus, SensitiveLexicon};

use crate::config::{pick, BackendKind};
use crate::{Command, CorpusArg, Ctx, LexiconArgs};

pub fn dispatch(ctx: &mut Ctx, command: Command) -> Result<()> {
    match command {
        Command::Corpus(c) => corpus::run(ctx, c),
        Command::Vagueness(c) => vagueness::run(ctx, c),
        Command::Sensitivity(c) => sensitivity::run(ctx, c),
        Command::Split(c) => split::run(ctx, c),
        Command::Run(c) => run::run(ctx, c),
        Command::Analyze(c) => analyze::run(ctx, c),
    }
}

fn corpus_path(ctx: &Ctx, arg: &CorpusArg) -> Result<PathBuf> {
    pick(arg.corpus.clone(), &ctx.cfg.paths.corpus, "corpus")
}

fn format_for(ctx: &Ctx, path: &Path) -> Format {
    Format::from_path(path, ctx.cfg.csv_columns.clone())
}

/// Loads a corpus, failing on any rejected record.
fn read_corpus(ctx: &Ctx, arg: &CorpusArg) -> Result<Corpus> {
    let path = corpus_path(ctx, arg)?;
    let loaded = load_corpus(&path, &format_for(ctx, &path))?;
    loaded.strict().with_context(|| format!("corpus {}", path.display()))
}

fn read_lexicon(ctx: &Ctx, args: &LexiconArgs) -> Result<SensitiveLexicon> {
    let threshold = args.threshold.unwrap_or(ctx.cfg.lexicon_threshold);
    match args.lexicon.clone().or_else(|| ctx.cfg.paths.lexicon.clone()) {
        Some(p) => Ok(SensitiveLexicon::load(p, threshold)?),
        None => Ok(SensitiveLexicon {
            threshold,
            ..SensitiveLexicon::default()
        }),
    }
}

fn read_vectors(ctx: &Ctx, args: &LexiconArgs) -> Result<Option<VectorTable>> {
    match args.vectors.clone().or_else(|| ctx.cfg.paths.vectors.clone()) {
        Some(p) => Ok(Some(load_vector_table(p)?)),
        None => Ok(None),
    }
}

/// Registers the configured backends; `reference-linear` is always present
/// when a vector table is available.
fn backend_registry(ctx: &Ctx, table: Option<Arc<VectorTable>>, lexicon: &SensitiveLexicon) -> Result<BackendRegistry> {
    let mut reg = BackendRegistry::default();
    if let Some(t) = &table {
        reg.register(Arc::new(ReferenceLinear::new(t.clone(), lexicon.clone())?));
    }
    for spec in &ctx.cfg.backends {
        match spec.kind {
            BackendKind::ReferenceLinear => {
                let t = table
                    .clone()
                    .with_context(|| format!("backend `{}` needs a vector table", spec.id))?;
                let mut b = ReferenceLinear::new(t, lexicon.clone())?.with_id(spec.id.clone());
                if let Some(o) = spec.options {
                    b = b.with_options(o);
                }
                reg.register(Arc::new(b));
            }
            BackendKind::External => {
                let mut b = ExternalBackend::new(spec.id.clone(), spec.command.clone().unwrap_or_default());
                if let Some(l) = &spec.languages {
                    b = b.with_languages(l.clone());
                }
                reg.register(Arc::new(b));
            }
        }
    }
    Ok(reg)
}

/// Reads an id list: a CSV with an `id` column, or one id per line.
fn read_ids(path: &Path) -> Result<BTreeSet<String>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let col = header
            .split(',')
            .position(|h| h.trim() == "id")
            .with_context(|| format!("{}: no `id` column", path.display()))?;
        Ok(lines
            .filter_map(|l| l.split(',').nth(col))
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect())
    } else {
        Ok(load_id_list(path)?)
    }
}
