use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde::Serialize;

use euphkit::corpus::{load_corpus, CorpusStats, Rejection};
use euphkit::synth::{corpus_from_stats, planted_corpus, PlantedConfig, StatsManifest};

use super::{corpus_path, format_for, read_corpus};
use crate::{CorpusCmd, Ctx};

#[derive(Serialize)]
struct ValidationReport<'a> {
    source: String,
    accepted: usize,
    rejected: &'a [Rejection],
}

pub fn run(ctx: &mut Ctx, cmd: CorpusCmd) -> Result<()> {
    match cmd {
        CorpusCmd::Validate(arg) => ctx.stage("corpus.validate", |ctx| {
            let path = corpus_path(ctx, &arg)?;
            let loaded = load_corpus(&path, &format_for(ctx, &path))?;
            let out = ctx.out.path("corpus.jsonl");
            loaded.corpus.save_jsonl(&out)?;
            ctx.out.track(&out)?;
            let report = ValidationReport {
                source: path.display().to_string(),
                accepted: loaded.corpus.len(),
                rejected: &loaded.rejected,
            };
            ctx.out.json(ctx.out.path("validation.json"), &report)?;
            for r in &loaded.rejected {
                eprintln!("line {}: {}{}", r.line, r.id.as_deref().map(|i| format!("`{i}`: ")).unwrap_or_default(), r.reason);
            }
            println!("{} accepted, {} rejected", loaded.corpus.len(), loaded.rejected.len());
            if !loaded.rejected.is_empty() {
                bail!("{} record(s) rejected", loaded.rejected.len());
            }
            Ok(())
        }),
        CorpusCmd::Stats { input, by_language } => {
            let corpus = ctx.stage("corpus.load", |ctx| read_corpus(ctx, &input))?;
            ctx.stage("corpus.stats", |ctx| {
                let rows: Vec<(String, CorpusStats)> = if by_language {
                    corpus.stats_by_language().into_iter().collect()
                } else {
                    vec![(corpus.language_tag.clone().unwrap_or_else(|| "all".into()), corpus.stats())]
                };
                let table = stats_markdown(&rows);
                print!("{table}");
                ctx.out.text(ctx.out.report_path("stats.md"), &table)?;
                ctx.out.text(ctx.out.report_path("stats.csv"), &stats_csv(&rows))?;
                let json: std::collections::BTreeMap<_, _> = rows.into_iter().collect();
                ctx.out.json(ctx.out.report_path("stats.json"), &serde_json::json!({ "stats": json }))?;
                Ok(())
            })
        }
        CorpusCmd::Synth { manifest, planted, examples } => ctx.stage("corpus.synth", |ctx| {
            if let Some(m) = manifest {
                for row in StatsManifest::load(m)?.rows {
                    for issue in row.inconsistencies() {
                        eprintln!("warning: {}: {issue}", row.language);
                    }
                    let c = corpus_from_stats(&row)?;
                    let p = ctx.out.path(&format!("corpus_{}.jsonl", row.language));
                    c.save_jsonl(&p)?;
                    ctx.out.track(&p)?;
                    println!("{}: {} examples", row.language, c.len());
                }
                Ok(())
            } else if planted {
                let cfg = PlantedConfig {
                    n_examples: examples,
                    seed: ctx.cfg.seed,
                    ..PlantedConfig::default()
                };
                let p = planted_corpus(&cfg)?;
                let cp = ctx.out.path("planted_corpus.jsonl");
                p.corpus.save_jsonl(&cp)?;
                ctx.out.track(&cp)?;
                let vp = ctx.out.path("planted_vectors.tsv");
                p.table.save_tsv(&vp)?;
                ctx.out.track(&vp)?;
                ctx.out.text(ctx.out.path("planted_lexicon.txt"), &(p.lexicon.words.join("\n") + "\n"))?;
                println!("{} examples, {} vectors", p.corpus.len(), p.table.len());
                Ok(())
            } else {
                bail!("give --manifest or --planted")
            }
        }),
    }
}

fn stats_markdown(rows: &[(String, CorpusStats)]) -> String {
    let mut s = String::from(
        "| Language | Total Examples | Euph Examples | Non-Euph Examples | Total PETs | Always-Euph PETs | Ambiguous PETs | Non-Euph-Only PETs |\n|---|---|---|---|---|---|---|---|\n",
    );
    for (l, r) in rows {
        let _ = writeln!(
            s,
            "| {l} | {} | {} | {} | {} | {} | {} | {} |",
            r.total, r.euph, r.non_euph, r.total_pets, r.always_euph_pets, r.ambiguous_pets, r.non_euph_only_pets
        );
    }
    s
}

fn stats_csv(rows: &[(String, CorpusStats)]) -> String {
    let mut s = String::from("language,total,euph,non_euph,total_pets,always_euph_pets,ambiguous_pets,non_euph_only_pets\n");
    for (l, r) in rows {
        let _ = writeln!(
            s,
            "{l},{},{},{},{},{},{},{}",
            r.total, r.euph, r.non_euph, r.total_pets, r.always_euph_pets, r.ambiguous_pets, r.non_euph_only_pets
        );
    }
    s
}
