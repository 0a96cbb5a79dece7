use std::sync::Arc;

use anyhow::{bail, Result};

use euphkit::harness::{replay, run_experiment};
use euphkit::sensitivity::{attach_labels, score_corpus};
use euphkit::splits::SplitKind;
use euphkit::{Corpus, RunResults, SplitPlan};

use super::analyze::{write_errors, write_results_table, write_slices, write_table6};
use super::{backend_registry, read_corpus, read_lexicon, read_vectors};
use crate::{Ctx, RunArgs, RunCmd};

pub fn run(ctx: &mut Ctx, cmd: RunCmd) -> Result<()> {
    match cmd {
        RunCmd::Holdout(args) => {
            let plan = if ctx.cfg.split.kind == SplitKind::BalancedHoldout {
                ctx.cfg.split.clone()
            } else {
                SplitPlan::balanced_holdout(ctx.cfg.seed)
            };
            experiment(ctx, &args, plan, false)
        }
        RunCmd::Kfold { args, k } => {
            let mut plan = if ctx.cfg.split.kind == SplitKind::StratifiedKfold {
                ctx.cfg.split.clone()
            } else {
                SplitPlan::stratified_kfold(ctx.cfg.seed)
            };
            if let Some(k) = k {
                plan.k = k;
            }
            experiment(ctx, &args, plan, true)
        }
        RunCmd::Replay { results } => ctx.stage("run.replay", |_| {
            let loaded = RunResults::load(&results)?;
            let again = replay(&loaded);
            if again != loaded {
                bail!("{}: stored metrics differ from recomputed ones", results.display());
            }
            let a = loaded.aggregate;
            println!(
                "{} run(s): macro-F1 {:.4}, P {:.4}, R {:.4} (replay matches)",
                a.runs, a.macro_f1, a.macro_precision, a.macro_recall
            );
            Ok(())
        }),
    }
}

fn experiment(ctx: &mut Ctx, args: &RunArgs, plan: SplitPlan, per_language: bool) -> Result<()> {
    let (corpus, lexicon, table) = ctx.stage("run.load", |ctx| {
        Ok((read_corpus(ctx, &args.input)?, read_lexicon(ctx, &args.lexicon)?, read_vectors(ctx, &args.lexicon)?.map(Arc::new)))
    })?;
    let backends = ctx.stage("run.backends", |ctx| {
        let reg = backend_registry(ctx, table.clone(), &lexicon)?;
        let ids = if args.backends.is_empty() { vec![ctx.cfg.train.backend_id.clone()] } else { args.backends.clone() };
        ids.iter().map(|id| Ok(reg.get(id)?)).collect::<Result<Vec<_>>>()
    })?;
    let mut config = ctx.cfg.train.clone();
    if let Some(n) = args.runs {
        config.n_runs = n;
    }
    config.validate()?;

    let groups: Vec<(String, Corpus)> = if per_language {
        corpus
            .stats_by_language()
            .into_keys()
            .map(|l| {
                let c = corpus.filter(|e| e.language == l);
                (l, c)
            })
            .collect()
    } else {
        vec![(corpus.language_tag.clone().unwrap_or_else(|| "mixed".into()), corpus.clone())]
    };

    let mut all = Vec::new();
    for (lang, group) in &groups {
        for backend in &backends {
            let stage = format!("run.train[{lang}/{}]", backend.id());
            let r = ctx.stage(&stage, |ctx| {
                let mut config = config.clone();
                config.backend_id = backend.id().to_string();
                let r = run_experiment(group, &plan, &config, backend.as_ref())?;
                ctx.out.json(ctx.out.path(&format!("results_{lang}_{}.json", backend.id())), &r)?;
                let a = r.aggregate;
                println!(
                    "{lang} / {}: {} run(s), macro-F1 {:.4}, P {:.4}, R {:.4}",
                    backend.id(),
                    a.runs,
                    a.macro_f1,
                    a.macro_precision,
                    a.macro_recall
                );
                Ok(r)
            })?;
            all.push((lang.clone(), group, r));
        }
    }

    ctx.stage("run.reports", |ctx| {
        let single = all.len() == 1;
        for (lang, group, r) in &all {
            let suffix = if single { String::new() } else { format!("_{lang}_{}", r.backend_id) };
            if group.examples().iter().all(|e| e.vague_label.is_some()) {
                write_slices(ctx, r, group, euphkit::splits::SubgroupKey::VagueLabel, &suffix)?;
            }
            let errors = write_errors(ctx, r, ctx.cfg.error_threshold, &suffix)?;
            if let (Some(t), true) = (&table, group.examples().iter().all(|e| e.vague_label.is_some())) {
                let scored = attach_labels(&score_corpus(group, &lexicon, t)?, group)?;
                write_table6(ctx, &scored, Some(&errors.ids()), &suffix)?;
            }
        }
        let results: Vec<RunResults> = all.iter().map(|(_, _, r)| r.clone()).collect();
        write_results_table(ctx, &results)
    })
}
