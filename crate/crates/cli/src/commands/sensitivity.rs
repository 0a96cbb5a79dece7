use anyhow::{Context, Result};

use euphkit::analysis::error_sensitivity_report;
use euphkit::sensitivity::{attach_labels, load_results, save_results, score_corpus, subgroup_means, LexiconScorer};

use super::{read_corpus, read_ids, read_lexicon, read_vectors};
use crate::config::pick;
use crate::{Ctx, SensitivityCmd, TableArgs};

pub fn run(ctx: &mut Ctx, cmd: SensitivityCmd) -> Result<()> {
    match cmd {
        SensitivityCmd::Score { input, lexicon } => {
            let (corpus, lex, table) = ctx.stage("sensitivity.load", |ctx| {
                let corpus = read_corpus(ctx, &input)?;
                let lex = read_lexicon(ctx, &lexicon)?;
                let table = read_vectors(ctx, &lexicon)?.context("no vector table (--vectors or paths.vectors)")?;
                Ok((corpus, lex, table))
            })?;
            ctx.stage("sensitivity.score", |ctx| {
                let missing = LexiconScorer::new(&lex, &table)?.missing_lexicon_words().to_vec();
                if !missing.is_empty() {
                    eprintln!("warning: lexicon words without vectors: {}", missing.join(", "));
                }
                let results = score_corpus(&corpus, &lex, &table)?;
                let path = ctx.out.path("sensitivity.csv");
                save_results(&results, &path)?;
                ctx.out.track(&path)?;
                println!("{} example(s) scored", results.len());
                Ok(())
            })
        }
        SensitivityCmd::Table(args) => table(ctx, &args),
    }
}

/// Full rows always; Err rows when an error id list is given.
pub fn table(ctx: &mut Ctx, args: &TableArgs) -> Result<()> {
    let (scored, errors) = ctx.stage("sensitivity.load", |ctx| {
        let corpus = read_corpus(ctx, &args.input)?;
        let scores = pick(args.scores.clone(), &ctx.cfg.paths.scores, "scores")?;
        let scored = attach_labels(&load_results(&scores)?, &corpus)?;
        let errors = match args.errors.clone().or_else(|| ctx.cfg.paths.errors.clone()) {
            Some(p) => Some(read_ids(&p)?),
            None => None,
        };
        Ok((scored, errors))
    })?;
    ctx.stage("sensitivity.table", |ctx| {
        let t = match &errors {
            Some(ids) => error_sensitivity_report(&scored, ids)?,
            None => subgroup_means(&scored, None),
        };
        let md = t.to_markdown();
        print!("{md}");
        ctx.out.text(ctx.out.report_path("table6.csv"), &t.to_csv())?;
        ctx.out.text(ctx.out.report_path("table6.md"), &md)?;
        Ok(())
    })
}
