use anyhow::Result;

use euphkit::splits::{build_dataset, cap_per_pet, SplitKind};
use euphkit::{Dataset, SplitPlan};

use super::read_corpus;
use crate::{Ctx, SplitCmd};

pub fn run(ctx: &mut Ctx, cmd: SplitCmd) -> Result<()> {
    match cmd {
        SplitCmd::Balanced(input) => {
            let corpus = ctx.stage("split.load", |ctx| read_corpus(ctx, &input))?;
            let plan = SplitPlan {
                kind: SplitKind::BalancedHoldout,
                ..ctx.cfg.split.clone()
            };
            ctx.stage("split.balanced", |ctx| {
                let ds = build_dataset(&corpus, &plan)?;
                write(ctx, &ds)
            })
        }
        SplitCmd::Kfold { input, k } => {
            let corpus = ctx.stage("split.load", |ctx| read_corpus(ctx, &input))?;
            let base = SplitPlan::stratified_kfold(ctx.cfg.seed);
            let mut plan = if ctx.cfg.split.kind == SplitKind::StratifiedKfold { ctx.cfg.split.clone() } else { base };
            if let Some(k) = k {
                plan.k = k;
            }
            ctx.stage("split.kfold", |ctx| {
                let ds = build_dataset(&corpus, &plan)?;
                write(ctx, &ds)
            })
        }
        SplitCmd::Cap { input, cap } => {
            let corpus = ctx.stage("split.load", |ctx| read_corpus(ctx, &input))?;
            ctx.stage("split.cap", |ctx| {
                let capped = cap_per_pet(&corpus, cap, ctx.cfg.seed);
                let p = ctx.out.path("capped_corpus.jsonl");
                capped.save_jsonl(&p)?;
                ctx.out.track(&p)?;
                println!("{} of {} examples kept", capped.len(), corpus.len());
                Ok(())
            })
        }
    }
}

fn write(ctx: &mut Ctx, ds: &Dataset) -> Result<()> {
    ds.check_disjoint()?;
    for c in &ds.subgroup_report {
        println!("{}: available {}, per split {:?}", c.subgroup, c.available, c.per_split);
    }
    for w in &ds.pet_report.warnings {
        eprintln!("warning: {w}");
    }
    ctx.out.json(ctx.out.path("dataset.json"), ds)?;
    Ok(())
}
