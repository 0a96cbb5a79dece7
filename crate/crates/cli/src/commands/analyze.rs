use std::collections::BTreeSet;

use anyhow::Result;

use euphkit::analysis::{frequent_errors, render_results_table, slice_metrics, ErrorSet};
use euphkit::sensitivity::{subgroup_means, ScoredExample};
use euphkit::splits::SubgroupKey;
use euphkit::{Corpus, RunResults};

use super::read_corpus;
use crate::{AnalyzeCmd, Ctx};

pub fn run(ctx: &mut Ctx, cmd: AnalyzeCmd) -> Result<()> {
    match cmd {
        AnalyzeCmd::Slices { results, input, key } => {
            let (r, corpus, key) = ctx.stage("analyze.load", |ctx| {
                let key: SubgroupKey = key.parse()?;
                Ok((RunResults::load(&results)?, read_corpus(ctx, &input)?, key))
            })?;
            ctx.stage("analyze.slices", |ctx| write_slices(ctx, &r, &corpus, key, ""))
        }
        AnalyzeCmd::Errors { results, threshold } => {
            let r = ctx.stage("analyze.load", |_| Ok(RunResults::load(&results)?))?;
            ctx.stage("analyze.errors", |ctx| {
                let t = threshold.unwrap_or(ctx.cfg.error_threshold);
                write_errors(ctx, &r, t, "").map(|_| ())
            })
        }
        AnalyzeCmd::SensitivityTable(args) => super::sensitivity::table(ctx, &args),
        AnalyzeCmd::ResultsTable { results } => {
            let paths = if results.is_empty() { ctx.cfg.paths.results.clone() } else { results };
            let loaded = ctx.stage("analyze.load", |_| {
                if paths.is_empty() {
                    anyhow::bail!("no results files given");
                }
                paths.iter().map(|p| Ok(RunResults::load(p)?)).collect::<Result<Vec<_>>>()
            })?;
            ctx.stage("analyze.results-table", |ctx| write_results_table(ctx, &loaded))
        }
    }
}

pub fn write_slices(ctx: &mut Ctx, r: &RunResults, corpus: &Corpus, key: SubgroupKey, suffix: &str) -> Result<()> {
    let report = slice_metrics(r, corpus, key)?;
    let md = report.to_markdown();
    print!("{md}");
    ctx.out.text(ctx.out.report_path(&format!("table4{suffix}.csv")), &report.to_csv())?;
    ctx.out.text(ctx.out.report_path(&format!("table4{suffix}.md")), &md)?;
    ctx.out.json(ctx.out.path(&format!("slices{suffix}.json")), &report)?;
    Ok(())
}

pub fn write_errors(ctx: &mut Ctx, r: &RunResults, threshold: usize, suffix: &str) -> Result<ErrorSet> {
    let errors = frequent_errors(r, threshold);
    ctx.out.text(ctx.out.path(&format!("errors{suffix}.csv")), &errors.to_csv())?;
    let ids: Vec<String> = errors.ids().into_iter().collect();
    let body = if ids.is_empty() { String::new() } else { ids.join("\n") + "\n" };
    ctx.out.text(ctx.out.path(&format!("error_ids{suffix}.txt")), &body)?;
    println!("{} example(s) misclassified in >= {threshold} run(s)", errors.entries.len());
    Ok(errors)
}

pub fn write_table6(ctx: &mut Ctx, scored: &[ScoredExample], errors: Option<&BTreeSet<String>>, suffix: &str) -> Result<()> {
    let t = match errors {
        Some(ids) => euphkit::analysis::error_sensitivity_report(scored, ids)?,
        None => subgroup_means(scored, None),
    };
    ctx.out.text(ctx.out.report_path(&format!("table6{suffix}.csv")), &t.to_csv())?;
    ctx.out.text(ctx.out.report_path(&format!("table6{suffix}.md")), &t.to_markdown())?;
    Ok(())
}

pub fn write_results_table(ctx: &mut Ctx, results: &[RunResults]) -> Result<()> {
    let t = render_results_table(results);
    let md = t.to_markdown();
    print!("{md}");
    ctx.out.text(ctx.out.report_path("table7.csv"), &t.to_csv())?;
    ctx.out.text(ctx.out.report_path("table7.md"), &md)?;
    Ok(())
}
