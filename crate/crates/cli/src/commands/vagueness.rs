use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

use euphkit::embedding::default_registry;
use euphkit::vagueness::{
    emit_review_queue, generalize_labels, load_annotations, load_decisions, merge_review, paraphrase_sets,
    save_pet_labels, score_sets, Generalization, ParaphraseSet,
};
use euphkit::{Corpus, Label, Outcome, VaguenessDecision};

use super::read_corpus;
use crate::config::pick;
use crate::{Ctx, VagueInputs, VaguenessCmd};

pub fn run(ctx: &mut Ctx, cmd: VaguenessCmd) -> Result<()> {
    match cmd {
        VaguenessCmd::Score(inputs) => {
            let (_, sets) = ctx.stage("vagueness.load", |ctx| load_sets(ctx, &inputs))?;
            let decisions = ctx.stage("vagueness.score", |ctx| score(ctx, &inputs, &sets))?;
            ctx.stage("vagueness.write", |ctx| write_decisions(ctx, &decisions))
        }
        VaguenessCmd::Queue { decisions, inputs } => {
            let decisions = ctx.stage("vagueness.load", |_| Ok(load_decisions(&decisions)?))?;
            let (_, sets) = ctx.stage("vagueness.load", |ctx| load_sets(ctx, &inputs))?;
            ctx.stage("vagueness.queue", |ctx| queue(ctx, &decisions, &sets).map(|_| ()))
        }
        VaguenessCmd::Merge { decisions, review } => {
            let mut decisions = ctx.stage("vagueness.load", |_| Ok(load_decisions(&decisions)?))?;
            ctx.stage("vagueness.merge", |ctx| {
                let review = pick(review, &ctx.cfg.paths.review, "review")?;
                let n = merge_review(&mut decisions, &review)?;
                println!("merged {n} review label(s)");
                write_decisions(ctx, &decisions)
            })
        }
        VaguenessCmd::Generalize { decisions, input } => {
            let decisions = ctx.stage("vagueness.load", |_| Ok(load_decisions(&decisions)?))?;
            let corpus = ctx.stage("vagueness.load", |ctx| read_corpus(ctx, &input))?;
            ctx.stage("vagueness.generalize", |ctx| generalize(ctx, &decisions, &corpus))
        }
        VaguenessCmd::Pipeline { inputs, review } => {
            let (corpus, sets) = ctx.stage("vagueness.load", |ctx| load_sets(ctx, &inputs))?;
            let mut decisions = ctx.stage("vagueness.score", |ctx| score(ctx, &inputs, &sets))?;
            let review = review.or_else(|| ctx.cfg.paths.review.clone());
            if let Some(review) = review {
                ctx.stage("vagueness.merge", |_| {
                    let n = merge_review(&mut decisions, &review)?;
                    println!("merged {n} review label(s)");
                    Ok(())
                })?;
            }
            ctx.stage("vagueness.write", |ctx| write_decisions(ctx, &decisions))?;
            let pending = ctx.stage("vagueness.queue", |ctx| queue(ctx, &decisions, &sets))?;
            if pending > 0 {
                ctx.stage("vagueness.queue", |ctx| {
                    bail!(
                        "{pending} example(s) await manual review; label {} and rerun with --review",
                        ctx.out.path("review_queue.csv").display()
                    )
                })?;
            }
            ctx.stage("vagueness.generalize", |ctx| generalize(ctx, &decisions, &corpus))
        }
    }
}

fn load_sets(ctx: &Ctx, inputs: &VagueInputs) -> Result<(Corpus, Vec<ParaphraseSet>)> {
    let corpus = read_corpus(ctx, &inputs.input)?;
    let ann = pick(inputs.annotations.clone(), &ctx.cfg.paths.annotations, "annotations")?;
    let rows = load_annotations(&ann).with_context(|| format!("annotations {}", ann.display()))?;
    let sets = paraphrase_sets(&rows, &corpus)?;
    Ok((corpus, sets))
}

fn score(ctx: &Ctx, inputs: &VagueInputs, sets: &[ParaphraseSet]) -> Result<Vec<VaguenessDecision>> {
    let mut cfg = ctx.cfg.clone();
    if let Some(p) = &inputs.sentence_vectors {
        cfg.paths.sentence_vectors = Some(p.clone());
        cfg.sentence_embedder = None;
    }
    let embedder = default_registry().build(&cfg.sentence_spec()?)?;
    let decisions = score_sets(sets, embedder.as_ref(), &ctx.cfg.vagueness)?;
    let count = |o: Outcome| decisions.iter().filter(|d| d.outcome == o).count();
    println!(
        "{} scored: {} non-vague, {} vague, {} manual review",
        decisions.len(),
        count(Outcome::NonVague),
        count(Outcome::Vague),
        count(Outcome::ManualReview)
    );
    Ok(decisions)
}

fn write_decisions(ctx: &mut Ctx, decisions: &[VaguenessDecision]) -> Result<()> {
    ctx.out.json(ctx.out.path("decisions.json"), &decisions)?;
    Ok(())
}

/// Writes the queue; returns the number of rows still lacking a label.
fn queue(ctx: &mut Ctx, decisions: &[VaguenessDecision], sets: &[ParaphraseSet]) -> Result<usize> {
    let path = ctx.out.path("review_queue.csv");
    let pending: Vec<VaguenessDecision> = decisions.iter().filter(|d| d.label().is_none()).cloned().collect();
    emit_review_queue(&pending, sets, &path)?;
    ctx.out.track(&path)?;
    println!("{} example(s) in review queue", pending.len());
    Ok(pending.len())
}

fn generalize(ctx: &mut Ctx, decisions: &[VaguenessDecision], corpus: &Corpus) -> Result<()> {
    let g = generalize_labels(decisions, corpus)?;
    let cp = ctx.out.path("labeled_corpus.jsonl");
    g.corpus.save_jsonl(&cp)?;
    ctx.out.track(&cp)?;
    let lp = ctx.out.path("pet_labels.csv");
    save_pet_labels(&g.labels, &lp)?;
    ctx.out.track(&lp)?;
    ctx.out.json(
        ctx.out.path("generalization.json"),
        &serde_json::json!({ "uncovered": g.uncovered, "conflicts": g.conflicts }),
    )?;
    if !g.conflicts.is_empty() {
        let requeued = g.requeue(decisions);
        ctx.out.json(ctx.out.path("requeued_decisions.json"), &requeued)?;
    }
    let counts = subgroup_counts(&g);
    print!("{counts}");
    ctx.out.text(ctx.out.report_path("vagueness_counts.md"), &counts)?;
    println!(
        "{} labeled, {} uncovered, {} conflicting pair(s)",
        g.corpus.len() - g.uncovered.len(),
        g.uncovered.len(),
        g.conflicts.len()
    );
    Ok(())
}

/// Euph × vague counts of the labeled corpus.
fn subgroup_counts(g: &Generalization) -> String {
    let mut n = [[0usize; 3]; 2];
    for ex in g.corpus.examples() {
        let col = match ex.vague_label {
            Some(Label::One) => 0,
            Some(Label::Zero) => 1,
            None => 2,
        };
        n[usize::from(ex.euph_label == Label::Zero)][col] += 1;
    }
    let mut s = String::from("|  | Vague | Non-Vague | Unlabeled |\n|---|---|---|---|\n");
    for (name, row) in ["Euphemistic", "Non-Euphemistic"].iter().zip(n) {
        let _ = writeln!(s, "| {name} | {} | {} | {} |", row[0], row[1], row[2]);
    }
    s
}
