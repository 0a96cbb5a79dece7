//! End-to-end runs over the bundled fixtures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use euphkit::corpus::{extract_pet_span, load_corpus, Format};
use euphkit::embedding::{load_vector_table, FileEmbedder};
use euphkit::harness::{replay, run_experiment, ReferenceLinear};
use euphkit::sensitivity::{score_corpus, SensitiveLexicon, DEFAULT_SENSITIVE_WORDS, DEFAULT_THRESHOLD};
use euphkit::splits::{build_dataset, Split};
use euphkit::synth::{planted_corpus, PlantedConfig};
use euphkit::vagueness::{emit_review_queue, generalize_labels, load_annotations, paraphrase_sets, score_sets};
use euphkit::{Label, Outcome, SplitPlan, TrainConfig, VaguenessConfig};

fn fixture(p: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(p)
}

#[test]
fn between_jobs_rows_load_and_validate() {
    let corpus = load_corpus(fixture("between_jobs.jsonl"), &Format::Jsonl).unwrap().strict().unwrap();
    let s = corpus.stats();
    assert_eq!((s.total, s.euph, s.non_euph, s.total_pets, s.ambiguous_pets), (4, 2, 2, 1, 1));
    for ex in corpus.examples() {
        let span = extract_pet_span(&ex.text).unwrap();
        assert_eq!(span.pet, "between jobs");
        assert_eq!(span.to_marked(), ex.text);
    }
}

#[test]
fn bundled_lexicon_matches_default() {
    let lex = SensitiveLexicon::load(fixture("sensitive_words.txt"), DEFAULT_THRESHOLD).unwrap();
    assert_eq!(lex.words, DEFAULT_SENSITIVE_WORDS.map(String::from).to_vec());
}

#[test]
fn toy_vagueness_pipeline_covers_every_example() {
    let corpus = load_corpus(fixture("toy/corpus.jsonl"), &Format::Jsonl).unwrap().strict().unwrap();
    let rows = load_annotations(fixture("toy/annotations.csv")).unwrap();
    assert_eq!(rows.len(), 12);
    let sets = paraphrase_sets(&rows, &corpus).unwrap();
    let table = Arc::new(load_vector_table(fixture("toy/vectors.tsv")).unwrap());
    let decisions = score_sets(&sets, &FileEmbedder::new(table), &VaguenessConfig::default()).unwrap();
    assert!(decisions.iter().all(|d| d.outcome != Outcome::ManualReview));

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(emit_review_queue(&decisions, &sets, dir.path().join("q.csv")).unwrap(), 0);

    let g = generalize_labels(&decisions, &corpus).unwrap();
    assert!(g.uncovered.is_empty() && g.conflicts.is_empty());
    assert_eq!(g.labels.len(), 12);
    assert!(g.labels.iter().all(|l| l.support == 2));

    let mut expected = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(fixture("toy/expected_labels.csv")).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let euph: Label = rec[1].parse().unwrap();
        let vague: Label = rec[2].parse().unwrap();
        expected.insert((rec[0].to_string(), euph), vague);
    }
    for l in &g.labels {
        assert_eq!(expected[&(l.pet.clone(), l.euph_label)], l.vague_label, "{}", l.pet);
    }
    let again = generalize_labels(&score_sets(&sets, &FileEmbedder::new(Arc::new(load_vector_table(fixture("toy/vectors.tsv")).unwrap())), &VaguenessConfig::default()).unwrap(), &corpus).unwrap();
    assert_eq!(again.corpus, g.corpus);
}

#[test]
fn kfold_experiment_runs_once_per_fold_and_replays() {
    let planted = planted_corpus(&PlantedConfig { n_examples: 300, ..PlantedConfig::default() }).unwrap();
    let backend = ReferenceLinear::new(Arc::new(planted.table.clone()), planted.lexicon.clone()).unwrap();
    let plan = SplitPlan { per_pet_cap: None, ..SplitPlan::stratified_kfold(3) };
    let r = run_experiment(&planted.corpus, &plan, &TrainConfig::default(), &backend).unwrap();
    assert_eq!(r.runs.len(), 5);
    let Split::Folds { folds } = build_dataset(&planted.corpus, &plan).unwrap().split else {
        panic!("expected folds")
    };
    assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 300);
    assert!(r.misclass_counts.values().all(|c| c.in_test == 1));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    r.save(&path).unwrap();
    let loaded = euphkit::RunResults::load(&path).unwrap();
    assert_eq!(replay(&loaded), loaded);
}

#[test]
fn sensitivity_on_planted_corpus_separates_labels() {
    let planted = planted_corpus(&PlantedConfig { n_examples: 400, ..PlantedConfig::default() }).unwrap();
    let scores = score_corpus(&planted.corpus, &planted.lexicon, &planted.table).unwrap();
    let mean = |label: Label| {
        let xs: Vec<f64> = planted
            .corpus
            .examples()
            .iter()
            .zip(&scores)
            .filter(|(e, _)| e.euph_label == label)
            .map(|(_, s)| s.raw_score as f64)
            .collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    assert!(mean(Label::One) > 5.0 * mean(Label::Zero));
}
