//! Property tests for cross-module invariants.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use proptest::prelude::*;
use rayon::prelude::*;

use euphkit::analysis::frequent_errors;
use euphkit::corpus::{extract_pet_span, load_corpus, Format};
use euphkit::embedding::{FileEmbedder, SentenceEmbedder};
use euphkit::harness::{misclass_counts, run_experiment, ReferenceLinear, RunRecord, TestPrediction};
use euphkit::splits::{balanced_sample, cap_per_pet, stratified_kfold, subgroup_partition, train_test_split, Split, SubgroupKey};
use euphkit::synth::{planted_corpus, PlantedConfig};
use euphkit::vagueness::{generalize_labels, mean_pairwise_similarity, threshold_decision, ParaphraseSet, VaguenessDecision};
use euphkit::{Corpus, Example, Label, Metrics, Outcome, SplitPlan, TrainConfig, VaguenessConfig, Vector, VectorTable};

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["ọmọ", "Casa", "dead", "方便", "élan", "jobs", "x", "señor", "Ẹ̀kọ́"]).prop_map(String::from)
}

fn example(i: usize) -> impl Strategy<Value = Example> {
    (
        prop::collection::vec(word(), 0..5),
        prop::collection::vec(word(), 1..3),
        prop::collection::vec(word(), 0..5),
        any::<bool>(),
        prop::option::of(any::<bool>()),
        prop::sample::select(vec!["en", "yo", "zh"]),
    )
        .prop_map(move |(pre, pet, post, e, v, lang)| {
            let pet = pet.join(" ");
            let mut parts = pre;
            parts.push(format!("<{pet}>"));
            parts.extend(post);
            Example {
                id: format!("id{i}"),
                language: lang.into(),
                text: parts.join(" "),
                pet,
                euph_label: Label::from_bool(e),
                vague_label: v.map(Label::from_bool),
                source: "prop".into(),
                country: None,
            }
        })
}

fn corpus(max: usize) -> impl Strategy<Value = Vec<Example>> {
    (1..max).prop_flat_map(|n| (0..n).map(example).collect::<Vec<_>>())
}

fn labelled(sizes: [usize; 4], pets: usize) -> Corpus {
    let mut out = Vec::new();
    for (g, n) in sizes.iter().enumerate() {
        for i in 0..*n {
            let pet = format!("p{}", (i * 7 + g) % pets);
            out.push(Example {
                id: format!("g{g}-{i}"),
                language: "en".into(),
                text: format!("w <{pet}> w"),
                pet,
                euph_label: Label::from_bool(g < 2),
                vague_label: Some(Label::from_bool(g % 2 == 0)),
                source: String::new(),
                country: None,
            });
        }
    }
    Corpus::new(out).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corpus_jsonl_round_trip(examples in corpus(12)) {
        let c = Corpus::new(examples).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        c.save_jsonl(&p).unwrap();
        let back = load_corpus(&p, &Format::Jsonl).unwrap().strict().unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn stats_additive_over_disjoint_concat(a in corpus(10), b in corpus(10)) {
        let b: Vec<Example> = b.into_iter().map(|mut e| { e.id = format!("b-{}", e.id); e.pet = format!("{} b", e.pet); e.text = e.text.replace('>', " b>"); e }).collect();
        let ca = Corpus::new(a).unwrap();
        let cb = Corpus::new(b).unwrap();
        prop_assert_eq!(ca.concat(&cb).unwrap().stats(), ca.stats() + cb.stats());
    }

    #[test]
    fn marker_extraction_reinserts_exactly(ex in example(0)) {
        let span = extract_pet_span(&ex.text).unwrap();
        prop_assert_eq!(span.to_marked(), ex.text.clone());
        let chars: Vec<char> = span.clean_text.chars().collect();
        let inner: String = chars[span.span.clone()].iter().collect();
        prop_assert_eq!(inner, span.pet);
    }

    #[test]
    fn file_embedder_is_pure_lookup(keys in prop::collection::vec(0usize..6, 1..20)) {
        let table = VectorTable::from_entries((0..6).map(|i| (format!("t{i}"), Vector::new(vec![i as f64 + 1.0, 1.0 - i as f64]).unwrap()))).unwrap();
        let e = FileEmbedder::new(Arc::new(table));
        let texts: Vec<String> = keys.iter().map(|k| format!("t{k} t{}", (k + 1) % 6)).collect();
        let seq: Vec<Vector> = texts.iter().map(|t| e.embed(t).unwrap()).collect();
        let rev: Vec<Vector> = texts.iter().rev().map(|t| e.embed(t).unwrap()).collect();
        let par: Vec<Vector> = texts.par_iter().map(|t| e.embed(t).unwrap()).collect();
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(seq, rev.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    fn identical_responses_are_non_vague(n in 2usize..8, w in 0usize..4) {
        let table = VectorTable::from_entries((0..4).map(|i| (format!("r{i}"), Vector::new(vec![1.0, i as f64]).unwrap()))).unwrap();
        let set = ParaphraseSet {
            example_id: "x".into(), pet: "p".into(), euph_label: Label::One, text: "<p>".into(),
            paraphrases: vec![format!("r{w}"); n],
        };
        let s = mean_pairwise_similarity(&set, &FileEmbedder::new(Arc::new(table))).unwrap();
        prop_assert_eq!(threshold_decision(s, &VaguenessConfig::default()), Outcome::NonVague);
    }

    #[test]
    fn generalization_covers_exactly_and_is_idempotent(
        examples in corpus(16),
        picks in prop::collection::vec((any::<prop::sample::Index>(), 0.0f64..1.0), 0..10),
    ) {
        let c = Corpus::new(examples).unwrap();
        let decisions: Vec<VaguenessDecision> = picks.iter().map(|(ix, score)| {
            let ex = ix.get(c.examples());
            let outcome = if *score > 0.5 { Outcome::NonVague } else { Outcome::Vague };
            VaguenessDecision {
                example_id: ex.id.clone(), pet: ex.pet.clone(), euph_label: ex.euph_label,
                score: *score, outcome, resolved_label: None, requeued: false,
            }
        }).collect();
        let g = generalize_labels(&decisions, &c).unwrap();
        let uncovered: HashSet<&str> = g.uncovered.iter().map(|u| u.example_id.as_str()).collect();
        for ex in g.corpus.examples() {
            prop_assert!(ex.vague_label.is_some() != uncovered.contains(ex.id.as_str()));
        }
        let again = generalize_labels(&decisions, &g.corpus).unwrap();
        prop_assert_eq!(again.corpus, g.corpus);
        prop_assert_eq!(again.labels, g.labels);
    }

    #[test]
    fn balanced_split_keeps_equal_halves(sizes in prop::array::uniform4(5usize..40), ratio in 0.2f64..0.8, seed in any::<u64>()) {
        let c = labelled(sizes, 5);
        let part = subgroup_partition(&c, &[SubgroupKey::EuphLabel, SubgroupKey::VagueLabel]).unwrap();
        let sampled = balanced_sample(&part, seed).unwrap();
        let n: HashSet<usize> = sampled.values().map(Vec::len).collect();
        prop_assert_eq!(n.len(), 1);
        let (_, report) = train_test_split(&sampled, ratio, seed).unwrap();
        let halves: HashSet<Vec<usize>> = report.iter().map(|r| r.per_split.clone()).collect();
        prop_assert_eq!(halves.len(), 1);
    }

    #[test]
    fn cap_never_grows_or_alters(sizes in prop::array::uniform4(0usize..30), cap in 1usize..10, seed in any::<u64>()) {
        let c = labelled(sizes, 3);
        let capped = cap_per_pet(&c, cap, seed);
        let mut before: BTreeMap<(String, Label), usize> = BTreeMap::new();
        let mut after = before.clone();
        for e in c.examples() { *before.entry((e.pet_key(), e.euph_label)).or_default() += 1; }
        for e in capped.examples() {
            *after.entry((e.pet_key(), e.euph_label)).or_default() += 1;
            prop_assert_eq!(Some(e), c.get(&e.id));
        }
        for (k, n) in &after {
            prop_assert!(*n <= before[k] && *n <= cap);
            prop_assert_eq!(*n, before[k].min(cap));
        }
    }

    #[test]
    fn kfold_is_a_permutation(sizes in prop::array::uniform4(5usize..30), k in 2usize..6, seed in any::<u64>()) {
        let c = labelled(sizes, 4);
        let (split, _) = stratified_kfold(&c, k, &[SubgroupKey::EuphLabel], seed).unwrap();
        let Split::Folds { folds } = split else { unreachable!() };
        let mut ids: Vec<String> = folds.concat();
        ids.sort();
        let mut want: Vec<String> = c.ids().map(String::from).collect();
        want.sort();
        prop_assert_eq!(ids, want);
    }

    #[test]
    fn frequent_errors_monotone(wrong in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..8), t in 0usize..8) {
        let runs: Vec<RunRecord> = wrong.iter().enumerate().map(|(i, w)| RunRecord {
            index: i, split_seed: 0, model_seed: 0, train_ids: vec![],
            predictions: w.iter().enumerate().map(|(j, &bad)| TestPrediction {
                id: format!("e{j}"), gold: Label::One, pred: Label::from_bool(!bad),
            }).collect(),
            metrics: Metrics::from_confusion(Default::default()),
        }).collect();
        let mut r = sample_results();
        r.misclass_counts = misclass_counts(&runs);
        r.runs = runs;
        let lo = frequent_errors(&r, t).ids();
        let hi = frequent_errors(&r, t + 1).ids();
        prop_assert!(hi.is_subset(&lo));
        for e in frequent_errors(&r, t).entries {
            prop_assert!(e.misclassified >= t);
        }
    }
}

fn sample_results() -> euphkit::RunResults {
    let p = planted_corpus(&PlantedConfig { n_examples: 40, ..PlantedConfig::default() }).unwrap();
    let b = ReferenceLinear::new(Arc::new(p.table), p.lexicon).unwrap();
    let config = TrainConfig { n_runs: 1, options: [("iterations".to_string(), 5.into())].into(), ..TrainConfig::default() };
    run_experiment(&p.corpus, &SplitPlan::balanced_holdout(0), &config, &b).unwrap()
}

#[test]
fn deterministic_backend_gives_byte_identical_results() {
    let p = planted_corpus(&PlantedConfig { n_examples: 200, ..PlantedConfig::default() }).unwrap();
    let b = ReferenceLinear::new(Arc::new(p.table), p.lexicon).unwrap();
    let config = TrainConfig { n_runs: 3, ..TrainConfig::default() };
    let run = || serde_json::to_string(&run_experiment(&p.corpus, &SplitPlan::balanced_holdout(5), &config, &b).unwrap()).unwrap();
    assert_eq!(run(), run());
}
