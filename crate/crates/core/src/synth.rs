//! Synthetic corpora: corpora built to declared statistics, and a
//! planted-signal corpus with its word-vector table for end-to-end checks.

use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusStats, Example, Label};
use crate::embedding::{Vector, VectorTable};
use crate::error::{Error, Result};
use crate::sensitivity::{SensitiveLexicon, DEFAULT_SENSITIVE_WORDS};

/// One declared row of per-language corpus statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsRow {
    pub language: String,
    pub total: usize,
    pub euph: usize,
    pub non_euph: usize,
    pub total_pets: usize,
    pub always_euph_pets: usize,
    pub ambiguous_pets: usize,
}

impl StatsRow {
    /// Checks that a corpus with these per-category counts can be built.
    /// `total_pets` is not used for construction; see [`Self::inconsistencies`].
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Manifest(format!("{}: {m}", self.language)));
        if self.euph + self.non_euph != self.total {
            return bad(format!("euph {} + non-euph {} != total {}", self.euph, self.non_euph, self.total));
        }
        let pets = self.always_euph_pets + self.ambiguous_pets;
        if pets == 0 || self.euph < pets {
            return bad("fewer euphemistic examples than PETs".into());
        }
        if self.non_euph < self.ambiguous_pets || (self.non_euph > 0 && self.ambiguous_pets == 0) {
            return bad("non-euphemistic examples cannot be spread over the ambiguous PETs".into());
        }
        Ok(())
    }

    /// Declared totals that disagree with their parts.
    pub fn inconsistencies(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.euph + self.non_euph != self.total {
            out.push(format!("euph + non-euph = {} but total = {}", self.euph + self.non_euph, self.total));
        }
        let pets = self.always_euph_pets + self.ambiguous_pets;
        if pets != self.total_pets {
            out.push(format!("always-euph + ambiguous PETs = {pets} but total PETs = {}", self.total_pets));
        }
        out
    }

    /// The statistics a corpus built from this row reports.
    pub fn expected(&self) -> CorpusStats {
        CorpusStats {
            total: self.total,
            euph: self.euph,
            non_euph: self.non_euph,
            total_pets: self.always_euph_pets + self.ambiguous_pets,
            always_euph_pets: self.always_euph_pets,
            ambiguous_pets: self.ambiguous_pets,
            non_euph_only_pets: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsManifest {
    pub rows: Vec<StatsRow>,
}

impl StatsManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// Builds a corpus with the row's example counts and PET categories.
///
/// Every PET gets one euphemistic example and every ambiguous PET one
/// non-euphemistic example; the remainder is dealt round-robin.
pub fn corpus_from_stats(row: &StatsRow) -> Result<Corpus> {
    row.validate()?;
    let lang = &row.language;
    let pet = |j: usize| format!("{lang} pet {j}");
    let n_pets = row.always_euph_pets + row.ambiguous_pets;
    // ambiguous PETs come first so non-euphemistic examples index into them
    let mut euph_of = vec![1usize; n_pets];
    for i in 0..row.euph - n_pets {
        euph_of[i % n_pets] += 1;
    }
    let mut non_of = vec![0usize; n_pets];
    for i in 0..row.non_euph {
        non_of[i % row.ambiguous_pets.max(1)] += 1;
    }
    let mut examples = Vec::with_capacity(row.total);
    for j in 0..n_pets {
        for (label, n) in [(Label::One, euph_of[j]), (Label::Zero, non_of[j])] {
            for k in 0..n {
                let i = examples.len();
                examples.push(Example {
                    id: format!("{lang}-{i:05}"),
                    language: lang.clone(),
                    text: format!("synthetic sentence {k} about <{}> here", pet(j)),
                    pet: pet(j),
                    euph_label: label,
                    vague_label: None,
                    source: "synthetic".into(),
                    country: None,
                });
            }
        }
    }
    let mut corpus = Corpus::new(examples)?;
    corpus.language_tag = Some(lang.clone());
    Ok(corpus)
}

/// Signal strength of one vagueness slice: probability that an example
/// carries a planted sensitive token, per euphemism label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceSignal {
    pub planted_if_euph: f64,
    pub planted_if_non_euph: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedConfig {
    pub n_examples: usize,
    pub n_pets: usize,
    pub n_filler: usize,
    /// Filler-space dimensions added after one axis per lexicon word.
    pub filler_dims: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Vague examples.
    pub strong: SliceSignal,
    /// Non-vague examples.
    pub weak: SliceSignal,
    pub language: String,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n_examples: 2000,
            n_pets: 20,
            n_filler: 200,
            filler_dims: 10,
            min_len: 6,
            max_len: 14,
            strong: SliceSignal { planted_if_euph: 0.98, planted_if_non_euph: 0.02 },
            weak: SliceSignal { planted_if_euph: 0.88, planted_if_non_euph: 0.10 },
            language: "synth".into(),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub corpus: Corpus,
    pub table: VectorTable,
    pub lexicon: SensitiveLexicon,
}

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = r.random_range(f64::EPSILON..1.0);
    let v: f64 = r.random::<f64>();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Generates the planted-signal corpus.
///
/// Lexicon words occupy orthogonal axes. Planted tokens sit close to one
/// lexicon axis; filler tokens live in the remaining dimensions with a small
/// lexicon-space component, so only planted tokens produce hits. Subgroups
/// (euph × vague) are equally sized and every PET occurs under both labels.
pub fn planted_corpus(config: &PlantedConfig) -> Result<PlantedCorpus> {
    if config.n_examples < 8 || config.n_pets == 0 || config.n_filler == 0 || config.min_len > config.max_len {
        return Err(Error::Manifest("degenerate planted-signal config".into()));
    }
    let mut r = ChaCha8Rng::seed_from_u64(config.seed);
    let n_lex = DEFAULT_SENSITIVE_WORDS.len();
    let dim = n_lex + config.filler_dims;
    let mut table = VectorTable::new(dim);

    let axis = |i: usize| {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    };
    for (i, w) in DEFAULT_SENSITIVE_WORDS.iter().enumerate() {
        table.insert((*w).to_string(), Vector::new(axis(i))?)?;
    }
    let mut planted = Vec::with_capacity(n_lex * 2);
    for i in 0..n_lex * 2 {
        let mut v = axis(i % n_lex);
        v.iter_mut().for_each(|c| *c += 0.15 * gaussian(&mut r));
        let tok = format!("marked{i}");
        table.insert(tok.clone(), Vector::new(v)?)?;
        planted.push(tok);
    }
    let mut filler = Vec::with_capacity(config.n_filler);
    for i in 0..config.n_filler {
        let mut v = vec![0.0; dim];
        for (d, c) in v.iter_mut().enumerate() {
            *c = if d < n_lex { 0.03 } else { 1.0 } * gaussian(&mut r);
        }
        let tok = format!("plain{i}");
        table.insert(tok.clone(), Vector::new(v)?)?;
        filler.push(tok);
    }

    let mut examples = Vec::with_capacity(config.n_examples);
    for i in 0..config.n_examples {
        let euph = Label::from_bool(i % 2 == 0);
        let vague = Label::from_bool((i / 2) % 2 == 0);
        let signal = if vague.is_one() { config.strong } else { config.weak };
        let p = if euph.is_one() { signal.planted_if_euph } else { signal.planted_if_non_euph };
        let len = r.random_range(config.min_len..=config.max_len);
        let mut tokens: Vec<String> = (0..len).map(|_| filler[r.random_range(0..filler.len())].clone()).collect();
        if r.random_bool(p) {
            let k = r.random_range(0..planted.len());
            let at = r.random_range(0..=tokens.len());
            tokens.insert(at, planted[k].clone());
        }
        let pet = format!("term{}", (i / 4) % config.n_pets);
        let at = r.random_range(0..=tokens.len());
        tokens.insert(at, format!("<{pet}>"));
        examples.push(Example {
            id: format!("p{i:05}"),
            language: config.language.clone(),
            text: tokens.join(" "),
            pet,
            euph_label: euph,
            vague_label: Some(vague),
            source: "planted".into(),
            country: None,
        });
    }
    let mut corpus = Corpus::new(examples)?;
    corpus.language_tag = Some(config.language.clone());
    Ok(PlantedCorpus {
        corpus,
        table,
        lexicon: SensitiveLexicon::default(),
    })
}

/// Control corpus: euphemism labels permuted across examples, everything else kept.
pub fn shuffle_labels(corpus: &Corpus, seed: u64) -> Result<Corpus> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Label> = corpus.examples().iter().map(|e| e.euph_label).collect();
    labels.shuffle(&mut r);
    let examples = corpus
        .examples()
        .iter()
        .zip(labels)
        .map(|(e, l)| Example { euph_label: l, ..e.clone() })
        .collect();
    let mut out = Corpus::new(examples)?;
    out.language_tag = corpus.language_tag.clone();
    Ok(out)
}
