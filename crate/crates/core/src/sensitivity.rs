//! Sensitivity scores: how many (token, lexicon word) pairs of an example are
//! close in word-vector space.
//!
//! For every token of the marker-stripped text and every lexicon word, one
//! point is added when both have vectors and their cosine is strictly above
//! the lexicon threshold. The normalized score divides by the token count,
//! out-of-vocabulary tokens included.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Example, Label};
use crate::embedding::{cosine, embed_word, lookup_key, Vector, VectorTable};
use crate::error::{Error, Result};
use crate::text;

/// The default 22-word sensitive-topic list.
pub const DEFAULT_SENSITIVE_WORDS: [&str; 22] = [
    "politics",
    "death",
    "kill",
    "crime",
    "drugs",
    "alcohol",
    "fat",
    "old",
    "poor",
    "cheap",
    "sex",
    "sexual",
    "employment",
    "job",
    "disability",
    "pregnant",
    "bathroom",
    "sickness",
    "race",
    "racial",
    "religion",
    "government",
];

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitiveLexicon {
    pub words: Vec<String>,
    pub threshold: f64,
}

impl Default for SensitiveLexicon {
    fn default() -> Self {
        SensitiveLexicon {
            words: DEFAULT_SENSITIVE_WORDS.iter().map(|w| w.to_string()).collect(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl SensitiveLexicon {
    pub fn new(words: Vec<String>, threshold: f64) -> Result<Self> {
        let lex = SensitiveLexicon { words, threshold };
        lex.validate()?;
        Ok(lex)
    }

    pub fn validate(&self) -> Result<()> {
        if self.words.is_empty() {
            return Err(Error::Lexicon("empty word list".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Lexicon(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        let mut seen = BTreeSet::new();
        for w in &self.words {
            let key = lookup_key(w);
            if key.is_empty() {
                return Err(Error::Lexicon(format!("word `{w}` is empty after normalization")));
            }
            if !seen.insert(key) {
                return Err(Error::Lexicon(format!("duplicate word `{w}`")));
            }
        }
        Ok(())
    }

    /// Reads one word per line; blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>, threshold: f64) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut words = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let word = line.split('#').next().unwrap_or("").trim();
            if !word.is_empty() {
                words.push(text::nfc(word));
            }
        }
        Self::new(words, threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub example_id: String,
    pub raw_score: u64,
    pub token_count: usize,
    pub norm_score: f64,
    /// Tokens without a vector.
    pub oov_tokens: usize,
}

/// Lexicon vectors resolved once against a table.
pub struct LexiconScorer<'a> {
    table: &'a VectorTable,
    lexicon_vectors: Vec<&'a Vector>,
    threshold: f64,
    missing_lexicon_words: Vec<String>,
}

impl<'a> LexiconScorer<'a> {
    pub fn new(lexicon: &SensitiveLexicon, table: &'a VectorTable) -> Result<Self> {
        lexicon.validate()?;
        let mut lexicon_vectors = Vec::new();
        let mut missing_lexicon_words = Vec::new();
        for w in &lexicon.words {
            match embed_word(w, table) {
                Some(v) => lexicon_vectors.push(v),
                None => missing_lexicon_words.push(w.clone()),
            }
        }
        Ok(LexiconScorer {
            table,
            lexicon_vectors,
            threshold: lexicon.threshold,
            missing_lexicon_words,
        })
    }

    /// Lexicon words without a vector; they never contribute points.
    pub fn missing_lexicon_words(&self) -> &[String] {
        &self.missing_lexicon_words
    }

    /// Per-lexicon-word hit counts for a token list, plus the OOV token count.
    pub fn hits(&self, tokens: &[String]) -> Result<(Vec<u64>, usize)> {
        let mut hits = vec![0u64; self.lexicon_vectors.len()];
        let mut oov = 0;
        for tok in tokens {
            let Some(tv) = embed_word(tok, self.table) else {
                oov += 1;
                continue;
            };
            for (h, lv) in hits.iter_mut().zip(&self.lexicon_vectors) {
                if cosine(tv, lv)? > self.threshold {
                    *h += 1;
                }
            }
        }
        Ok((hits, oov))
    }

    pub fn score_tokens(&self, example_id: &str, tokens: &[String]) -> Result<SensitivityResult> {
        if tokens.is_empty() {
            return Err(Error::EmptyText);
        }
        let (hits, oov_tokens) = self.hits(tokens)?;
        let raw_score: u64 = hits.iter().sum();
        Ok(SensitivityResult {
            example_id: example_id.to_string(),
            raw_score,
            token_count: tokens.len(),
            norm_score: raw_score as f64 / tokens.len() as f64,
            oov_tokens,
        })
    }

    pub fn score(&self, example: &Example) -> Result<SensitivityResult> {
        self.score_tokens(&example.id, &text::tokenize(&example.clean_text()))
    }
}

pub fn sensitivity_score(
    example: &Example,
    lexicon: &SensitiveLexicon,
    table: &VectorTable,
) -> Result<SensitivityResult> {
    LexiconScorer::new(lexicon, table)?.score(example)
}

/// Scores every example in corpus order.
pub fn score_corpus(corpus: &Corpus, lexicon: &SensitiveLexicon, table: &VectorTable) -> Result<Vec<SensitivityResult>> {
    let scorer = LexiconScorer::new(lexicon, table)?;
    corpus.examples().par_iter().map(|ex| scorer.score(ex)).collect()
}

pub fn save_results(results: &[SensitivityResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["example_id", "raw", "token_count", "norm", "oov"])?;
    for r in results {
        w.write_record([
            r.example_id.clone(),
            r.raw_score.to_string(),
            r.token_count.to_string(),
            r.norm_score.to_string(),
            r.oov_tokens.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<SensitivityResult>> {
    #[derive(Deserialize)]
    struct Row {
        example_id: String,
        raw: u64,
        token_count: usize,
        norm: f64,
        oov: usize,
    }
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize::<Row>()
        .map(|r| {
            let r = r?;
            Ok(SensitivityResult {
                example_id: r.example_id,
                raw_score: r.raw,
                token_count: r.token_count,
                norm_score: r.norm,
                oov_tokens: r.oov,
            })
        })
        .collect()
}

/// A scored example with the labels used for subgrouping.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredExample {
    pub result: SensitivityResult,
    pub euph_label: Label,
    pub vague_label: Label,
}

/// Attaches corpus labels to scores. Every scored example needs both labels.
pub fn attach_labels(results: &[SensitivityResult], corpus: &Corpus) -> Result<Vec<ScoredExample>> {
    results
        .iter()
        .map(|r| {
            let ex = corpus
                .get(&r.example_id)
                .ok_or_else(|| Error::UnknownId(r.example_id.clone()))?;
            let vague_label = ex.vague_label.ok_or_else(|| Error::MissingLabel {
                id: ex.id.clone(),
                key: "vague_label".into(),
            })?;
            Ok(ScoredExample {
                result: r.clone(),
                euph_label: ex.euph_label,
                vague_label,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetTag {
    Full,
    Err,
}

impl std::fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DatasetTag::Full => "Full",
            DatasetTag::Err => "Err",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupScoreRow {
    pub euph_label: Label,
    pub vague_label: Label,
    pub dataset: DatasetTag,
    pub size: usize,
    /// `None` when the subgroup is empty.
    pub mean_raw: Option<f64>,
    pub mean_norm: Option<f64>,
}

impl SubgroupScoreRow {
    pub fn is_undefined(&self) -> bool {
        self.size == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupScoreTable {
    pub rows: Vec<SubgroupScoreRow>,
}

/// Subgroup order: euph-vague, euph-nonvague, noneuph-vague, noneuph-nonvague.
pub const SUBGROUP_ORDER: [(Label, Label); 4] = [
    (Label::One, Label::One),
    (Label::One, Label::Zero),
    (Label::Zero, Label::One),
    (Label::Zero, Label::Zero),
];

/// Four `Full` rows, then four `Err` rows restricted to `error_set` when given.
pub fn subgroup_means(scored: &[ScoredExample], error_set: Option<&BTreeSet<String>>) -> SubgroupScoreTable {
    let mut rows = Vec::with_capacity(8);
    let mut push_rows = |tag: DatasetTag, keep: &dyn Fn(&ScoredExample) -> bool| {
        for (euph, vague) in SUBGROUP_ORDER {
            let members: Vec<&ScoredExample> = scored
                .iter()
                .filter(|s| s.euph_label == euph && s.vague_label == vague && keep(s))
                .collect();
            let size = members.len();
            let mean = |f: &dyn Fn(&ScoredExample) -> f64| {
                (size > 0).then(|| members.iter().map(|s| f(s)).sum::<f64>() / size as f64)
            };
            rows.push(SubgroupScoreRow {
                euph_label: euph,
                vague_label: vague,
                dataset: tag,
                size,
                mean_raw: mean(&|s| s.result.raw_score as f64),
                mean_norm: mean(&|s| s.result.norm_score),
            });
        }
    };
    push_rows(DatasetTag::Full, &|_| true);
    if let Some(errs) = error_set {
        push_rows(DatasetTag::Err, &|s| errs.contains(&s.result.example_id));
    }
    SubgroupScoreTable { rows }
}

const UNDEFINED: &str = "n/a";

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| format!("{x:.decimals$}"))
}

impl SubgroupScoreTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("euph,vague,dataset,size,mean_score,norm_score\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.euph_label,
                r.vague_label,
                r.dataset,
                r.size,
                fmt_opt(r.mean_raw, 4),
                fmt_opt(r.mean_norm, 4)
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Euph | Vague | Dataset | Size | Mean Score | Norm Score |\n|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                r.euph_label,
                r.vague_label,
                r.dataset,
                r.size,
                fmt_opt(r.mean_raw, 2),
                fmt_opt(r.mean_norm, 3)
            );
        }
        if self.rows.iter().any(SubgroupScoreRow::is_undefined) {
            out.push_str("\n`n/a`: empty subgroup, mean undefined.\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn toy_table() -> VectorTable {
        VectorTable::from_entries([
            ("funeral", v(&[1.0, 0.0])),
            ("death", v(&[1.0, 0.0])),
            ("kill", v(&[0.8, 0.6])),
            ("party", v(&[0.0, 1.0])),
        ])
        .unwrap()
    }

    fn lex(words: &[&str]) -> SensitiveLexicon {
        SensitiveLexicon::new(words.iter().map(|w| w.to_string()).collect(), 0.5).unwrap()
    }

    fn ex(id: &str, text: &str) -> Example {
        Example {
            id: id.into(),
            language: "en".into(),
            text: text.into(),
            pet: crate::corpus::extract_pet_span(text).unwrap().pet,
            euph_label: Label::One,
            vague_label: Some(Label::One),
            source: String::new(),
            country: None,
        }
    }

    #[test]
    fn default_lexicon_has_22_words() {
        let l = SensitiveLexicon::default();
        assert_eq!(l.words.len(), 22);
        assert_eq!(l.threshold, 0.5);
        l.validate().unwrap();
        assert_eq!(l.words.first().unwrap(), "politics");
        assert_eq!(l.words.last().unwrap(), "government");
    }

    #[test]
    fn funeral_party_example() {
        // cos(funeral,death)=1, cos(funeral,kill)=0.8, cos(party,death)=0, cos(party,kill)=0.6
        let r = sensitivity_score(&ex("a", "<funeral> party"), &lex(&["death", "kill"]), &toy_table()).unwrap();
        assert_eq!(r.raw_score, 3);
        assert_eq!(r.token_count, 2);
        assert_eq!(r.norm_score, 1.5);
        assert_eq!(r.oov_tokens, 0);
    }

    #[test]
    fn no_similar_tokens_and_all_oov() {
        let r = sensitivity_score(&ex("a", "<party> party"), &lex(&["death"]), &toy_table()).unwrap();
        assert_eq!((r.raw_score, r.norm_score), (0, 0.0));
        let r = sensitivity_score(&ex("b", "<zzz> yyy xxx"), &lex(&["death"]), &toy_table()).unwrap();
        assert_eq!((r.raw_score, r.oov_tokens, r.token_count), (0, 3, 3));
    }

    #[test]
    fn threshold_is_strict() {
        let t = VectorTable::from_entries([("a", v(&[1.0, 0.0])), ("b", v(&[0.5, 0.75f64.sqrt()]))]).unwrap();
        let l = SensitiveLexicon::new(vec!["b".into()], 0.5).unwrap();
        let s = LexiconScorer::new(&l, &t).unwrap();
        // cos = 0.5 (up to rounding): not strictly above 0.5 unless rounding pushes it
        let c = cosine(t.get("a").unwrap(), t.get("b").unwrap()).unwrap();
        let r = s.score_tokens("x", &["a".into()]).unwrap();
        assert_eq!(r.raw_score, u64::from(c > 0.5));
    }

    #[test]
    fn lexicon_loading_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lex.txt");
        std::fs::write(&p, "# sensitive words\ndeath\n\nkill # violence\n").unwrap();
        let l = SensitiveLexicon::load(&p, 0.5).unwrap();
        assert_eq!(l.words, vec!["death", "kill"]);
        std::fs::write(&p, "death\nDeath\n").unwrap();
        assert!(SensitiveLexicon::load(&p, 0.5).is_err());
        assert!(SensitiveLexicon::new(vec![], 0.5).is_err());
        assert!(SensitiveLexicon::new(vec!["a".into()], 1.5).is_err());
    }

    fn scored(id: &str, raw: u64, euph: Label, vague: Label) -> ScoredExample {
        ScoredExample {
            result: SensitivityResult {
                example_id: id.into(),
                raw_score: raw,
                token_count: 10,
                norm_score: raw as f64 / 10.0,
                oov_tokens: 0,
            },
            euph_label: euph,
            vague_label: vague,
        }
    }

    #[test]
    fn subgroup_means_rows() {
        let s = vec![
            scored("a", 2, Label::One, Label::One),
            scored("b", 4, Label::One, Label::One),
        ];
        let t = subgroup_means(&s, None);
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0].size, 2);
        assert_eq!(t.rows[0].mean_raw, Some(3.0));
        assert!(t.rows[1].is_undefined() && t.rows[1].mean_raw.is_none());

        let errs: BTreeSet<String> = ["zzz".to_string()].into();
        let t = subgroup_means(&s, Some(&errs));
        assert_eq!(t.rows.len(), 8);
        assert!(t.rows[4..].iter().all(|r| r.dataset == DatasetTag::Err && r.size == 0 && r.mean_raw.is_none()));
        assert!(t.to_markdown().contains("n/a"));
        assert!(t.to_csv().starts_with("euph,vague,dataset,size,mean_score,norm_score\n1,1,Full,2,3.0000,0.3000\n"));
    }

    fn brute_force_raw(tokens: &[String], lexicon: &[String], table: &VectorTable, thr: f64) -> u64 {
        let mut raw = 0;
        for t in tokens {
            for w in lexicon {
                if let (Some(a), Some(b)) = (table.get(t), table.get(w)) {
                    let dot: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum();
                    if dot / (a.norm() * b.norm()) > thr {
                        raw += 1;
                    }
                }
            }
        }
        raw
    }

    fn vocab_and_table() -> impl Strategy<Value = VectorTable> {
        prop::collection::vec(prop::collection::vec(0.05f64..1.0, 3), 8).prop_map(|vs| {
            VectorTable::from_entries(vs.into_iter().enumerate().map(|(i, c)| (format!("w{i}"), v(&c)))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn raw_score_properties(
            table in vocab_and_table(),
            toks in prop::collection::vec(0usize..10, 1..12),
            lex_idx in prop::collection::btree_set(0usize..10, 1..6),
            extra in 0usize..10,
        ) {
            // w8, w9 are out of vocabulary
            let tokens: Vec<String> = toks.iter().map(|i| format!("w{i}")).collect();
            let words: Vec<String> = lex_idx.iter().map(|i| format!("w{i}")).collect();
            let l = SensitiveLexicon::new(words.clone(), 0.5).unwrap();
            let r = LexiconScorer::new(&l, &table).unwrap().score_tokens("x", &tokens).unwrap();
            // exact brute-force agreement, bounded, norm exact
            prop_assert_eq!(r.raw_score, brute_force_raw(&tokens, &words, &table, 0.5));
            prop_assert!(r.raw_score <= (tokens.len() * words.len()) as u64);
            prop_assert_eq!(r.norm_score, r.raw_score as f64 / tokens.len() as f64);

            // lexicon growth never lowers the raw score
            let mut grown = words.clone();
            let w = format!("w{extra}");
            if !grown.contains(&w) { grown.push(w); }
            let g = LexiconScorer::new(&SensitiveLexicon::new(grown, 0.5).unwrap(), &table).unwrap()
                .score_tokens("x", &tokens).unwrap();
            prop_assert!(g.raw_score >= r.raw_score);

            // lexicon permutation is irrelevant
            let mut rev = words.clone();
            rev.reverse();
            let p = LexiconScorer::new(&SensitiveLexicon::new(rev, 0.5).unwrap(), &table).unwrap()
                .score_tokens("x", &tokens).unwrap();
            prop_assert_eq!(&p, &r);

            // doubling the text doubles raw, keeps norm
            let doubled: Vec<String> = tokens.iter().chain(tokens.iter()).cloned().collect();
            let d = LexiconScorer::new(&l, &table).unwrap().score_tokens("x", &doubled).unwrap();
            prop_assert_eq!(d.raw_score, 2 * r.raw_score);
            prop_assert!((d.norm_score - r.norm_score).abs() <= 1e-12);
        }
    }
}
