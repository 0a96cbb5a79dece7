//! PET corpora: the canonical example record, marker handling, loading and statistics.
//!
//! Every example text carries exactly one PET span delimited by `<` and `>`.
//! The canonical interchange format is JSONL with one [`Example`] per line;
//! CSV is accepted for ingestion through a [`CsvColumns`] map.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MarkerError, Result};
use crate::text;

pub const PET_OPEN: char = '<';
pub const PET_CLOSE: char = '>';

/// A binary label. Serialized as the integer `0` or `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Zero, Label::One];

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Zero => 0,
            Label::One => 1,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Label::One
        } else {
            Label::Zero
        }
    }

    pub fn is_one(self) -> bool {
        self == Label::One
    }

    pub fn flip(self) -> Self {
        Self::from_bool(!self.is_one())
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Zero),
            1 => Ok(Label::One),
            other => Err(Error::InvalidLabel(other.to_string())),
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Label::Zero),
            "1" => Ok(Label::One),
            other => Err(Error::InvalidLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// One text with a marked PET occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub id: String,
    pub language: String,
    pub text: String,
    pub pet: String,
    pub euph_label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vague_label: Option<Label>,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
}

impl Example {
    /// NFC-normalizes every string field in place.
    pub fn normalize(&mut self) {
        self.text = text::nfc(&self.text);
        self.pet = text::nfc(&self.pet);
        self.language = self.language.trim().to_string();
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidExample {
            id: self.id.clone(),
            reason,
        };
        if self.id.trim().is_empty() {
            return Err(invalid("empty id".into()));
        }
        if self.language.is_empty() {
            return Err(invalid("empty language code".into()));
        }
        let span = extract_pet_span(&self.text).map_err(|e| invalid(e.to_string()))?;
        if text::pet_key(&span.pet) != self.pet_key() {
            return Err(invalid(format!(
                "marked span `{}` does not match pet `{}`",
                span.pet, self.pet
            )));
        }
        Ok(())
    }

    /// Grouping identity of this example's PET.
    pub fn pet_key(&self) -> String {
        text::pet_key(&self.pet)
    }

    /// The text with both PET markers removed.
    pub fn clean_text(&self) -> String {
        match extract_pet_span(&self.text) {
            Ok(span) => span.clean_text,
            Err(_) => self.text.replace([PET_OPEN, PET_CLOSE], ""),
        }
    }
}

/// Result of splitting a marked text into clean text and PET location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetSpan {
    pub clean_text: String,
    /// Half-open character range of the PET inside `clean_text`.
    pub span: Range<usize>,
    pub pet: String,
}

impl PetSpan {
    /// Reinserts the markers at `span`, reproducing the marked text.
    pub fn to_marked(&self) -> String {
        let mut out = String::with_capacity(self.clean_text.len() + 2);
        for (i, c) in self.clean_text.chars().enumerate() {
            if i == self.span.start {
                out.push(PET_OPEN);
            }
            if i == self.span.end {
                out.push(PET_CLOSE);
            }
            out.push(c);
        }
        if self.span.end == self.clean_text.chars().count() {
            out.push(PET_CLOSE);
        }
        out
    }
}

pub fn extract_pet_span(marked: &str) -> std::result::Result<PetSpan, MarkerError> {
    let opens = marked.matches(PET_OPEN).count();
    let closes = marked.matches(PET_CLOSE).count();
    match (opens, closes) {
        (0, 0) => return Err(MarkerError::Missing),
        (1, 1) => {}
        (o, c) if o == c => return Err(MarkerError::Multiple),
        _ => return Err(MarkerError::Unbalanced),
    }

    let mut clean = String::with_capacity(marked.len());
    let mut start = None;
    let mut end = None;
    let mut pos = 0usize;
    for c in marked.chars() {
        match c {
            PET_OPEN => start = Some(pos),
            PET_CLOSE => {
                if start.is_none() {
                    return Err(MarkerError::Unbalanced);
                }
                end = Some(pos);
            }
            _ => {
                clean.push(c);
                pos += 1;
            }
        }
    }
    let (start, end) = (start.unwrap(), end.unwrap());
    let pet: String = clean.chars().skip(start).take(end - start).collect();
    if pet.trim().is_empty() {
        return Err(MarkerError::EmptySpan);
    }
    Ok(PetSpan {
        clean_text: clean,
        span: start..end,
        pet,
    })
}

/// An ordered collection of examples with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    examples: Vec<Example>,
    pub language_tag: Option<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.examples == other.examples && self.language_tag == other.language_tag
    }
}

impl Corpus {
    pub fn new(examples: Vec<Example>) -> Result<Self> {
        let mut index = HashMap::with_capacity(examples.len());
        for (i, ex) in examples.iter().enumerate() {
            if index.insert(ex.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
        }
        let language_tag = match examples.first() {
            Some(first) if examples.iter().all(|e| e.language == first.language) => {
                Some(first.language.clone())
            }
            _ => None,
        };
        Ok(Corpus {
            examples,
            language_tag,
            index,
        })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn into_examples(self) -> Vec<Example> {
        self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Example> {
        self.index.get(id).map(|&i| &self.examples[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.id.as_str())
    }

    /// Looks up every id, failing on the first unknown one.
    pub fn select<'a, S: AsRef<str>>(&'a self, ids: &[S]) -> Result<Vec<&'a Example>> {
        ids.iter()
            .map(|id| {
                self.get(id.as_ref())
                    .ok_or_else(|| Error::UnknownId(id.as_ref().to_string()))
            })
            .collect()
    }

    /// Keeps only the examples whose ids satisfy `keep`, in corpus order.
    pub fn filter(&self, mut keep: impl FnMut(&Example) -> bool) -> Corpus {
        let kept = self.examples.iter().filter(|e| keep(e)).cloned().collect();
        Corpus::new(kept).expect("subset of a valid corpus has unique ids")
    }

    pub fn concat(&self, other: &Corpus) -> Result<Corpus> {
        let mut all = self.examples.clone();
        all.extend(other.examples.iter().cloned());
        Corpus::new(all)
    }

    /// Example counts per PET key and euphemism label.
    pub fn pet_label_counts(&self) -> BTreeMap<String, [usize; 2]> {
        let mut counts: BTreeMap<String, [usize; 2]> = BTreeMap::new();
        for ex in &self.examples {
            counts.entry(ex.pet_key()).or_default()[ex.euph_label.as_u8() as usize] += 1;
        }
        counts
    }

    pub fn stats(&self) -> CorpusStats {
        stats(self.examples.iter())
    }

    pub fn stats_by_language(&self) -> BTreeMap<String, CorpusStats> {
        let mut by_lang: BTreeMap<&str, Vec<&Example>> = BTreeMap::new();
        for ex in &self.examples {
            by_lang.entry(ex.language.as_str()).or_default().push(ex);
        }
        by_lang
            .into_iter()
            .map(|(lang, exs)| (lang.to_string(), stats(exs.into_iter())))
            .collect()
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for ex in &self.examples {
            serde_json::to_writer(&mut *w, ex)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Table-5 style corpus statistics.
///
/// `total_pets` counts PETs with at least one euphemistic example; PETs whose
/// examples are all non-euphemistic are reported in `non_euph_only_pets`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub euph: usize,
    pub non_euph: usize,
    pub total_pets: usize,
    pub always_euph_pets: usize,
    pub ambiguous_pets: usize,
    pub non_euph_only_pets: usize,
}

impl std::ops::Add for CorpusStats {
    type Output = CorpusStats;

    fn add(self, o: CorpusStats) -> CorpusStats {
        CorpusStats {
            total: self.total + o.total,
            euph: self.euph + o.euph,
            non_euph: self.non_euph + o.non_euph,
            total_pets: self.total_pets + o.total_pets,
            always_euph_pets: self.always_euph_pets + o.always_euph_pets,
            ambiguous_pets: self.ambiguous_pets + o.ambiguous_pets,
            non_euph_only_pets: self.non_euph_only_pets + o.non_euph_only_pets,
        }
    }
}

pub fn stats<'a>(examples: impl Iterator<Item = &'a Example>) -> CorpusStats {
    let mut per_pet: HashMap<String, [usize; 2]> = HashMap::new();
    let mut s = CorpusStats::default();
    for ex in examples {
        s.total += 1;
        match ex.euph_label {
            Label::One => s.euph += 1,
            Label::Zero => s.non_euph += 1,
        }
        per_pet.entry(ex.pet_key()).or_default()[ex.euph_label.as_u8() as usize] += 1;
    }
    for [non, euph] in per_pet.into_values() {
        match (non > 0, euph > 0) {
            (false, true) => s.always_euph_pets += 1,
            (true, true) => s.ambiguous_pets += 1,
            (true, false) => s.non_euph_only_pets += 1,
            (false, false) => unreachable!(),
        }
    }
    s.total_pets = s.always_euph_pets + s.ambiguous_pets;
    s
}

/// CSV column names mapped onto [`Example`] fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvColumns {
    pub id: String,
    pub language: String,
    pub text: String,
    pub pet: String,
    pub euph_label: String,
    pub vague_label: Option<String>,
    pub source: Option<String>,
    pub country: Option<String>,
    /// Used when the file has no language column.
    pub default_language: Option<String>,
}

impl Default for CsvColumns {
    fn default() -> Self {
        CsvColumns {
            id: "id".into(),
            language: "language".into(),
            text: "text".into(),
            pet: "pet".into(),
            euph_label: "euph_label".into(),
            vague_label: Some("vague_label".into()),
            source: Some("source".into()),
            country: Some("country".into()),
            default_language: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)] // built once per load
pub enum Format {
    Jsonl,
    Csv(CsvColumns),
}

impl Format {
    /// Picks the format from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path, columns: Option<CsvColumns>) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv(columns.unwrap_or_default()),
            _ => Format::Jsonl,
        }
    }
}

/// A record that failed validation during loading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line (JSONL) or record (CSV, header excluded) number.
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub corpus: Corpus,
    pub rejected: Vec<Rejection>,
}

impl Loaded {
    /// Fails if any record was rejected.
    pub fn strict(self) -> Result<Corpus> {
        match self.rejected.first() {
            None => Ok(self.corpus),
            Some(first) => Err(Error::Rejected {
                count: self.rejected.len(),
                first_line: first.line,
                first_reason: first.reason.clone(),
            }),
        }
    }
}

/// Loads and validates a corpus. Unreadable files are errors; invalid
/// records are collected in [`Loaded::rejected`].
pub fn load_corpus(path: impl AsRef<Path>, format: &Format) -> Result<Loaded> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        Format::Jsonl => read_jsonl(BufReader::new(file), path)?,
        Format::Csv(cols) => read_csv(file, cols)?,
    };

    let mut seen = HashMap::new();
    let mut examples = Vec::new();
    let mut rejected = Vec::new();
    for (line, record) in records {
        let mut ex = match record {
            Ok(ex) => ex,
            Err(reason) => {
                rejected.push(Rejection {
                    line,
                    id: None,
                    reason,
                });
                continue;
            }
        };
        ex.normalize();
        if let Err(e) = ex.validate() {
            rejected.push(Rejection {
                line,
                id: Some(ex.id.clone()),
                reason: e.to_string(),
            });
            continue;
        }
        if let Some(first) = seen.insert(ex.id.clone(), line) {
            seen.insert(ex.id.clone(), first);
            rejected.push(Rejection {
                line,
                id: Some(ex.id.clone()),
                reason: format!("duplicate id `{}` (first seen at line {first})", ex.id),
            });
            continue;
        }
        examples.push(ex);
    }
    Ok(Loaded {
        corpus: Corpus::new(examples)?,
        rejected,
    })
}

type Record = (usize, std::result::Result<Example, String>);

fn read_jsonl<R: BufRead>(reader: R, path: &Path) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((
            i + 1,
            serde_json::from_str::<Example>(&line).map_err(|e| e.to_string()),
        ));
    }
    Ok(out)
}

fn read_csv<R: std::io::Read>(reader: R, cols: &CsvColumns) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| {
        find(name).ok_or_else(|| Error::Parse {
            path: "<csv>".into(),
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let id = required(&cols.id)?;
    let text = required(&cols.text)?;
    let pet = required(&cols.pet)?;
    let euph = required(&cols.euph_label)?;
    let language = match (find(&cols.language), &cols.default_language) {
        (Some(i), _) => Ok(i),
        (None, Some(lang)) => Err(lang.clone()),
        (None, None) => return Err(required(&cols.language).unwrap_err()),
    };
    let optional = |name: &Option<String>| name.as_deref().and_then(find);
    let vague = optional(&cols.vague_label);
    let source = optional(&cols.source);
    let country = optional(&cols.country);

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                out.push((line, Err(e.to_string())));
                continue;
            }
        };
        let get = |idx: usize| row.get(idx).unwrap_or("").to_string();
        let opt = |idx: Option<usize>| idx.map(get).filter(|s| !s.trim().is_empty());
        let parsed = (|| -> std::result::Result<Example, String> {
            let euph_label = get(euph).parse::<Label>().map_err(|e| e.to_string())?;
            let vague_label = opt(vague)
                .map(|v| v.parse::<Label>())
                .transpose()
                .map_err(|e| e.to_string())?;
            Ok(Example {
                id: get(id),
                language: match &language {
                    Ok(idx) => get(*idx),
                    Err(lang) => lang.clone(),
                },
                text: get(text),
                pet: get(pet),
                euph_label,
                vague_label,
                source: opt(source).unwrap_or_default(),
                country: opt(country),
            })
        })();
        out.push((line, parsed));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(id: &str, text: &str, pet: &str, euph: Label) -> Example {
        Example {
            id: id.into(),
            language: "en".into(),
            text: text.into(),
            pet: pet.into(),
            euph_label: euph,
            vague_label: None,
            source: String::new(),
            country: None,
        }
    }

    #[test]
    fn extract_span_examples() {
        let s = extract_pet_span("He's <passed away> but").unwrap();
        assert_eq!(s.clean_text, "He's passed away but");
        assert_eq!(s.span, 5..16);
        assert_eq!(s.pet, "passed away");

        let s = extract_pet_span("<x>").unwrap();
        assert_eq!((s.clean_text.as_str(), s.span.clone(), s.pet.as_str()), ("x", 0..1, "x"));
        assert_eq!(s.to_marked(), "<x>");

        assert_eq!(extract_pet_span("no markers here"), Err(MarkerError::Missing));
        assert_eq!(extract_pet_span("<a> and <b>"), Err(MarkerError::Multiple));
        assert_eq!(extract_pet_span("a > b <c"), Err(MarkerError::Unbalanced));
        assert_eq!(extract_pet_span("a <c"), Err(MarkerError::Unbalanced));
        assert_eq!(extract_pet_span("a < > b"), Err(MarkerError::EmptySpan));
    }

    #[test]
    fn span_offsets_are_characters() {
        let s = extract_pet_span("他<去世>了").unwrap();
        assert_eq!(s.span, 1..3);
        assert_eq!(s.pet, "去世");
        assert_eq!(s.to_marked(), "他<去世>了");
    }

    #[test]
    fn validate_pet_matches_span() {
        assert!(ex("a", "He <Passed  Away>", "passed away", Label::One).validate().is_ok());
        assert!(ex("a", "He <died>", "passed away", Label::One).validate().is_err());
        assert!(ex("", "<x>", "x", Label::One).validate().is_err());
    }

    #[test]
    fn stats_single_and_empty() {
        let c = Corpus::new(vec![ex("a", "<x>", "x", Label::One)]).unwrap();
        let s = c.stats();
        assert_eq!(
            (s.total, s.euph, s.non_euph, s.total_pets, s.always_euph_pets, s.ambiguous_pets),
            (1, 1, 0, 1, 1, 0)
        );
        assert_eq!(Corpus::default().stats(), CorpusStats::default());
    }

    #[test]
    fn stats_flags_non_euph_only_pets() {
        let c = Corpus::new(vec![
            ex("a", "<x>", "x", Label::Zero),
            ex("b", "<y>", "y", Label::One),
            ex("c", "<Y>", "y", Label::Zero),
        ])
        .unwrap();
        let s = c.stats();
        assert_eq!(s.total_pets, 1);
        assert_eq!(s.ambiguous_pets, 1);
        assert_eq!(s.non_euph_only_pets, 1);
    }

    #[test]
    fn duplicate_id_rejected_by_constructor() {
        let r = Corpus::new(vec![ex("a", "<x>", "x", Label::One), ex("a", "<y>", "y", Label::One)]);
        assert!(matches!(r, Err(Error::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn load_collects_rejections_with_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"1","language":"en","text":"a <b> c","pet":"b","euph_label":1}}"#).unwrap();
        writeln!(f, r#"{{"id":"2","language":"en","text":"no markers","pet":"b","euph_label":0}}"#).unwrap();
        writeln!(f, r#"{{"id":"1","language":"en","text":"<b>","pet":"b","euph_label":0}}"#).unwrap();
        writeln!(f, r#"{{"id":"3","language":"en","text":"<b>","pet":"b","euph_label":2}}"#).unwrap();
        writeln!(f).unwrap();
        let loaded = load_corpus(f.path(), &Format::Jsonl).unwrap();
        assert_eq!(loaded.corpus.len(), 1);
        let lines: Vec<_> = loaded.rejected.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 4]);
        assert!(loaded.rejected[0].reason.contains("marker"));
        assert!(loaded.rejected[1].reason.contains("duplicate"));
        assert!(loaded.rejected[2].reason.contains("label"));
        assert!(loaded.strict().is_err());
    }

    #[test]
    fn load_empty_file() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let c = load_corpus(f.path(), &Format::Jsonl).unwrap().strict().unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn load_missing_file_is_error() {
        assert!(matches!(
            load_corpus("/nonexistent/corpus.jsonl", &Format::Jsonl),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn load_csv_with_column_map() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "key,sentence,term,is_euph,País").unwrap();
        writeln!(f, "e1,Va a <dar a luz> pronto,dar a luz,1,México").unwrap();
        writeln!(f, "e2,Sin marcas,dar a luz,0,España").unwrap();
        let cols = CsvColumns {
            id: "key".into(),
            text: "sentence".into(),
            pet: "term".into(),
            euph_label: "is_euph".into(),
            country: Some("País".into()),
            default_language: Some("es".into()),
            ..CsvColumns::default()
        };
        let loaded = load_corpus(f.path(), &Format::Csv(cols)).unwrap();
        assert_eq!(loaded.corpus.len(), 1);
        assert_eq!(loaded.rejected.len(), 1);
        let e = &loaded.corpus.examples()[0];
        assert_eq!(e.language, "es");
        assert_eq!(e.country.as_deref(), Some("México"));
    }

    #[test]
    fn jsonl_omits_absent_optionals() {
        let e = ex("a", "<x>", "x", Label::One);
        let json = serde_json::to_string(&e).unwrap();
        assert!(!json.contains("vague_label"));
        assert!(!json.contains("country"));
        assert!(!json.contains("null"));
    }

    #[test]
    fn load_preserves_yoruba_diacritics() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let text = "Ó ti <re ìwà\u{0300}> lọ";
        let line = serde_json::json!({
            "id": "y1", "language": "yo", "text": text, "pet": "re ìwà\u{0300}", "euph_label": 1
        });
        writeln!(f, "{line}").unwrap();
        let c = load_corpus(f.path(), &Format::Jsonl).unwrap().strict().unwrap();
        let e = &c.examples()[0];
        assert_eq!(e.text, text::nfc(text));
        assert!(e.text.contains('ọ'));
        assert_eq!(e.pet_key(), text::nfc("re ìwà\u{0300}"));
    }
}
