//! Vectors, cosine similarity, word-vector tables and sentence-embedder backends.
//!
//! Vector tables are read from a TSV file, one entry per line:
//! `token<TAB>c1 c2 … cD` with space-separated decimal components.
//! Keys are stored in normal form (see [`lookup_key`]), so lookups are
//! insensitive to Latin case and surrounding punctuation.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// Environment variable overriding the command of the `command` embedder backend.
pub const EMBEDDER_COMMAND_ENV: &str = "EUPHKIT_EMBEDDER_COMMAND";

/// A finite, non-empty real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidVector("dimension must be at least 1".into()));
        }
        if let Some(i) = components.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidVector(format!("component {i} is not finite")));
        }
        Ok(Vector(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Vector> {
        Vector::new(self.0.iter().map(|c| c * alpha).collect())
    }

    /// Component-wise mean of a non-empty set of equal-dimension vectors.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Vector>) -> Result<Vector> {
        let mut acc: Option<Vec<f64>> = None;
        let mut n = 0usize;
        for v in vectors {
            let sum = acc.get_or_insert_with(|| vec![0.0; v.dim()]);
            if sum.len() != v.dim() {
                return Err(Error::DimensionMismatch {
                    left: sum.len(),
                    right: v.dim(),
                });
            }
            sum.iter_mut().zip(&v.0).for_each(|(s, c)| *s += c);
            n += 1;
        }
        let sum = acc.ok_or_else(|| Error::InvalidVector("mean of no vectors".into()))?;
        Vector::new(sum.into_iter().map(|s| s / n as f64).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.0
    }
}

/// Cosine similarity, clamped to `[-1, 1]`. Zero-norm inputs are rejected.
pub fn cosine(u: &Vector, v: &Vector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.0.iter().zip(&v.0) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (uu * vv).sqrt()).clamp(-1.0, 1.0))
}

/// Normal form used for table keys: tokens normalized and re-joined by single spaces.
pub fn lookup_key(s: &str) -> String {
    text::tokenize(s).join(" ")
}

/// An immutable token → vector map with a shared dimension.
#[derive(Debug, Clone, Default)]
pub struct VectorTable {
    dim: usize,
    entries: Vec<(String, Vector)>,
    index: HashMap<String, usize>,
    shadowed: usize,
}

impl VectorTable {
    pub fn new(dim: usize) -> Self {
        VectorTable {
            dim,
            ..Default::default()
        }
    }

    pub fn from_entries<S: Into<String>>(entries: impl IntoIterator<Item = (S, Vector)>) -> Result<Self> {
        let mut table: Option<VectorTable> = None;
        for (token, v) in entries {
            let t = table.get_or_insert_with(|| VectorTable::new(v.dim()));
            t.insert(token.into(), v)?;
        }
        Ok(table.unwrap_or_default())
    }

    /// Adds an entry. Later entries whose normal form collides with an
    /// existing key are counted in [`VectorTable::shadowed`] and ignored.
    pub fn insert(&mut self, token: String, v: Vector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.dim(),
            });
        }
        let key = lookup_key(&token);
        if key.is_empty() {
            return Err(Error::InvalidVector(format!("token `{token}` normalizes to nothing")));
        }
        if self.index.contains_key(&key) {
            self.shadowed += 1;
            return Ok(());
        }
        self.index.insert(key.clone(), self.entries.len());
        self.entries.push((key, v));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of rows dropped because their normal form was already present.
    pub fn shadowed(&self) -> usize {
        self.shadowed
    }

    pub fn get(&self, token: &str) -> Option<&Vector> {
        self.index.get(&lookup_key(token)).map(|&i| &self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Vector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        for (token, v) in &self.entries {
            let comps: Vec<String> = v.0.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{token}\t{}", comps.join(" ")).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Word-vector lookup: `None` when the token is out of vocabulary.
pub fn embed_word<'a>(token: &str, table: &'a VectorTable) -> Option<&'a Vector> {
    table.get(token)
}

pub fn load_vector_table(path: impl AsRef<Path>) -> Result<VectorTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table: Option<VectorTable> = None;
    let mut raw_seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let (token, comps) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected `token<TAB>components`".into()))?;
        let comps = comps
            .split_whitespace()
            .map(|c| c.parse::<f64>().map_err(|_| parse_err(format!("non-numeric component `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        let v = Vector::new(comps).map_err(|e| parse_err(e.to_string()))?;
        let t = table.get_or_insert_with(|| VectorTable::new(v.dim()));
        if v.dim() != t.dim {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line: line_no,
                expected: t.dim,
                found: v.dim(),
            });
        }
        let token = text::nfc(token);
        if raw_seen.insert(token.clone(), line_no).is_some() {
            return Err(Error::DuplicateToken(token));
        }
        t.insert(token, v).map_err(|e| parse_err(e.to_string()))?;
    }
    Ok(table.unwrap_or_default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Sentence,
    Word,
}

/// Configuration of one embedding backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedderSpec {
    pub kind: EmbedderKind,
    pub backend_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<String>,
}

impl EmbedderSpec {
    pub fn file(kind: EmbedderKind, path: impl Into<String>) -> Self {
        EmbedderSpec {
            kind,
            backend_id: "file".into(),
            resource: Some(path.into()),
        }
    }
}

/// Maps a text to a vector.
pub trait SentenceEmbedder: Send + Sync {
    fn backend_id(&self) -> &str;

    /// Whether `embed` may be called from several threads at once.
    fn allows_concurrent_calls(&self) -> bool {
        true
    }

    fn embed(&self, text: &str) -> Result<Vector>;
}

/// Table-backed embedder: whole-string lookup, falling back to the mean of
/// the vectors of the text's in-vocabulary tokens.
#[derive(Debug, Clone)]
pub struct FileEmbedder {
    table: Arc<VectorTable>,
}

impl FileEmbedder {
    pub fn new(table: Arc<VectorTable>) -> Self {
        FileEmbedder { table }
    }

    pub fn table(&self) -> &VectorTable {
        &self.table
    }
}

impl SentenceEmbedder for FileEmbedder {
    fn backend_id(&self) -> &str {
        "file"
    }

    fn embed(&self, text: &str) -> Result<Vector> {
        let key = lookup_key(text);
        if key.is_empty() {
            return Err(Error::EmptyText);
        }
        if let Some(v) = self.table.get(&key) {
            return Ok(v.clone());
        }
        let hits: Vec<&Vector> = key.split(' ').filter_map(|t| self.table.get(t)).collect();
        if hits.is_empty() {
            return Err(Error::backend("file", format!("no vector for `{text}`")));
        }
        Vector::mean(hits)
    }
}

/// Embedder backed by a long-running external process.
///
/// Protocol: one text per line on the child's stdin (newlines inside the
/// text replaced by spaces), one JSON array of numbers per line on its
/// stdout. The command runs through `sh -c` and is started on first use.
pub struct CommandEmbedder {
    command: String,
    process: Mutex<Option<(Child, ChildStdin, BufReader<ChildStdout>)>>,
}

impl CommandEmbedder {
    pub fn new(command: impl Into<String>) -> Self {
        CommandEmbedder {
            command: command.into(),
            process: Mutex::new(None),
        }
    }

    fn spawn(&self) -> Result<(Child, ChildStdin, BufReader<ChildStdout>)> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::backend("command", format!("cannot start `{}`: {e}", self.command)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok((child, stdin, stdout))
    }
}

impl Drop for CommandEmbedder {
    fn drop(&mut self) {
        if let Ok(mut guard) = self.process.lock() {
            if let Some((mut child, stdin, _)) = guard.take() {
                drop(stdin);
                let _ = child.wait();
            }
        }
    }
}

impl SentenceEmbedder for CommandEmbedder {
    fn backend_id(&self) -> &str {
        "command"
    }

    fn allows_concurrent_calls(&self) -> bool {
        false
    }

    fn embed(&self, text: &str) -> Result<Vector> {
        let line = text.replace(['\n', '\r'], " ");
        if line.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        let err = |m: String| Error::backend("command", m);
        let mut guard = self.process.lock().map_err(|_| err("poisoned lock".into()))?;
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let (_, stdin, stdout) = guard.as_mut().unwrap();
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| err(format!("write failed: {e}")))?;
        let mut reply = String::new();
        let n = stdout
            .read_line(&mut reply)
            .map_err(|e| err(format!("read failed: {e}")))?;
        if n == 0 {
            *guard = None;
            return Err(err("process closed its output".into()));
        }
        let comps: Vec<f64> =
            serde_json::from_str(reply.trim()).map_err(|e| err(format!("bad reply `{}`: {e}", reply.trim())))?;
        Vector::new(comps)
    }
}

type Factory = Box<dyn Fn(&EmbedderSpec) -> Result<Arc<dyn SentenceEmbedder>> + Send + Sync>;

/// Registered embedder backends, keyed by `backend_id`. Backends are built
/// on first request and cached per spec.
pub struct EmbedderRegistry {
    factories: HashMap<String, Factory>,
    cache: Mutex<HashMap<String, Arc<dyn SentenceEmbedder>>>,
}

impl Default for EmbedderRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl fmt::Debug for EmbedderRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut ids: Vec<_> = self.factories.keys().collect();
        ids.sort();
        f.debug_struct("EmbedderRegistry").field("backends", &ids).finish()
    }
}

impl EmbedderRegistry {
    pub fn empty() -> Self {
        EmbedderRegistry {
            factories: HashMap::new(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Registry with the `file` and `command` backends.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("file", |spec| {
            let path = spec
                .resource
                .as_deref()
                .ok_or_else(|| Error::backend("file", "missing resource path"))?;
            let table = load_vector_table(PathBuf::from(path))?;
            Ok(Arc::new(FileEmbedder::new(Arc::new(table))) as Arc<dyn SentenceEmbedder>)
        });
        r.register("command", |spec| {
            let command = std::env::var(EMBEDDER_COMMAND_ENV)
                .ok()
                .or_else(|| spec.resource.clone())
                .ok_or_else(|| Error::backend("command", "no command configured"))?;
            Ok(Arc::new(CommandEmbedder::new(command)) as Arc<dyn SentenceEmbedder>)
        });
        r
    }

    pub fn register<F>(&mut self, backend_id: &str, factory: F)
    where
        F: Fn(&EmbedderSpec) -> Result<Arc<dyn SentenceEmbedder>> + Send + Sync + 'static,
    {
        self.factories.insert(backend_id.to_string(), Box::new(factory));
    }

    pub fn build(&self, spec: &EmbedderSpec) -> Result<Arc<dyn SentenceEmbedder>> {
        let key = serde_json::to_string(spec)?;
        if let Some(e) = self.cache.lock().expect("registry cache").get(&key) {
            return Ok(e.clone());
        }
        let factory = self
            .factories
            .get(&spec.backend_id)
            .ok_or_else(|| Error::backend(&spec.backend_id, "backend not registered"))?;
        let built = factory(spec)?;
        self.cache.lock().expect("registry cache").insert(key, built.clone());
        Ok(built)
    }

    /// Loads the word-vector table behind a `file` word spec.
    pub fn word_table(&self, spec: &EmbedderSpec) -> Result<VectorTable> {
        if spec.kind != EmbedderKind::Word || spec.backend_id != "file" {
            return Err(Error::backend(
                &spec.backend_id,
                "word vectors require a `file` backend of kind `word`",
            ));
        }
        let path = spec
            .resource
            .as_deref()
            .ok_or_else(|| Error::backend("file", "missing resource path"))?;
        load_vector_table(path)
    }
}

/// Embeds `text` with the backend described by `spec`.
pub fn embed_sentence(text: &str, spec: &EmbedderSpec, registry: &EmbedderRegistry) -> Result<Vector> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    registry.build(spec)?.embed(text)
}

/// Process-wide default registry.
pub fn default_registry() -> &'static EmbedderRegistry {
    static REGISTRY: OnceLock<EmbedderRegistry> = OnceLock::new();
    REGISTRY.get_or_init(EmbedderRegistry::with_defaults)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(cosine(&v(&[2.0, 4.0]), &v(&[1.0, 2.0])).unwrap(), 1.0);
        let c = cosine(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::ZeroNorm)));
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![f64::NAN]).is_err());
    }

    fn nonzero_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..12).prop_flat_map(|d| {
            (
                prop::collection::vec(-100.0f64..100.0, d),
                prop::collection::vec(-100.0f64..100.0, d),
            )
        })
        .prop_filter("nonzero", |(a, b)| {
            a.iter().any(|x| x.abs() > 1e-6) && b.iter().any(|x| x.abs() > 1e-6)
        })
    }

    proptest! {
        #[test]
        fn cosine_symmetric_bounded_scale_invariant((a, b) in nonzero_pair(), alpha in 0.001f64..1000.0) {
            let (u, w) = (v(&a), v(&b));
            let c = cosine(&u, &w).unwrap();
            prop_assert!((c - cosine(&w, &u).unwrap()).abs() <= 1e-12);
            prop_assert!(c.abs() <= 1.0 + 1e-12);
            let scaled = cosine(&u.scaled(alpha).unwrap(), &w).unwrap();
            prop_assert!((scaled - c).abs() <= 1e-9);
        }
    }

    fn tsv(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn load_table_and_lookup() {
        let f = tsv(&["death\t1 0", "Kill\t0.8 0.6", "party\t0 1"]);
        let t = load_vector_table(f.path()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dim(), 2);
        assert_eq!(embed_word("death", &t), Some(&v(&[1.0, 0.0])));
        assert_eq!(embed_word("DEATH", &t), Some(&v(&[1.0, 0.0])));
        assert_eq!(embed_word("kill", &t), Some(&v(&[0.8, 0.6])));
        assert_eq!(embed_word("death.", &t), Some(&v(&[1.0, 0.0])));
        assert_eq!(embed_word("funeral", &t), None);
    }

    #[test]
    fn load_table_errors() {
        let f = tsv(&["a\t1 0", "b\t1 0 0"]);
        assert!(matches!(
            load_vector_table(f.path()),
            Err(Error::RaggedRow { line: 2, expected: 2, found: 3, .. })
        ));
        let f = tsv(&["a\t1 0", "a\t0 1"]);
        assert!(matches!(load_vector_table(f.path()), Err(Error::DuplicateToken(t)) if t == "a"));
        let f = tsv(&["a\t1 x"]);
        assert!(matches!(load_vector_table(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn case_variants_keep_first_row() {
        let f = tsv(&["Death\t1 0", "death\t0 1"]);
        let t = load_vector_table(f.path()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.shadowed(), 1);
        assert_eq!(t.get("death"), Some(&v(&[1.0, 0.0])));
    }

    #[test]
    fn file_embedder_lookup_and_determinism() {
        let f = tsv(&["died\t1 0", "passed away\t0.5 0.5", "dead\t0 1"]);
        let spec = EmbedderSpec::file(EmbedderKind::Sentence, f.path().to_str().unwrap());
        let reg = EmbedderRegistry::with_defaults();
        let a = embed_sentence("died", &spec, &reg).unwrap();
        assert_eq!(a, v(&[1.0, 0.0]));
        let b = embed_sentence("died", &spec, &reg).unwrap();
        assert_eq!(
            a.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(embed_sentence("Passed away", &spec, &reg).unwrap(), v(&[0.5, 0.5]));
        // token-mean fallback
        assert_eq!(embed_sentence("died dead", &spec, &reg).unwrap(), v(&[0.5, 0.5]));
        assert!(matches!(embed_sentence("  ", &spec, &reg), Err(Error::EmptyText)));
        assert!(embed_sentence("unknown words", &spec, &reg).is_err());
    }

    #[test]
    fn unregistered_backend_is_error() {
        let spec = EmbedderSpec {
            kind: EmbedderKind::Sentence,
            backend_id: "sbert-remote".into(),
            resource: None,
        };
        let err = embed_sentence("died", &spec, &EmbedderRegistry::with_defaults()).unwrap_err();
        assert!(matches!(err, Error::Backend { backend, .. } if backend == "sbert-remote"));
    }

    #[cfg(unix)]
    #[test]
    fn command_embedder_protocol() {
        let e = CommandEmbedder::new(r#"while read l; do echo "[${#l}, 1]"; done"#);
        assert!(!e.allows_concurrent_calls());
        assert_eq!(e.embed("abc").unwrap(), v(&[3.0, 1.0]));
        assert_eq!(e.embed("hello").unwrap(), v(&[5.0, 1.0]));
        let bad = CommandEmbedder::new("echo nope");
        assert!(bad.embed("x").is_err());
    }
}
