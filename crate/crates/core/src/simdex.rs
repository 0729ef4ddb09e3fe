//! Similarity models over the Document-Set: a word-vector store, the
//! bag-of-words table, and tf-idf vectors with their lengths and cosine.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::corpus::DocId;
use crate::lexproc::DocumentSet;

/// Lower clamp on the cosine distance between two word vectors.
pub const DISTANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("embedding header: {0}")]
    BadHeader(String),
    #[error("embedding row {row}: expected {expected} components, found {found}")]
    DimMismatch { row: usize, expected: usize, found: usize },
    #[error("embedding row {row}: `{word}` listed twice")]
    DuplicateWord { row: usize, word: String },
    #[error("embedding row {row}: component `{value}` is not a finite number")]
    BadFloat { row: usize, value: String },
    #[error("vectors have different dimensions ({0} vs {1})")]
    VectorDimMismatch(usize, usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("no non-inert document to build tf-idf from")]
    EmptyCorpus,
    #[error("document {0} has no tokens")]
    InertDocument(DocId),
    #[error("document {0} is not in the model")]
    UnknownDocument(DocId),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Word embeddings in one flat buffer with cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorStore {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl WordVectorStore {
    pub fn new(dim: usize) -> Self {
        WordVectorStore {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<(), SimError> {
        let word = word.into();
        let row = self.words.len() + 1;
        if vector.len() != self.dim {
            return Err(SimError::DimMismatch { row, expected: self.dim, found: vector.len() });
        }
        if let Some(bad) = vector.iter().find(|x| !x.is_finite()) {
            return Err(SimError::BadFloat { row, value: bad.to_string() });
        }
        if self.index.contains_key(&word) {
            return Err(SimError::DuplicateWord { row, word });
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        self.norms.push(vector.iter().map(|x| x * x).sum::<f64>().sqrt());
        Ok(())
    }

    /// Text format: `vocab_size dim`, then `word v1 ... v_dim` per line.
    pub fn parse<R: Read>(reader: R) -> Result<Self, SimError> {
        let mut lines = BufReader::new(reader).lines();
        let io = |source| SimError::Io { path: "<embeddings>".into(), source };
        let header = match lines.next() {
            Some(l) => l.map_err(io)?,
            None => return Err(SimError::BadHeader("empty file".into())),
        };
        let nums: Vec<&str> = header.split_whitespace().collect();
        let parse_n = |s: &str| s.parse::<usize>().ok();
        let (vocab_size, dim) = match nums.as_slice() {
            [v, d] => match (parse_n(v), parse_n(d)) {
                (Some(v), Some(d)) if d > 0 => (v, d),
                _ => return Err(SimError::BadHeader(format!("`{header}`"))),
            },
            _ => return Err(SimError::BadHeader(format!("`{header}`"))),
        };
        let mut store = WordVectorStore::new(dim);
        let mut buf = Vec::with_capacity(dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let row = i + 1;
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            buf.clear();
            for p in parts {
                let x: f64 = p
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| SimError::BadFloat { row, value: p.to_string() })?;
                buf.push(x);
            }
            if buf.len() != dim {
                return Err(SimError::DimMismatch { row, expected: dim, found: buf.len() });
            }
            if store.index.contains_key(&word) {
                return Err(SimError::DuplicateWord { row, word });
            }
            store.insert(word, &buf)?;
        }
        if store.len() != vocab_size {
            return Err(SimError::BadHeader(format!(
                "header announces {vocab_size} words, file has {}",
                store.len()
            )));
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let f = std::fs::File::open(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(f)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            write!(w, "{word}")?;
            for x in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn row_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.row_of(word).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine distance between two stored rows, using cached norms.
    pub fn row_distance(&self, a: usize, b: usize) -> Result<f64, SimError> {
        let (na, nb) = (self.norms[a], self.norms[b]);
        if na == 0.0 || nb == 0.0 {
            return Err(SimError::ZeroVector);
        }
        let dot: f64 = self.row(a).iter().zip(self.row(b)).map(|(x, y)| x * y).sum();
        Ok(clamp_distance(1.0 - dot / (na * nb)))
    }
}

fn clamp_distance(d: f64) -> f64 {
    d.clamp(DISTANCE_FLOOR, 2.0)
}

/// Cosine distance `1 - cos(v1, v2)`, floored at [`DISTANCE_FLOOR`].
pub fn pair_distance(v1: &[f64], v2: &[f64]) -> Result<f64, SimError> {
    if v1.len() != v2.len() {
        return Err(SimError::VectorDimMismatch(v1.len(), v2.len()));
    }
    let n1 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n2 = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(SimError::ZeroVector);
    }
    let dot: f64 = v1.iter().zip(v2).map(|(a, b)| a * b).sum();
    Ok(clamp_distance(1.0 - dot / (n1 * n2)))
}

/// Sorted term list shared by the BoW and tf-idf models.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    fn from_terms(terms: BTreeSet<&str>) -> Self {
        let terms: Vec<String> = terms.into_iter().map(str::to_string).collect();
        let ids = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { terms, ids }
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Sparse `(term id, count)` row sorted by term id.
pub type BowRow = Vec<(u32, u32)>;

/// Bag-of-words counts for every non-flagged document of a Document-Set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoWTable {
    vocab: Vocabulary,
    doc_ids: Vec<DocId>,
    rows: Vec<BowRow>,
    position: HashMap<DocId, usize>,
}

impl BoWTable {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_ids(&self) -> &[DocId] {
        &self.doc_ids
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.position.get(doc_id).copied()
    }

    pub fn row(&self, doc_id: &str) -> Option<&[(u32, u32)]> {
        self.position(doc_id).map(|i| self.rows[i].as_slice())
    }

    pub fn row_at(&self, i: usize) -> &[(u32, u32)] {
        &self.rows[i]
    }

    pub fn count(&self, doc_id: &str, word: &str) -> u32 {
        let (Some(row), Some(id)) = (self.row(doc_id), self.vocab.id(word)) else {
            return 0;
        };
        row.binary_search_by_key(&id, |&(t, _)| t)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    /// The row as a word -> count map.
    pub fn counts(&self, doc_id: &str) -> Option<BTreeMap<&str, u32>> {
        self.row(doc_id)
            .map(|r| r.iter().map(|&(t, c)| (self.vocab.term(t), c)).collect())
    }

    pub fn row_total(&self, doc_id: &str) -> Option<u64> {
        self.row(doc_id).map(|r| r.iter().map(|&(_, c)| c as u64).sum())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Counts tokens per document. Documents flagged non-English get no row;
/// inert documents get an empty one.
pub fn build_bow(set: &DocumentSet) -> BoWTable {
    let docs: Vec<_> = set.documents.iter().filter(|d| !d.flagged_non_english).collect();
    let vocab = Vocabulary::from_terms(docs.iter().flat_map(|d| d.tokens.iter().map(String::as_str)).collect());
    let mut rows = Vec::with_capacity(docs.len());
    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut position = HashMap::with_capacity(docs.len());
    for d in docs {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for t in &d.tokens {
            *counts.entry(vocab.id(t).expect("token in vocabulary")).or_insert(0) += 1;
        }
        position.insert(d.doc_id.clone(), rows.len());
        doc_ids.push(d.doc_id.clone());
        rows.push(counts.into_iter().collect());
    }
    BoWTable { vocab, doc_ids, rows, position }
}

/// Sparse `(term id, weight)` vector sorted by term id.
pub type SparseVec = Vec<(u32, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    position: HashMap<DocId, usize>,
    raw: Vec<SparseVec>,
    normalized: Vec<SparseVec>,
    lengths: Vec<f64>,
    scored_docs: usize,
}

impl TfIdfModel {
    pub fn idf(&self, word: &str) -> Option<f64> {
        self.vocab.id(word).map(|i| self.idf[i as usize])
    }

    pub fn idf_by_id(&self, id: u32) -> f64 {
        self.idf[id as usize]
    }

    /// Number of non-inert documents the idf was computed over.
    pub fn document_count(&self) -> usize {
        self.scored_docs
    }

    /// L2 norm of the raw tf-idf vector; zero for inert documents.
    pub fn doc_length(&self, doc_id: &str) -> Option<f64> {
        self.position.get(doc_id).map(|&i| self.lengths[i])
    }

    pub fn raw_vector(&self, doc_id: &str) -> Option<&[(u32, f64)]> {
        self.position.get(doc_id).map(|&i| self.raw[i].as_slice())
    }

    pub fn normalized_vector(&self, doc_id: &str) -> Option<&[(u32, f64)]> {
        self.position.get(doc_id).map(|&i| self.normalized[i].as_slice())
    }

    /// Raw tf-idf weight of a word in a document.
    pub fn weight(&self, doc_id: &str, word: &str) -> f64 {
        let (Some(v), Some(id)) = (self.raw_vector(doc_id), self.vocab.id(word)) else {
            return 0.0;
        };
        v.binary_search_by_key(&id, |&(t, _)| t).map(|i| v[i].1).unwrap_or(0.0)
    }

    pub(crate) fn normalized_at(&self, i: usize) -> &[(u32, f64)] {
        &self.normalized[i]
    }
}

/// tf = raw count, idf = ln((1 + N) / (1 + df)) + 1 over the N non-inert
/// documents; stores raw vectors, their L2 lengths and unit vectors.
pub fn build_tfidf(bow: &BoWTable) -> Result<TfIdfModel, SimError> {
    let n = bow.rows.iter().filter(|r| !r.is_empty()).count();
    if n == 0 {
        return Err(SimError::EmptyCorpus);
    }
    let mut df = vec![0u64; bow.vocab.len()];
    for row in &bow.rows {
        for &(t, _) in row {
            df[t as usize] += 1;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    let mut raw = Vec::with_capacity(bow.rows.len());
    let mut normalized = Vec::with_capacity(bow.rows.len());
    let mut lengths = Vec::with_capacity(bow.rows.len());
    for row in &bow.rows {
        let v: SparseVec = row.iter().map(|&(t, c)| (t, c as f64 * idf[t as usize])).collect();
        let len = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        let unit = if len > 0.0 {
            v.iter().map(|&(t, x)| (t, x / len)).collect()
        } else {
            Vec::new()
        };
        raw.push(v);
        normalized.push(unit);
        lengths.push(len);
    }
    Ok(TfIdfModel {
        vocab: bow.vocab.clone(),
        idf,
        position: bow.position.clone(),
        raw,
        normalized,
        lengths,
        scored_docs: n,
    })
}

pub(crate) fn sparse_dot(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Cosine of two documents' tf-idf vectors, in [0, 1].
pub fn tfidf_cosine(doc_a: &str, doc_b: &str, model: &TfIdfModel) -> Result<f64, SimError> {
    let pos = |d: &str| {
        let &i = model.position.get(d).ok_or_else(|| SimError::UnknownDocument(d.to_string()))?;
        if model.lengths[i] == 0.0 {
            return Err(SimError::InertDocument(d.to_string()));
        }
        Ok(i)
    };
    let (a, b) = (pos(doc_a)?, pos(doc_b)?);
    Ok(sparse_dot(&model.normalized[a], &model.normalized[b]).clamp(0.0, 1.0))
}

/// The three models document scoring reads from, plus a term -> embedding
/// row map so lookups avoid hashing in the inner loop.
#[derive(Debug, Clone)]
pub struct SimilarityModels {
    pub vectors: WordVectorStore,
    pub bow: BoWTable,
    pub tfidf: TfIdfModel,
    term_rows: Vec<Option<usize>>,
}

impl SimilarityModels {
    pub fn build(set: &DocumentSet, vectors: WordVectorStore) -> Result<Self, SimError> {
        let bow = build_bow(set);
        let tfidf = build_tfidf(&bow)?;
        let term_rows = bow.vocab.terms.iter().map(|t| vectors.row_of(t)).collect();
        Ok(SimilarityModels { vectors, bow, tfidf, term_rows })
    }

    /// Embedding row of a vocabulary term, if the word has a vector.
    pub fn term_row(&self, term: u32) -> Option<usize> {
        self.term_rows[term as usize]
    }

    /// Words of the BoW vocabulary that have no embedding.
    pub fn out_of_vocabulary(&self) -> usize {
        self.term_rows.iter().filter(|r| r.is_none()).count()
    }
}
