//! Secondary preprocessing: tokenization, stop-word removal, dictionary
//! lemmatization and construction of the Document-Set.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::Bucket;
use crate::corpus::{DocId, UserId};
use crate::resources;

#[derive(Debug, thiserror::Error)]
pub enum LexError {
    #[error("stop list {0} is missing")]
    MissingStopList(String),
    #[error("lemma dictionary {0} is missing")]
    MissingLemmaDictionary(String),
    #[error("lemma dictionary line {line}: {reason}")]
    BadLemmaLine { line: usize, reason: String },
}

/// Maximal runs of `[a-z0-9]`; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit()))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    words: HashSet<String>,
}

impl StopList {
    pub fn parse(text: &str) -> Self {
        StopList {
            words: resources::word_list(text).into_iter().collect(),
        }
    }

    pub fn builtin() -> Self {
        Self::parse(resources::STOP_WORDS)
    }

    pub fn load(path: &Path) -> Result<Self, LexError> {
        std::fs::read_to_string(path)
            .map(|t| Self::parse(&t))
            .map_err(|_| LexError::MissingStopList(path.display().to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub fn remove_stop_words(tokens: &[String], stop_list: &StopList) -> Vec<String> {
    tokens.iter().filter(|t| !stop_list.contains(t)).cloned().collect()
}

/// Dictionary lemmatizer: an exception table for irregular forms, then
/// suffix rules whose output must be a known lemma.
#[derive(Debug, Clone, Default)]
pub struct Lemmatizer {
    lemmas: HashSet<String>,
    exceptions: HashMap<String, String>,
}

// (suffix, replacement) in the order they are tried; noun rules first.
const SUFFIX_RULES: [(&str, &str); 8] = [
    ("ies", "y"),
    ("es", ""),
    ("s", ""),
    ("ing", ""),
    ("ing", "e"),
    ("ied", "y"),
    ("ed", ""),
    ("ed", "e"),
];

impl Lemmatizer {
    /// Parses `form<TAB>lemma` lines. A line whose form equals its lemma (or
    /// a single-column line) declares a lemma; any other line is an exception.
    pub fn parse(text: &str) -> Result<Self, LexError> {
        let mut lemmas = HashSet::new();
        let mut exceptions = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t').map(|c| c.trim().to_lowercase());
            let form = cols.next().unwrap_or_default();
            let lemma = cols.next().unwrap_or_else(|| form.clone());
            if form.is_empty() || lemma.is_empty() {
                return Err(LexError::BadLemmaLine { line: i + 1, reason: "empty column".into() });
            }
            if form != lemma {
                exceptions.insert(form, lemma.clone());
            }
            lemmas.insert(lemma);
        }
        if let Some(form) = exceptions.keys().find(|f| lemmas.contains(*f)) {
            return Err(LexError::BadLemmaLine {
                line: 0,
                reason: format!("`{form}` is both a lemma and an irregular form"),
            });
        }
        Ok(Lemmatizer { lemmas, exceptions })
    }

    pub fn builtin() -> Self {
        Self::parse(resources::LEMMAS).expect("builtin lemma table is consistent")
    }

    pub fn load(path: &Path) -> Result<Self, LexError> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| LexError::MissingLemmaDictionary(path.display().to_string()))?;
        Self::parse(&text)
    }

    pub fn is_lemma(&self, word: &str) -> bool {
        self.lemmas.contains(word)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemmas.iter().map(String::as_str)
    }

    pub fn lemmatize(&self, token: &str) -> String {
        if let Some(l) = self.exceptions.get(token) {
            return l.clone();
        }
        if self.lemmas.contains(token) {
            return token.to_string();
        }
        for (suffix, repl) in SUFFIX_RULES {
            let Some(stem) = token.strip_suffix(suffix) else { continue };
            if stem.is_empty() {
                continue;
            }
            let cand = format!("{stem}{repl}");
            if self.lemmas.contains(&cand) {
                return cand;
            }
            // running -> runn -> run, stopped -> stopp -> stop
            if repl.is_empty() && (suffix == "ing" || suffix == "ed") {
                let b = stem.as_bytes();
                if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
                    let undoubled = &stem[..stem.len() - 1];
                    if self.lemmas.contains(undoubled) {
                        return undoubled.to_string();
                    }
                }
            }
        }
        token.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub doc_id: DocId,
    pub owner_id: UserId,
    pub dataset_no: u8,
    pub parent_doc_id: Option<DocId>,
    pub tokens: Vec<String>,
    pub flagged_non_english: bool,
}

impl TokenizedDoc {
    /// No tokens survived preprocessing; such documents never score.
    pub fn is_inert(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_scorable(&self) -> bool {
        !self.is_inert() && !self.flagged_non_english
    }
}

/// Input to [`build_document_set`]: cleaned text plus the metadata the later
/// stages need.
#[derive(Debug, Clone)]
pub struct SetInput<'a> {
    pub doc_id: &'a str,
    pub owner_id: &'a str,
    pub dataset_no: u8,
    pub parent_doc_id: Option<&'a str>,
    pub text: &'a str,
    pub flagged_non_english: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentSet {
    pub documents: Vec<TokenizedDoc>,
    pub owner_index: BTreeMap<UserId, Vec<DocId>>,
    /// Filled by bucket assignment.
    pub bucket_index: BTreeMap<Bucket, Vec<DocId>>,
    position: HashMap<DocId, usize>,
}

impl DocumentSet {
    pub fn from_documents(documents: Vec<TokenizedDoc>) -> Self {
        let mut owner_index: BTreeMap<UserId, Vec<DocId>> = BTreeMap::new();
        let mut position = HashMap::with_capacity(documents.len());
        for (i, d) in documents.iter().enumerate() {
            owner_index.entry(d.owner_id.clone()).or_default().push(d.doc_id.clone());
            position.insert(d.doc_id.clone(), i);
        }
        DocumentSet {
            documents,
            owner_index,
            bucket_index: BTreeMap::new(),
            position,
        }
    }

    pub fn get(&self, doc_id: &str) -> Option<&TokenizedDoc> {
        self.position.get(doc_id).map(|&i| &self.documents[i])
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn bucket(&self, bucket: Bucket) -> &[DocId] {
        self.bucket_index.get(&bucket).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn process_tokens(text: &str, stop_list: &StopList, lemmatizer: &Lemmatizer) -> Vec<String> {
    remove_stop_words(&tokenize(text), stop_list)
        .iter()
        .map(|t| lemmatizer.lemmatize(t))
        .collect()
}

/// Tokenizes, stop-filters and lemmatizes every document. Documents left
/// with no tokens are kept and report themselves as inert.
pub fn build_document_set(inputs: &[SetInput<'_>], stop_list: &StopList, lemmatizer: &Lemmatizer) -> DocumentSet {
    let docs = inputs
        .iter()
        .map(|d| TokenizedDoc {
            doc_id: d.doc_id.to_string(),
            owner_id: d.owner_id.to_string(),
            dataset_no: d.dataset_no,
            parent_doc_id: d.parent_doc_id.map(str::to_string),
            tokens: process_tokens(d.text, stop_list, lemmatizer),
            flagged_non_english: d.flagged_non_english,
        })
        .collect();
    DocumentSet::from_documents(docs)
}
