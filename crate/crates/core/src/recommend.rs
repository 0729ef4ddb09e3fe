//! Recommendation index of member documents against the ego's documents in
//! one bucket, and the member ranking built from it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::Bucket;
use crate::corpus::{is_ego_dataset, DocId, UserId};
use crate::lexproc::DocumentSet;
use crate::simdex::{pair_distance, sparse_dot, SimError, SimilarityModels, WordVectorStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Ego,
    Members,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Ego => "ego",
            Side::Members => "members",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecommendError {
    #[error("bucket {bucket} has no {side} documents")]
    EmptyBucket { bucket: Bucket, side: Side },
    #[error("document {0} has no tokens")]
    InertDocument(DocId),
    #[error("document {0} is not in the similarity models")]
    UnknownDocument(DocId),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How the pair scores of one document pair are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Plain sum over all word pairs.
    #[default]
    Raw,
    /// Sum divided by the number of scored pairs.
    Mean,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::Mean => "mean",
        })
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Normalization::Raw),
            "mean" => Ok(Normalization::Mean),
            _ => Err(format!("normalization must be `raw` or `mean`, not `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub word_mu: String,
    pub word_tau: String,
    pub n_value: f64,
}

/// `(count_mu + count_tau) / distance` for one word pair; `None` when either
/// word has no usable vector.
pub fn pair_score(
    w_mu: &str,
    count_mu: u32,
    w_tau: &str,
    count_tau: u32,
    vectors: &WordVectorStore,
) -> Option<PairScore> {
    let d = pair_distance(vectors.get(w_mu)?, vectors.get(w_tau)?).ok()?;
    Some(PairScore {
        word_mu: w_mu.to_string(),
        word_tau: w_tau.to_string(),
        n_value: (count_mu + count_tau) as f64 / d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub target_doc_id: DocId,
    pub target_owner_id: UserId,
    pub key_doc_id: DocId,
    pub sum_n: f64,
    pub ti_cs: f64,
    pub r_plus: f64,
    /// Word pairs that contributed to `sum_n`.
    pub pairs: usize,
}

fn nonempty_position(models: &SimilarityModels, doc_id: &str) -> Result<usize, RecommendError> {
    let i = models
        .bow
        .position(doc_id)
        .ok_or_else(|| RecommendError::UnknownDocument(doc_id.to_string()))?;
    if models.bow.row_at(i).is_empty() {
        return Err(RecommendError::InertDocument(doc_id.to_string()));
    }
    Ok(i)
}

/// Scores a target document against one key document of the ego.
pub fn document_index(
    key_doc: &str,
    target_doc: &str,
    models: &SimilarityModels,
    normalization: Normalization,
) -> Result<DocumentScore, RecommendError> {
    let k = nonempty_position(models, key_doc)?;
    let t = nonempty_position(models, target_doc)?;
    let (sum_n, pairs) = pair_sum(models, k, t);
    let sum_n = match normalization {
        Normalization::Raw => sum_n,
        Normalization::Mean if pairs > 0 => sum_n / pairs as f64,
        Normalization::Mean => 0.0,
    };
    let ti_cs = sparse_dot(models.tfidf.normalized_at(k), models.tfidf.normalized_at(t)).clamp(0.0, 1.0);
    Ok(DocumentScore {
        target_doc_id: target_doc.to_string(),
        target_owner_id: String::new(),
        key_doc_id: key_doc.to_string(),
        sum_n,
        ti_cs,
        r_plus: sum_n * ti_cs,
        pairs,
    })
}

/// Sum over the full cross product of the two rows, in term-id order.
fn pair_sum(models: &SimilarityModels, k: usize, t: usize) -> (f64, usize) {
    let key: Vec<(usize, u32)> = models
        .bow
        .row_at(k)
        .iter()
        .filter_map(|&(term, c)| models.term_row(term).map(|r| (r, c)))
        .collect();
    let mut sum = 0.0;
    let mut pairs = 0;
    for &(term_t, c_t) in models.bow.row_at(t) {
        let Some(r_t) = models.term_row(term_t) else { continue };
        for &(r_k, c_k) in &key {
            let Ok(d) = models.vectors.row_distance(r_k, r_t) else { continue };
            sum += (c_k + c_t) as f64 / d;
            pairs += 1;
        }
    }
    (sum, pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub normalization: Normalization,
    pub parallel: bool,
}

fn by_score_desc(a: f64, b: f64, a_id: &str, b_id: &str) -> Ordering {
    b.total_cmp(&a).then_with(|| a_id.cmp(b_id))
}

/// Scores every member document in the bucket by its best ego key document.
/// Output is sorted by `r_plus` descending, ties by target id.
pub fn score_bucket(
    set: &DocumentSet,
    bucket: Bucket,
    models: &SimilarityModels,
    config: &ScoreConfig,
) -> Result<Vec<DocumentScore>, RecommendError> {
    let mut keys = Vec::new();
    let mut targets = Vec::new();
    for id in set.bucket(bucket) {
        let Some(d) = set.get(id) else { continue };
        if is_ego_dataset(d.dataset_no) {
            keys.push(d);
        } else {
            targets.push(d);
        }
    }
    if keys.is_empty() {
        return Err(RecommendError::EmptyBucket { bucket, side: Side::Ego });
    }
    if targets.is_empty() {
        return Err(RecommendError::EmptyBucket { bucket, side: Side::Members });
    }
    keys.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    let best = |target: &&crate::lexproc::TokenizedDoc| -> Result<DocumentScore, RecommendError> {
        let mut best: Option<DocumentScore> = None;
        for key in &keys {
            let s = document_index(&key.doc_id, &target.doc_id, models, config.normalization)?;
            if best.as_ref().is_none_or(|b| s.r_plus > b.r_plus) {
                best = Some(s);
            }
        }
        let mut s = best.expect("at least one key document");
        s.target_owner_id = target.owner_id.clone();
        Ok(s)
    };
    let mut scores: Vec<DocumentScore> = if config.parallel {
        targets.par_iter().map(best).collect::<Result<_, _>>()?
    } else {
        targets.iter().map(best).collect::<Result<_, _>>()?
    };
    scores.sort_by(|a, b| by_score_desc(a.r_plus, b.r_plus, &a.target_doc_id, &b.target_doc_id));
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub member_id: UserId,
    pub member_score: f64,
    pub best_doc_id: DocId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRanking {
    pub bucket: Bucket,
    pub entries: Vec<RankEntry>,
}

impl MemberRanking {
    pub fn empty(bucket: Bucket) -> Self {
        MemberRanking { bucket, entries: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.member_id.as_str())
    }

    /// Keeps only the entries `keep` accepts and renumbers the ranks.
    pub fn retain(&mut self, mut keep: impl FnMut(&RankEntry) -> bool) {
        self.entries.retain(|e| keep(e));
        for (i, e) in self.entries.iter_mut().enumerate() {
            e.rank = i + 1;
        }
    }
}

/// A member's score is the best score among their documents. Members with
/// no scored document do not appear.
pub fn rank_members(bucket: Bucket, scores: &[DocumentScore]) -> MemberRanking {
    let mut best: BTreeMap<&str, (f64, &str)> = BTreeMap::new();
    for s in scores {
        let e = best
            .entry(s.target_owner_id.as_str())
            .or_insert((s.r_plus, s.target_doc_id.as_str()));
        if by_score_desc(s.r_plus, e.0, &s.target_doc_id, e.1) == Ordering::Less {
            *e = (s.r_plus, s.target_doc_id.as_str());
        }
    }
    let mut entries: Vec<RankEntry> = best
        .into_iter()
        .map(|(m, (score, doc))| RankEntry {
            rank: 0,
            member_id: m.to_string(),
            member_score: score,
            best_doc_id: doc.to_string(),
        })
        .collect();
    entries.sort_by(|a, b| by_score_desc(a.member_score, b.member_score, &a.member_id, &b.member_id));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    MemberRanking { bucket, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{Category, Polarity};
    use crate::lexproc::TokenizedDoc;

    fn bucket() -> Bucket {
        Bucket::new(Category::Politics, Polarity::Positive)
    }

    fn doc(id: &str, owner: &str, dataset_no: u8, text: &str) -> TokenizedDoc {
        TokenizedDoc {
            doc_id: id.into(),
            owner_id: owner.into(),
            dataset_no,
            parent_doc_id: None,
            tokens: text.split_whitespace().map(str::to_string).collect(),
            flagged_non_english: false,
        }
    }

    fn bucketed(docs: Vec<TokenizedDoc>) -> DocumentSet {
        let mut set = DocumentSet::from_documents(docs);
        let ids = set.documents.iter().filter(|d| d.is_scorable()).map(|d| d.doc_id.clone()).collect();
        set.bucket_index.insert(bucket(), ids);
        set
    }

    fn store(rows: &[(&str, &[f64])]) -> WordVectorStore {
        let mut s = WordVectorStore::new(rows[0].1.len());
        for (w, v) in rows {
            s.insert(*w, v).unwrap();
        }
        s
    }

    #[test]
    fn pair_score_examples() {
        let vs = store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[1.0, 1.0])]);
        // distance(a, c) = 1 - 1/sqrt 2; use a 0.5-distance pair via explicit vectors
        let half = store(&[("x", &[1.0, 0.0]), ("y", &[0.5, 0.75f64.sqrt()])]);
        let p = pair_score("x", 2, "y", 3, &half).unwrap();
        assert!((p.n_value - 10.0).abs() < 1e-9);
        let same = pair_score("a", 1, "a", 1, &vs).unwrap();
        assert!((same.n_value - 2_000_000.0).abs() < 1e-6);
        assert!(pair_score("a", 1, "zz", 1, &vs).is_none());
    }

    #[test]
    fn single_pair_hand_trace() {
        let set = bucketed(vec![doc("k", "ego", 1, "a"), doc("t", "m1", 6, "a")]);
        let models = SimilarityModels::build(&set, store(&[("a", &[1.0, 2.0])])).unwrap();
        let s = document_index("k", "t", &models, Normalization::Raw).unwrap();
        assert!((s.sum_n - 2.0 / 1e-6).abs() < 1e-6);
        assert!((s.ti_cs - 1.0).abs() < 1e-12);
        assert_eq!(s.r_plus, s.sum_n * s.ti_cs);
    }

    #[test]
    fn disjoint_docs_score_zero() {
        let set = bucketed(vec![doc("k", "ego", 1, "a"), doc("t", "m1", 6, "b")]);
        let models = SimilarityModels::build(&set, store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])])).unwrap();
        let s = document_index("k", "t", &models, Normalization::Raw).unwrap();
        assert_eq!(s.ti_cs, 0.0);
        assert_eq!(s.r_plus, 0.0);
        assert!(s.sum_n > 0.0);
    }

    #[test]
    fn cross_product_counts_pairs_and_skips_oov() {
        let set = bucketed(vec![doc("k", "ego", 1, "a b c"), doc("t", "m1", 6, "a b d e")]);
        let vs = store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[1.0, 1.0]), ("d", &[1.0, -1.0])]);
        let models = SimilarityModels::build(&set, vs).unwrap();
        let raw = document_index("k", "t", &models, Normalization::Raw).unwrap();
        // "e" has no vector: 3 x 3 pairs remain
        assert_eq!(raw.pairs, 9);
        let mean = document_index("k", "t", &models, Normalization::Mean).unwrap();
        assert!((mean.sum_n - raw.sum_n / 9.0).abs() < 1e-9 * raw.sum_n);
    }

    #[test]
    fn inert_documents_rejected() {
        let set = bucketed(vec![doc("k", "ego", 1, "a"), doc("t", "m1", 6, "")]);
        let models = SimilarityModels::build(&set, store(&[("a", &[1.0])])).unwrap();
        assert!(matches!(
            document_index("k", "t", &models, Normalization::Raw),
            Err(RecommendError::InertDocument(_))
        ));
    }

    #[test]
    fn bucket_scoring_takes_best_key() {
        let set = bucketed(vec![
            doc("k1", "ego", 1, "x"),
            doc("k2", "ego", 1, "a b"),
            doc("t1", "m1", 6, "a b"),
            doc("t2", "m2", 6, "a"),
            doc("t3", "m2", 6, "b z"),
        ]);
        let vs = store(&[("a", &[1.0, 0.2]), ("b", &[0.1, 1.0]), ("x", &[-1.0, 0.3]), ("z", &[0.4, 0.4])]);
        let models = SimilarityModels::build(&set, vs).unwrap();
        let scores = score_bucket(&set, bucket(), &models, &ScoreConfig::default()).unwrap();
        assert_eq!(scores.len(), 3);
        for s in &scores {
            assert_eq!(s.key_doc_id, "k2");
            let other = document_index("k1", &s.target_doc_id, &models, Normalization::Raw).unwrap();
            assert!(s.r_plus >= other.r_plus);
        }
        let par = score_bucket(&set, bucket(), &models, &ScoreConfig { parallel: true, ..Default::default() }).unwrap();
        assert_eq!(scores, par);
    }

    #[test]
    fn empty_sides() {
        let set = bucketed(vec![doc("t", "m1", 6, "a")]);
        let models = SimilarityModels::build(&set, store(&[("a", &[1.0])])).unwrap();
        assert!(matches!(
            score_bucket(&set, bucket(), &models, &ScoreConfig::default()),
            Err(RecommendError::EmptyBucket { side: Side::Ego, .. })
        ));
        let set = bucketed(vec![doc("k", "ego", 2, "a")]);
        let models = SimilarityModels::build(&set, store(&[("a", &[1.0])])).unwrap();
        assert!(matches!(
            score_bucket(&set, bucket(), &models, &ScoreConfig::default()),
            Err(RecommendError::EmptyBucket { side: Side::Members, .. })
        ));
    }

    fn score(owner: &str, doc: &str, r: f64) -> DocumentScore {
        DocumentScore {
            target_doc_id: doc.into(),
            target_owner_id: owner.into(),
            key_doc_id: "k".into(),
            sum_n: r,
            ti_cs: 1.0,
            r_plus: r,
            pairs: 1,
        }
    }

    #[test]
    fn ranking_uses_member_max() {
        let r = rank_members(bucket(), &[score("B", "b1", 2.5), score("A", "a1", 3.0), score("A", "a2", 1.0)]);
        let got: Vec<_> = r.entries.iter().map(|e| (e.rank, e.member_id.as_str(), e.member_score, e.best_doc_id.as_str())).collect();
        assert_eq!(got, [(1, "A", 3.0, "a1"), (2, "B", 2.5, "b1")]);
    }

    #[test]
    fn ranking_ties_and_empty() {
        let r = rank_members(bucket(), &[score("B", "b1", 1.0), score("A", "a1", 1.0)]);
        assert_eq!(r.member_ids().collect::<Vec<_>>(), ["A", "B"]);
        assert!(rank_members(bucket(), &[]).is_empty());
    }
}
