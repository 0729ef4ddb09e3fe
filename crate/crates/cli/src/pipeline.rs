//! The stages behind the subcommands: ingestion into a normalized bundle,
//! analysis (tokens, labels, buckets, similarity models), ranking and target
//! selection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::{DateTime, Utc};
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use egorank_core::classify::{
    assign_buckets, classify_category, inherit_category, train_category_classifier, Bucket, Category,
    CategoryLabel, ClassifyError, NaiveBayes, SentimentAnalyzer, SentimentResult,
};
use egorank_core::corpus::{
    build_interaction_list, is_dependent_dataset, is_ego_dataset, load_activity_csv, load_members_csv, Corpus,
    DocId, InteractedMember, Platform, TimeWindow, UserId,
};
use egorank_core::lexproc::{process_tokens, DocumentSet, Lemmatizer, StopList, TokenizedDoc};
use egorank_core::recommend::{rank_members, score_bucket, DocumentScore, MemberRanking, RecommendError, ScoreConfig};
use egorank_core::resources;
use egorank_core::simdex::{SimilarityModels, WordVectorStore};
use egorank_core::targets::{top_most, TargetConfig, TargetError, TargetSelection};
use egorank_core::textprep::{lowercase, primary_preprocess, strip_noise, PrepConfig, SpellDictionary};

use crate::config::PipelineConfig;
use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub doc_id: DocId,
    pub owner_id: UserId,
    pub dataset_no: u8,
    pub parent_doc_id: Option<DocId>,
    pub time: DateTime<Utc>,
    /// Text after primary preprocessing.
    pub text: String,
    pub mentions: Vec<String>,
    pub flagged_non_english: bool,
}

/// The normalized corpus written by `ingest` and read by later stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub tool_version: String,
    pub config_hash: String,
    pub platform: Platform,
    pub ego_id: UserId,
    pub window: TimeWindow,
    pub documents: Vec<BundleDoc>,
    pub members: Vec<InteractedMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub tool_version: String,
    pub config_hash: String,
    /// Rows kept per dataset; dataset 5 counts member rows.
    pub dataset_counts: BTreeMap<u8, usize>,
    pub documents: usize,
    pub flagged_non_english: usize,
    pub distinct_mentions: usize,
    pub mentions_merged: usize,
    pub members: usize,
    pub warnings: Vec<String>,
}

fn load_corpus(cfg: &PipelineConfig) -> Result<Corpus, CliError> {
    let window = cfg.window();
    let mut corpus = Corpus::new(cfg.platform, cfg.ego_id.clone(), window);
    for n in 1..=9u8 {
        let path = cfg.dataset_path(n);
        if !path.is_file() {
            return Err(CliError::MissingDataset(n));
        }
        if n == 5 {
            corpus.members = load_members_csv(&path).map_err(CliError::data)?;
            continue;
        }
        let owner = is_ego_dataset(n).then_some(cfg.ego_id.as_str());
        let docs = load_activity_csv(&path, n, owner, &window).map_err(CliError::data)?;
        corpus.datasets.insert(n, docs);
    }
    Ok(corpus)
}

/// Loads the nine datasets and runs primary preprocessing.
pub fn ingest(cfg: &PipelineConfig) -> Result<(Bundle, IngestReport), CliError> {
    let corpus = load_corpus(cfg)?;
    let dictionary = match &cfg.dictionary {
        Some(p) => Some(SpellDictionary::load(p).map_err(|e| CliError::Config(e.to_string()))?),
        None => None,
    };
    let prep = PrepConfig { translator: None, dictionary: dictionary.as_ref() };
    let docs: Vec<_> = corpus.documents().collect();
    let clean = |d: &&egorank_core::corpus::Document| {
        primary_preprocess(d, &prep).map(|c| BundleDoc {
            doc_id: c.doc_id,
            owner_id: c.owner_id,
            dataset_no: d.dataset_no,
            parent_doc_id: d.parent_doc_id.clone(),
            time: d.time,
            text: c.text,
            mentions: c.mentions,
            flagged_non_english: c.flagged_non_english,
        })
    };
    let documents: Vec<BundleDoc> = if cfg.parallel {
        docs.par_iter().map(clean).collect::<Result<_, _>>()
    } else {
        docs.iter().map(clean).collect::<Result<_, _>>()
    }
    .map_err(CliError::data)?;

    let mut seen = BTreeSet::new();
    let mut mentions = Vec::new();
    for d in documents.iter().filter(|d| is_ego_dataset(d.dataset_no)) {
        for m in &d.mentions {
            if seen.insert(m.clone()) {
                mentions.push(m.clone());
            }
        }
    }
    let list = build_interaction_list(&corpus, &mentions);
    let mut warnings = list.warnings.clone();
    let bad = corpus.validate();
    if !bad.is_empty() {
        warnings.push(format!(
            "{} documents break ownership rules, e.g. {}",
            bad.len(),
            bad[0]
        ));
    }
    for w in &warnings {
        warn!("{w}");
    }
    let mut dataset_counts: BTreeMap<u8, usize> = corpus.datasets.iter().map(|(n, d)| (*n, d.len())).collect();
    dataset_counts.insert(5, corpus.members.len());
    let hash = cfg.hash();
    let report = IngestReport {
        tool_version: TOOL_VERSION.into(),
        config_hash: hash.clone(),
        dataset_counts,
        documents: documents.len(),
        flagged_non_english: documents.iter().filter(|d| d.flagged_non_english).count(),
        distinct_mentions: mentions.len(),
        mentions_merged: list.added_from_mentions,
        members: list.members.len(),
        warnings,
    };
    let bundle = Bundle {
        tool_version: TOOL_VERSION.into(),
        config_hash: hash,
        platform: corpus.platform,
        ego_id: corpus.ego_id,
        window: corpus.window,
        documents,
        members: list.members,
    };
    Ok((bundle, report))
}

/// Lexical resources and models shared by the analysis stages.
pub struct Resources {
    pub stop_list: StopList,
    pub lemmatizer: Lemmatizer,
    pub sentiment: SentimentAnalyzer,
    pub classifier: NaiveBayes,
    pub vectors: WordVectorStore,
}

#[derive(Debug, Deserialize)]
struct TrainingRow {
    text: String,
    category: String,
}

fn read_training(text: &str, name: &str) -> Result<Vec<(String, Category)>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<TrainingRow>().enumerate() {
        let row = row.map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        let c = row
            .category
            .parse()
            .map_err(|e| CliError::Config(format!("{name}: row {}: {e}", i + 1)))?;
        out.push((row.text, c));
    }
    Ok(out)
}

fn read_text(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self, CliError> {
        let conf = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
        let stop_list = match &cfg.stop_list {
            Some(p) => StopList::load(p).map_err(|e| conf(&e))?,
            None => StopList::builtin(),
        };
        let lemmatizer = match &cfg.lemmas {
            Some(p) => Lemmatizer::load(p).map_err(|e| conf(&e))?,
            None => Lemmatizer::builtin(),
        };
        let sentiment = match &cfg.lexicon {
            Some(p) => SentimentAnalyzer::load(p, cfg.negators.as_deref(), cfg.boosters.as_deref())
                .map_err(|e| conf(&e))?,
            None => {
                let neg = cfg.negators.as_deref().map(read_text).transpose()?;
                let boo = cfg.boosters.as_deref().map(read_text).transpose()?;
                SentimentAnalyzer::from_parts(
                    resources::LEXICON,
                    neg.as_deref().unwrap_or(resources::NEGATORS),
                    boo.as_deref().unwrap_or(resources::BOOSTERS),
                )
                .map_err(|e| conf(&e))?
            }
        };
        let training = match &cfg.training {
            Some(p) => read_training(&read_text(p)?, &p.display().to_string())?,
            None => read_training(resources::TRAINING_DEMO, "builtin training set")?,
        };
        let classifier = train_from_texts(&training, &stop_list, &lemmatizer).map_err(|e| conf(&e))?;
        let path = cfg
            .embeddings
            .as_ref()
            .ok_or_else(|| CliError::Config("embeddings: no word-vector file configured".into()))?;
        let vectors = WordVectorStore::load(path).map_err(|e| conf(&e))?;
        Ok(Resources { stop_list, lemmatizer, sentiment, classifier, vectors })
    }
}

/// Trains the category model on raw texts, cleaned the same way as corpus
/// documents.
pub fn train_from_texts(
    rows: &[(String, Category)],
    stop_list: &StopList,
    lemmatizer: &Lemmatizer,
) -> Result<NaiveBayes, ClassifyError> {
    let tokens: Vec<(Vec<String>, Category)> = rows
        .iter()
        .map(|(t, c)| (process_tokens(&lowercase(&strip_noise(t)), stop_list, lemmatizer), *c))
        .collect();
    train_category_classifier(tokens.iter().map(|(t, c)| (t.as_slice(), *c)))
}

/// Everything ranking needs from one bundle.
pub struct Analysis {
    pub set: DocumentSet,
    pub models: SimilarityModels,
    pub labels: HashMap<DocId, CategoryLabel>,
    pub sentiments: HashMap<DocId, SentimentResult>,
    pub warnings: Vec<String>,
}

fn map_maybe_par<T: Sync, U: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Tokenizes, labels, buckets and builds the similarity models.
///
/// Shares and comments whose parent has no label (missing, outside the
/// window, or non-English) are dropped with a warning.
pub fn analyze(bundle: &Bundle, res: &Resources, parallel: bool) -> Result<Analysis, CliError> {
    let docs: Vec<TokenizedDoc> = map_maybe_par(&bundle.documents, parallel, |d| TokenizedDoc {
        doc_id: d.doc_id.clone(),
        owner_id: d.owner_id.clone(),
        dataset_no: d.dataset_no,
        parent_doc_id: d.parent_doc_id.clone(),
        tokens: process_tokens(&d.text, &res.stop_list, &res.lemmatizer),
        flagged_non_english: d.flagged_non_english,
    });

    let independent: Vec<&TokenizedDoc> = docs
        .iter()
        .filter(|d| !is_dependent_dataset(d.dataset_no) && !d.flagged_non_english)
        .collect();
    let classified = map_maybe_par(&independent, parallel, |d| {
        classify_category(d, &res.classifier).map(|l| (d.doc_id.clone(), l))
    });
    let mut labels: HashMap<DocId, CategoryLabel> =
        classified.into_iter().collect::<Result<_, _>>().map_err(CliError::data)?;

    let mut warnings = Vec::new();
    let mut orphans = BTreeSet::new();
    for d in docs.iter().filter(|d| is_dependent_dataset(d.dataset_no) && !d.flagged_non_english) {
        match inherit_category(d, &labels) {
            Ok(l) => {
                labels.insert(d.doc_id.clone(), l);
            }
            Err(ClassifyError::OrphanDocument { .. }) => {
                orphans.insert(d.doc_id.clone());
            }
            Err(e) => return Err(CliError::data(e)),
        }
    }
    if !orphans.is_empty() {
        let w = format!(
            "{} shares/comments have no labeled parent and were dropped, e.g. {}",
            orphans.len(),
            orphans.iter().next().expect("non-empty")
        );
        warn!("{w}");
        warnings.push(w);
    }

    let texts: HashMap<&str, &str> = bundle.documents.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())).collect();
    let scorable: Vec<&TokenizedDoc> = docs.iter().filter(|d| d.is_scorable() && !orphans.contains(&d.doc_id)).collect();
    let sentiments: HashMap<DocId, SentimentResult> = map_maybe_par(&scorable, parallel, |d| {
        (d.doc_id.clone(), res.sentiment.sentiment(texts[d.doc_id.as_str()]))
    })
    .into_iter()
    .collect();

    let kept: Vec<TokenizedDoc> = docs.into_iter().filter(|d| !orphans.contains(&d.doc_id)).collect();
    let mut set = DocumentSet::from_documents(kept);
    assign_buckets(&mut set, &labels, &sentiments).map_err(CliError::data)?;
    let models = SimilarityModels::build(&set, res.vectors.clone()).map_err(CliError::data)?;
    let oov = models.out_of_vocabulary();
    if oov > 0 {
        log::info!("{oov} corpus words have no embedding; they are skipped in pair scoring");
    }
    Ok(Analysis { set, models, labels, sentiments, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketRanking {
    pub ranking: MemberRanking,
    pub scores: Vec<DocumentScore>,
    pub warnings: Vec<String>,
}

/// Ranks members in one bucket. A bucket lacking ego or member documents
/// yields an empty ranking and a warning.
pub fn rank(analysis: &Analysis, bucket: Bucket, cfg: &PipelineConfig) -> Result<BucketRanking, CliError> {
    let sc = ScoreConfig { normalization: cfg.normalization, parallel: cfg.parallel };
    match score_bucket(&analysis.set, bucket, &analysis.models, &sc) {
        Ok(scores) => Ok(BucketRanking { ranking: rank_members(bucket, &scores), scores, warnings: Vec::new() }),
        Err(e @ RecommendError::EmptyBucket { .. }) => {
            warn!("{e}");
            Ok(BucketRanking { ranking: MemberRanking::empty(bucket), scores: Vec::new(), warnings: vec![e.to_string()] })
        }
        Err(e) => Err(CliError::data(e)),
    }
}

/// Selects the targets of one bucket's ranking.
pub fn select(ranking: &MemberRanking, members: &[InteractedMember], cfg: &PipelineConfig) -> Result<TargetSelection, TargetError> {
    let tc = TargetConfig { threshold: cfg.threshold, allow_small: cfg.allow_small };
    top_most(ranking, cfg.n_it, members, &tc)
}

pub fn target_error(e: TargetError) -> CliError {
    match e {
        TargetError::NItOutOfRange { .. } | TargetError::BadThreshold => {
            CliError::Config(format!("{e} (the lower bound of 50 can be lifted with --allow-small)"))
        }
        TargetError::RankingTooSmall { .. } => CliError::data(e),
    }
}
