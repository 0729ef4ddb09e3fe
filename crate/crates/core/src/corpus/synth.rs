//! Seeded synthetic corpora with hidden ground-truth labels, used in place of
//! crawled platform data.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{
    ActivityType, Corpus, CorpusError, DocId, Document, InteractedMember, MemberKind, Platform,
    TimeWindow, UserId,
};
use crate::classify::{Bucket, Category, Polarity};
use crate::lexproc::Lemmatizer;
use crate::resources;
use crate::simdex::WordVectorStore;

const EMOJI: [&str; 5] = ["😀", "🚀", "🙂", "🔥", "👍"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub platform: Platform,
    pub ego_id: UserId,
    pub members: usize,
    pub docs_per_member: usize,
    pub ego_docs: usize,
    /// Neutral filler vocabulary.
    pub vocab: Vec<String>,
    /// Function words sprinkled into texts; must not contain negators.
    pub function_words: Vec<String>,
    pub topic_profiles: BTreeMap<Category, Vec<(String, f64)>>,
    pub positive_words: Vec<String>,
    pub negative_words: Vec<String>,
    /// The ego's dominant bucket.
    pub ego_bucket: Bucket,
    /// Members whose home bucket is the ego's bucket.
    pub planted: usize,
    /// Planted members given more than 5000 connections.
    pub mega_members: usize,
    /// Non-planted members of kind Group.
    pub group_members: usize,
    /// Probability that a document is drawn from its author's home bucket.
    pub home_affinity: f64,
    pub training_docs_per_category: usize,
    pub window: TimeWindow,
}

impl SynthConfig {
    /// Configuration over the builtin topic, filler and lexicon tables.
    pub fn demo(seed: u64) -> Self {
        let topic_profiles = resources::builtin_topic_profiles();
        let topic_words: BTreeSet<&str> = topic_profiles
            .values()
            .flatten()
            .map(|(w, _)| w.as_str())
            .collect();
        let negators: BTreeSet<String> = resources::word_list(resources::NEGATORS).into_iter().collect();
        let mut positive_words = Vec::new();
        let mut negative_words = Vec::new();
        for line in resources::content_lines(resources::LEXICON) {
            let mut cols = line.split('\t');
            let (Some(w), Some(v)) = (cols.next(), cols.next()) else { continue };
            let Ok(v) = v.trim().parse::<f64>() else { continue };
            if topic_words.contains(w) {
                continue;
            }
            if v >= 1.5 {
                positive_words.push(w.to_string());
            } else if v <= -1.5 {
                negative_words.push(w.to_string());
            }
        }
        let function_words = resources::word_list(resources::STOP_WORDS)
            .into_iter()
            .filter(|w| !negators.contains(w) && w.len() > 1)
            .collect();
        let since = Utc.with_ymd_and_hms(2019, 1, 1, 0, 0, 0).unwrap();
        let until = Utc.with_ymd_and_hms(2020, 12, 31, 23, 59, 59).unwrap();
        SynthConfig {
            seed,
            platform: Platform::Twitter,
            ego_id: "ego".into(),
            members: 50,
            docs_per_member: 40,
            ego_docs: 40,
            vocab: resources::word_list(resources::FILLER),
            function_words,
            topic_profiles,
            positive_words,
            negative_words,
            ego_bucket: Bucket::new(Category::Politics, Polarity::Positive),
            planted: 10,
            mega_members: 2,
            group_members: 2,
            home_affinity: 0.8,
            training_docs_per_category: 40,
            window: TimeWindow::new(since, until),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Hidden ground-truth bucket of every generated document.
    pub labels: BTreeMap<DocId, Bucket>,
    pub planted_members: BTreeSet<UserId>,
    pub mega_members: BTreeSet<UserId>,
    pub group_members: BTreeSet<UserId>,
    /// Labeled seed corpus for the category classifier.
    pub training: Vec<(String, Category)>,
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    topic_index: BTreeMap<Category, WeightedIndex<f64>>,
    member_ids: Vec<UserId>,
}

fn pluralize(word: &str) -> String {
    let consonant_y = word.ends_with('y')
        && word.len() > 1
        && !matches!(word.as_bytes()[word.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u');
    if consonant_y {
        format!("{}ies", &word[..word.len() - 1])
    } else if word.ends_with('x') || word.ends_with("ch") || word.ends_with("sh") {
        format!("{word}es")
    } else {
        format!("{word}s")
    }
}

impl Generator<'_> {
    fn random_bucket(&mut self) -> Bucket {
        let c = Category::ALL[self.rng.gen_range(0..5)];
        let p = Polarity::ALL[self.rng.gen_range(0..2)];
        Bucket::new(c, p)
    }

    fn draw_bucket(&mut self, home: Bucket) -> Bucket {
        if self.rng.gen_bool(self.cfg.home_affinity) {
            home
        } else {
            self.random_bucket()
        }
    }

    fn draw_polarity(&mut self, home: Polarity) -> Polarity {
        if self.rng.gen_bool(self.cfg.home_affinity) {
            home
        } else {
            Polarity::ALL[self.rng.gen_range(0..2)]
        }
    }

    fn topic_word(&mut self, category: Category) -> String {
        let i = self.topic_index[&category].sample(&mut self.rng);
        self.cfg.topic_profiles[&category][i].0.clone()
    }

    fn pick<'w>(&mut self, words: &'w [String]) -> Option<&'w str> {
        words.choose(&mut self.rng).map(String::as_str)
    }

    fn topical_words(&mut self, category: Category, n: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let w = self.topic_word(category);
            if !w.ends_with('s') && self.rng.gen_bool(0.2) {
                out.push(pluralize(&w));
            } else {
                out.push(w);
            }
        }
        out
    }

    /// Raw post text for a bucket, with the casing, punctuation, emoji and
    /// hashtags that primary preprocessing has to clean up.
    fn compose(&mut self, bucket: Bucket, mention: Option<&str>) -> String {
        let cfg = self.cfg;
        let n_topic = self.rng.gen_range(4..=8);
        let mut words = self.topical_words(bucket.category, n_topic);
        let sentiment_words = match bucket.polarity {
            Polarity::Positive => &cfg.positive_words,
            Polarity::Negative => &cfg.negative_words,
        };
        for _ in 0..self.rng.gen_range(2..=3) {
            if let Some(w) = self.pick(sentiment_words) {
                words.push(w.to_string());
            }
        }
        for _ in 0..self.rng.gen_range(2..=6) {
            if let Some(w) = self.pick(&cfg.vocab) {
                words.push(w.to_string());
            }
        }
        for _ in 0..self.rng.gen_range(2..=5) {
            if let Some(w) = self.pick(&cfg.function_words) {
                words.push(w.to_string());
            }
        }
        words.shuffle(&mut self.rng);
        if self.rng.gen_bool(0.15) {
            let i = self.rng.gen_range(0..words.len());
            words[i] = format!("#{}", words[i]);
        }
        if self.rng.gen_bool(0.3) && words.len() > 2 {
            let i = self.rng.gen_range(0..words.len() - 1);
            words[i].push(',');
        }
        if let Some(m) = mention {
            let i = self.rng.gen_range(0..=words.len());
            words.insert(i, format!("@{m}"));
        }
        let mut text = words.join(" ");
        if let Some(first) = text.get(0..1) {
            let upper = first.to_uppercase();
            text.replace_range(0..1, &upper);
        }
        text.push_str(["", ".", "!", "!!!"][self.rng.gen_range(0..4)]);
        if self.rng.gen_bool(0.1) {
            text.push(' ');
            text.push_str(EMOJI[self.rng.gen_range(0..EMOJI.len())]);
        }
        text
    }

    fn timestamp(&mut self) -> DateTime<Utc> {
        let w = &self.cfg.window;
        let span = (w.until - w.since).num_seconds().max(0);
        w.since + Duration::seconds(self.rng.gen_range(0..=span))
    }

    /// Dataset number for the k-th document of a user; the first is always a post.
    fn dataset_for(&mut self, k: usize, ego: bool) -> u8 {
        let base = if ego { 0 } else { 5 };
        if k == 0 {
            return base + 1;
        }
        let r: f64 = self.rng.gen();
        base + if r < 0.5 {
            1
        } else if r < 0.7 {
            2
        } else if r < 0.9 {
            3
        } else {
            4
        }
    }

    /// Generates one user's documents; returns them with their hidden labels.
    fn user_documents(
        &mut self,
        owner: &str,
        prefix: &str,
        count: usize,
        home: Bucket,
        ego: bool,
    ) -> Vec<(Document, Bucket)> {
        let mut out: Vec<(Document, Bucket)> = Vec::with_capacity(count);
        let mut posts: Vec<usize> = Vec::new();
        for k in 0..count {
            let dataset_no = self.dataset_for(k, ego);
            let dependent = super::is_dependent_dataset(dataset_no);
            let (bucket, parent) = if dependent {
                let pi = posts[self.rng.gen_range(0..posts.len())];
                let parent_bucket = out[pi].1;
                let polarity = self.draw_polarity(home.polarity);
                (Bucket::new(parent_bucket.category, polarity), Some(out[pi].0.doc_id.clone()))
            } else {
                (self.draw_bucket(home), None)
            };
            let mention = if ego && !self.member_ids.is_empty() && self.rng.gen_bool(0.1) {
                let i = self.rng.gen_range(0..self.member_ids.len());
                Some(self.member_ids[i].clone())
            } else {
                None
            };
            let text = self.compose(bucket, mention.as_deref());
            let time = self.timestamp();
            if dataset_no == 1 || dataset_no == 6 {
                posts.push(out.len());
            }
            out.push((
                Document {
                    doc_id: format!("{prefix}-{k:03}"),
                    owner_id: owner.to_string(),
                    text,
                    dataset_no,
                    activity_type: ActivityType::for_dataset(dataset_no).expect("content dataset"),
                    parent_doc_id: parent,
                    time,
                    language: "en".into(),
                },
                bucket,
            ));
        }
        out
    }
}

/// Builds a deterministic corpus: the same configuration always yields the
/// same documents, members and labels.
pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Result<SyntheticCorpus, CorpusError> {
    if cfg.members == 0 || cfg.docs_per_member == 0 || cfg.ego_docs == 0 {
        return Err(CorpusError::BadParams("member and document counts must be positive".into()));
    }
    if cfg.vocab.is_empty() {
        return Err(CorpusError::BadParams("vocabulary is empty".into()));
    }
    if cfg.planted > cfg.members || cfg.mega_members > cfg.planted {
        return Err(CorpusError::BadParams("need mega_members <= planted <= members".into()));
    }
    if cfg.group_members > cfg.members - cfg.planted {
        return Err(CorpusError::BadParams("too many group members".into()));
    }
    if !(0.0..=1.0).contains(&cfg.home_affinity) {
        return Err(CorpusError::BadParams("home_affinity must lie in [0, 1]".into()));
    }
    if cfg.positive_words.is_empty() || cfg.negative_words.is_empty() {
        return Err(CorpusError::BadParams("sentiment word lists are empty".into()));
    }
    let mut topic_index = BTreeMap::new();
    for c in Category::ALL {
        let profile = cfg
            .topic_profiles
            .get(&c)
            .filter(|p| !p.is_empty())
            .ok_or_else(|| CorpusError::BadParams(format!("no topic profile for {c}")))?;
        let idx = WeightedIndex::new(profile.iter().map(|(_, w)| *w))
            .map_err(|e| CorpusError::BadParams(format!("topic weights for {c}: {e}")))?;
        topic_index.insert(c, idx);
    }

    let width = cfg.members.saturating_sub(1).to_string().len().max(3);
    let member_ids: Vec<UserId> = (0..cfg.members).map(|i| format!("m{i:0width$}")).collect();
    let mut gen = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        topic_index,
        member_ids: member_ids.clone(),
    };

    let mut order: Vec<usize> = (0..cfg.members).collect();
    order.shuffle(&mut gen.rng);
    let planted: Vec<usize> = order[..cfg.planted].to_vec();
    let groups: Vec<usize> = order[cfg.planted..cfg.planted + cfg.group_members].to_vec();
    let megas: Vec<usize> = planted[..cfg.mega_members].to_vec();

    let mut corpus = Corpus::new(cfg.platform, cfg.ego_id.clone(), cfg.window);
    let mut labels = BTreeMap::new();
    let mut datasets: BTreeMap<u8, Vec<Document>> = (1..=9).filter(|&n| n != 5).map(|n| (n, Vec::new())).collect();

    let ego_docs = gen.user_documents(&cfg.ego_id, &cfg.ego_id, cfg.ego_docs, cfg.ego_bucket, true);
    for (d, b) in ego_docs {
        labels.insert(d.doc_id.clone(), b);
        datasets.get_mut(&d.dataset_no).expect("dataset slot").push(d);
    }

    for (i, id) in member_ids.iter().enumerate() {
        let is_planted = planted.contains(&i);
        let home = if is_planted {
            cfg.ego_bucket
        } else {
            loop {
                let b = gen.random_bucket();
                if b != cfg.ego_bucket {
                    break b;
                }
            }
        };
        let kind = if groups.contains(&i) {
            MemberKind::Group
        } else if megas.contains(&i) {
            MemberKind::Page
        } else if gen.rng.gen_bool(0.1) {
            MemberKind::Page
        } else {
            cfg.platform.default_member_kind()
        };
        let connections_count = if megas.contains(&i) {
            gen.rng.gen_range(6_000..=60_000)
        } else {
            gen.rng.gen_range(20..=4_000)
        };
        let mut activity_types = BTreeSet::new();
        for a in ActivityType::ALL {
            if gen.rng.gen_bool(0.4) {
                activity_types.insert(a);
            }
        }
        if activity_types.is_empty() {
            activity_types.insert(ActivityType::React);
        }
        corpus.members.push(InteractedMember {
            member_id: id.clone(),
            display_name: format!("User {id}"),
            kind,
            activity_types,
            connections_count: Some(connections_count),
        });
        for (d, b) in gen.user_documents(id, id, cfg.docs_per_member, home, false) {
            labels.insert(d.doc_id.clone(), b);
            datasets.get_mut(&d.dataset_no).expect("dataset slot").push(d);
        }
    }
    corpus.datasets = datasets;

    let mut training = Vec::new();
    for c in Category::ALL {
        for _ in 0..cfg.training_docs_per_category {
            let n = gen.rng.gen_range(6..=10);
            let mut words = gen.topical_words(c, n);
            for _ in 0..2 {
                if let Some(w) = gen.pick(&cfg.vocab) {
                    words.push(w.to_string());
                }
            }
            words.shuffle(&mut gen.rng);
            training.push((words.join(" "), c));
        }
    }

    let ids = |idx: &[usize]| idx.iter().map(|&i| member_ids[i].clone()).collect::<BTreeSet<_>>();
    Ok(SyntheticCorpus {
        corpus,
        labels,
        planted_members: ids(&planted),
        mega_members: ids(&megas),
        group_members: ids(&groups),
        training,
    })
}

/// Embeddings for a synthetic corpus. Topic words cluster around one
/// centroid per category and sentiment words around one per polarity;
/// filler, function and padding words point in random directions. Each
/// word's lemma gets the same vector so lookups after lemmatization hit.
pub fn synthetic_embeddings(cfg: &SynthConfig, size: usize, dim: usize) -> WordVectorStore {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_e3b0);
    let lemmatizer = Lemmatizer::builtin();
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let near = |rng: &mut ChaCha8Rng, centre: &[f64]| -> Vec<f64> {
        centre.iter().map(|c| c + 0.45 * rng.gen_range(-1.0..1.0)).collect()
    };
    let mut store = WordVectorStore::new(dim);
    let add = |store: &mut WordVectorStore, word: &str, v: &[f64]| {
        for w in [word.to_string(), pluralize(word), lemmatizer.lemmatize(word)] {
            if store.row_of(&w).is_none() {
                store.insert(w, v).expect("finite vector of the store's dimension");
            }
        }
    };
    for profile in cfg.topic_profiles.values() {
        let centre = random(&mut rng);
        for (w, _) in profile {
            let v = near(&mut rng, &centre);
            add(&mut store, w, &v);
        }
    }
    for words in [&cfg.positive_words, &cfg.negative_words] {
        let centre = random(&mut rng);
        for w in words {
            let v = near(&mut rng, &centre);
            add(&mut store, w, &v);
        }
    }
    for w in cfg.vocab.iter().chain(&cfg.function_words) {
        let v = random(&mut rng);
        add(&mut store, w, &v);
    }
    let mut k = 0;
    while store.len() < size {
        let v = random(&mut rng);
        add(&mut store, &format!("pad{k:05}"), &v);
        k += 1;
    }
    store
}
