//! Activity data model: the nine datasets collected for one ego user on one
//! platform, plus CSV ingestion and a seeded synthetic generator.

mod interaction;
mod io;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use interaction::{build_interaction_list, InteractionList};
pub use io::{
    load_activity_csv, load_members_csv, read_activity_records, write_activity_csv,
    write_members_csv, ACTIVITY_HEADER, MEMBER_HEADER,
};
pub use synth::{generate_synthetic_corpus, synthetic_embeddings, SynthConfig, SyntheticCorpus};

pub type UserId = String;
pub type DocId = String;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: missing column `{name}`")]
    MissingColumn { path: String, name: String },
    #[error("{path}: row {row}: bad timestamp `{value}`")]
    BadTimestamp { path: String, row: usize, value: String },
    #[error("{path}: row {row}: {reason}")]
    BadRow { path: String, row: usize, reason: String },
    #[error("{path}: file has no header row")]
    EmptyFile { path: String },
    #[error("{path}: row {row}: duplicate id `{id}`")]
    DuplicateId { path: String, row: usize, id: String },
    #[error("dataset number {0} is outside 1..=9")]
    BadDatasetNo(u8),
    #[error("dataset {0} holds members, not activity documents")]
    NotAnActivityDataset(u8),
    #[error("invalid synthetic parameters: {0}")]
    BadParams(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// One raw row of an activity CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub post_id: String,
    pub content: String,
    pub user_name: String,
    pub user_id: UserId,
    pub react_count: u64,
    pub share_count: u64,
    pub language: String,
    pub time: DateTime<Utc>,
    pub parent_post_id: Option<String>,
    /// Ids of records in the same file whose parent is this record.
    pub comment_thread: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActivityType {
    Post,
    React,
    Comment,
    Tag,
    Share,
    Message,
}

impl ActivityType {
    pub const ALL: [ActivityType; 6] = [
        ActivityType::Post,
        ActivityType::React,
        ActivityType::Comment,
        ActivityType::Tag,
        ActivityType::Share,
        ActivityType::Message,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivityType::Post => "Post",
            ActivityType::React => "React",
            ActivityType::Comment => "Comment",
            ActivityType::Tag => "Tag",
            ActivityType::Share => "Share",
            ActivityType::Message => "Message",
        }
    }

    /// Activity type of the documents stored in a content dataset.
    pub fn for_dataset(dataset_no: u8) -> Option<ActivityType> {
        match dataset_no {
            1 | 6 => Some(ActivityType::Post),
            2 | 7 => Some(ActivityType::Share),
            3 | 8 => Some(ActivityType::Comment),
            4 | 9 => Some(ActivityType::Message),
            _ => None,
        }
    }
}

impl fmt::Display for ActivityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActivityType::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown activity type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MemberKind {
    Friend,
    Follower,
    Following,
    Connection,
    Page,
    Group,
}

impl MemberKind {
    pub const ALL: [MemberKind; 6] = [
        MemberKind::Friend,
        MemberKind::Follower,
        MemberKind::Following,
        MemberKind::Connection,
        MemberKind::Page,
        MemberKind::Group,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MemberKind::Friend => "Friend",
            MemberKind::Follower => "Follower",
            MemberKind::Following => "Following",
            MemberKind::Connection => "Connection",
            MemberKind::Page => "Page",
            MemberKind::Group => "Group",
        }
    }
}

impl fmt::Display for MemberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MemberKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MemberKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown member kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Platform {
    Facebook,
    Twitter,
    LinkedIn,
}

impl Platform {
    /// Relationship kind assumed for a user who only shows up as a mention.
    pub fn default_member_kind(self) -> MemberKind {
        match self {
            Platform::Facebook => MemberKind::Friend,
            Platform::Twitter => MemberKind::Following,
            Platform::LinkedIn => MemberKind::Connection,
        }
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "facebook" => Ok(Platform::Facebook),
            "twitter" => Ok(Platform::Twitter),
            "linkedin" => Ok(Platform::LinkedIn),
            other => Err(format!("unknown platform `{other}`")),
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Platform::Facebook => "Facebook",
            Platform::Twitter => "Twitter",
            Platform::LinkedIn => "LinkedIn",
        };
        f.write_str(s)
    }
}

/// Inclusive collection window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub since: DateTime<Utc>,
    pub until: DateTime<Utc>,
}

impl TimeWindow {
    pub fn new(since: DateTime<Utc>, until: DateTime<Utc>) -> Self {
        TimeWindow { since, until }
    }

    /// A window wide enough to accept every representable timestamp.
    pub fn unbounded() -> Self {
        TimeWindow {
            since: DateTime::<Utc>::MIN_UTC,
            until: DateTime::<Utc>::MAX_UTC,
        }
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.since <= t && t <= self.until
    }
}

/// Datasets 1-4 belong to the ego, 6-9 to members, 5 is the member list.
pub fn is_ego_dataset(dataset_no: u8) -> bool {
    (1..=4).contains(&dataset_no)
}

/// Datasets whose documents hang off a parent post (shares and comments).
pub fn is_dependent_dataset(dataset_no: u8) -> bool {
    matches!(dataset_no, 2 | 3 | 7 | 8)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: DocId,
    pub owner_id: UserId,
    pub text: String,
    pub dataset_no: u8,
    pub activity_type: ActivityType,
    pub parent_doc_id: Option<DocId>,
    pub time: DateTime<Utc>,
    /// Language code carried by the source row; "und" when unknown.
    pub language: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractedMember {
    pub member_id: UserId,
    pub display_name: String,
    pub kind: MemberKind,
    pub activity_types: BTreeSet<ActivityType>,
    pub connections_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub platform: Platform,
    pub ego_id: UserId,
    pub datasets: BTreeMap<u8, Vec<Document>>,
    /// Dataset 5 rows as loaded; may hold several rows per member.
    pub members: Vec<InteractedMember>,
    pub window: TimeWindow,
}

impl Corpus {
    pub fn new(platform: Platform, ego_id: impl Into<UserId>, window: TimeWindow) -> Self {
        Corpus {
            platform,
            ego_id: ego_id.into(),
            datasets: BTreeMap::new(),
            members: Vec::new(),
            window,
        }
    }

    /// Every content document, in dataset order then file order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.datasets.values().flatten()
    }

    pub fn document_count(&self) -> usize {
        self.datasets.values().map(Vec::len).sum()
    }

    /// Checks the window and ownership invariants; returns the offending doc ids.
    pub fn validate(&self) -> Vec<String> {
        let member_ids: BTreeSet<&str> = self.members.iter().map(|m| m.member_id.as_str()).collect();
        let mut bad = Vec::new();
        for (&no, docs) in &self.datasets {
            for d in docs {
                let owner_ok = if is_ego_dataset(no) {
                    d.owner_id == self.ego_id
                } else {
                    member_ids.contains(d.owner_id.as_str())
                };
                let parent_ok = d.parent_doc_id.is_some() == is_dependent_dataset(no);
                if !owner_ok || !parent_ok || !self.window.contains(d.time) || d.dataset_no != no {
                    bad.push(d.doc_id.clone());
                }
            }
        }
        bad
    }
}
