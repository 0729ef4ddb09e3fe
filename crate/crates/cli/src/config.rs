use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use egorank_core::classify::Bucket;
use egorank_core::corpus::{Platform, TimeWindow};
use egorank_core::recommend::Normalization;
use egorank_core::targets::{DEFAULT_THRESHOLD, MIN_N_IT};

use crate::error::CliError;

/// Which buckets a command works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BucketFilter {
    All,
    One(Bucket),
}

impl BucketFilter {
    pub fn buckets(&self) -> Vec<Bucket> {
        match self {
            BucketFilter::All => Bucket::all().collect(),
            BucketFilter::One(b) => vec![*b],
        }
    }
}

impl std::str::FromStr for BucketFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(BucketFilter::All)
        } else {
            s.parse().map(BucketFilter::One)
        }
    }
}

impl TryFrom<String> for BucketFilter {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BucketFilter> for String {
    fn from(b: BucketFilter) -> String {
        match b {
            BucketFilter::All => "all".into(),
            BucketFilter::One(b) => b.to_string(),
        }
    }
}

/// Declarative pipeline settings, read from a TOML file.
///
/// Dataset paths default to `<data_dir>/dataset_<n>.csv`. Resource paths left
/// unset fall back to the builtin tables, except `embeddings`, which is
/// required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub platform: Platform,
    pub ego_id: String,
    pub data_dir: PathBuf,
    pub dataset_1: Option<PathBuf>,
    pub dataset_2: Option<PathBuf>,
    pub dataset_3: Option<PathBuf>,
    pub dataset_4: Option<PathBuf>,
    pub dataset_5: Option<PathBuf>,
    pub dataset_6: Option<PathBuf>,
    pub dataset_7: Option<PathBuf>,
    pub dataset_8: Option<PathBuf>,
    pub dataset_9: Option<PathBuf>,
    pub stop_list: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    /// Labeled seed corpus (`text,category` CSV) for the category model.
    pub training: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
    pub bucket: BucketFilter,
    pub n_it: usize,
    pub threshold: u64,
    pub normalization: Normalization,
    pub allow_small: bool,
    pub seed: u64,
    pub parallel: bool,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            platform: Platform::Twitter,
            ego_id: "ego".into(),
            data_dir: PathBuf::from("."),
            dataset_1: None,
            dataset_2: None,
            dataset_3: None,
            dataset_4: None,
            dataset_5: None,
            dataset_6: None,
            dataset_7: None,
            dataset_8: None,
            dataset_9: None,
            stop_list: None,
            lemmas: None,
            lexicon: None,
            negators: None,
            boosters: None,
            dictionary: None,
            training: None,
            embeddings: None,
            since: None,
            until: None,
            bucket: BucketFilter::All,
            n_it: MIN_N_IT,
            threshold: DEFAULT_THRESHOLD,
            normalization: Normalization::Raw,
            allow_small: false,
            seed: 0,
            parallel: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Command-line flags mirroring every config field.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigOverrides {
    #[arg(long)]
    pub platform: Option<Platform>,
    #[arg(long)]
    pub ego_id: Option<String>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub dataset_1: Option<PathBuf>,
    #[arg(long)]
    pub dataset_2: Option<PathBuf>,
    #[arg(long)]
    pub dataset_3: Option<PathBuf>,
    #[arg(long)]
    pub dataset_4: Option<PathBuf>,
    #[arg(long)]
    pub dataset_5: Option<PathBuf>,
    #[arg(long)]
    pub dataset_6: Option<PathBuf>,
    #[arg(long)]
    pub dataset_7: Option<PathBuf>,
    #[arg(long)]
    pub dataset_8: Option<PathBuf>,
    #[arg(long)]
    pub dataset_9: Option<PathBuf>,
    #[arg(long)]
    pub stop_list: Option<PathBuf>,
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub negators: Option<PathBuf>,
    #[arg(long)]
    pub boosters: Option<PathBuf>,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub training: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// RFC 3339 timestamp, e.g. 2019-01-01T00:00:00Z
    #[arg(long)]
    pub since: Option<DateTime<Utc>>,
    #[arg(long)]
    pub until: Option<DateTime<Utc>>,
    /// `all` or a bucket such as `Politics/Positive`
    #[arg(long)]
    pub bucket: Option<BucketFilter>,
    #[arg(long)]
    pub n_it: Option<usize>,
    #[arg(long)]
    pub threshold: Option<u64>,
    #[arg(long)]
    pub normalization: Option<Normalization>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub allow_small: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub parallel: Option<bool>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! apply_fields {
    ($cfg:ident, $o:ident; plain: $($p:ident),*; optional: $($q:ident),*) => {
        $(if let Some(v) = $o.$p.clone() { $cfg.$p = v; })*
        $(if let Some(v) = $o.$q.clone() { $cfg.$q = Some(v); })*
    };
}

impl PipelineConfig {
    /// Parses a TOML file; relative paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        fix(&mut self.out_dir);
        for p in self.path_fields_mut().into_iter().flatten() {
            fix(p);
        }
    }

    fn path_fields_mut(&mut self) -> [&mut Option<PathBuf>; 17] {
        [
            &mut self.dataset_1,
            &mut self.dataset_2,
            &mut self.dataset_3,
            &mut self.dataset_4,
            &mut self.dataset_5,
            &mut self.dataset_6,
            &mut self.dataset_7,
            &mut self.dataset_8,
            &mut self.dataset_9,
            &mut self.stop_list,
            &mut self.lemmas,
            &mut self.lexicon,
            &mut self.negators,
            &mut self.boosters,
            &mut self.dictionary,
            &mut self.training,
            &mut self.embeddings,
        ]
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        apply_fields!(self, o;
            plain: platform, ego_id, data_dir, bucket, n_it, threshold, normalization,
                allow_small, seed, parallel, out_dir;
            optional: dataset_1, dataset_2, dataset_3, dataset_4, dataset_5, dataset_6,
                dataset_7, dataset_8, dataset_9, stop_list, lemmas, lexicon, negators,
                boosters, dictionary, training, embeddings, since, until);
    }

    /// Path of dataset `n` (1..=9).
    pub fn dataset_path(&self, n: u8) -> PathBuf {
        let explicit = match n {
            1 => &self.dataset_1,
            2 => &self.dataset_2,
            3 => &self.dataset_3,
            4 => &self.dataset_4,
            5 => &self.dataset_5,
            6 => &self.dataset_6,
            7 => &self.dataset_7,
            8 => &self.dataset_8,
            9 => &self.dataset_9,
            _ => panic!("dataset number {n} outside 1..=9"),
        };
        explicit
            .clone()
            .unwrap_or_else(|| self.data_dir.join(format!("dataset_{n}.csv")))
    }

    pub fn window(&self) -> TimeWindow {
        let w = TimeWindow::unbounded();
        TimeWindow::new(self.since.unwrap_or(w.since), self.until.unwrap_or(w.until))
    }

    /// Checks values and that every referenced resource file exists.
    /// Dataset files are checked when they are loaded.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_it == 0 {
            return Err(CliError::Config("n_it must be at least 1".into()));
        }
        if self.threshold == 0 {
            return Err(CliError::Config("threshold must be positive".into()));
        }
        if self.ego_id.trim().is_empty() {
            return Err(CliError::Config("ego_id is empty".into()));
        }
        if let (Some(s), Some(u)) = (self.since, self.until) {
            if s > u {
                return Err(CliError::Config(format!("since {s} is after until {u}")));
            }
        }
        let resources = [
            ("stop_list", &self.stop_list),
            ("lemmas", &self.lemmas),
            ("lexicon", &self.lexicon),
            ("negators", &self.negators),
            ("boosters", &self.boosters),
            ("dictionary", &self.dictionary),
            ("training", &self.training),
            ("embeddings", &self.embeddings),
        ];
        for (name, p) in resources {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(CliError::Config(format!("{name}: {} does not exist", p.display())));
                }
            }
        }
        if self.embeddings.is_none() {
            return Err(CliError::Config("embeddings: no word-vector file configured".into()));
        }
        Ok(())
    }

    /// SHA-256 over the settings that influence results; the output
    /// directory and the parallel switch are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.parallel = false;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
