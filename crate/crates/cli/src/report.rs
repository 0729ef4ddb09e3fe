//! Report files: the ranking CSV plus JSON documents that carry the config
//! hash and tool version.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use egorank_core::classify::Bucket;
use egorank_core::recommend::{MemberRanking, Normalization, RankEntry};
use egorank_core::targets::TargetSelection;

use crate::error::CliError;
use crate::pipeline::TOOL_VERSION;

pub const RANKING_HEADER: [&str; 4] = ["rank", "member_id", "score", "best_doc_id"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub tool_version: String,
    pub config_hash: String,
    pub bucket: String,
    pub normalization: Normalization,
    pub scored_documents: usize,
    pub warnings: Vec<String>,
    pub entries: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetsReport {
    pub tool_version: String,
    pub config_hash: String,
    pub bucket: String,
    pub n_it: usize,
    pub threshold: u64,
    pub d_it: usize,
    pub effective_count: usize,
    pub selected: Vec<String>,
    pub defaults_removed: Vec<String>,
    pub effective: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when no selection could be made for this bucket.
    pub error: Option<String>,
}

impl TargetsReport {
    pub fn from_selection(sel: &TargetSelection, threshold: u64, config_hash: &str) -> Self {
        TargetsReport {
            tool_version: TOOL_VERSION.into(),
            config_hash: config_hash.into(),
            bucket: sel.bucket.to_string(),
            n_it: sel.n_it,
            threshold,
            d_it: sel.d_it(),
            effective_count: sel.effective.len(),
            selected: sel.selected.clone(),
            defaults_removed: sel.defaults_removed.clone(),
            effective: sel.effective.clone(),
            warnings: sel.warnings.clone(),
            error: None,
        }
    }

    pub fn failed(bucket: Bucket, n_it: usize, threshold: u64, config_hash: &str, error: String) -> Self {
        TargetsReport {
            tool_version: TOOL_VERSION.into(),
            config_hash: config_hash.into(),
            bucket: bucket.to_string(),
            n_it,
            threshold,
            d_it: 0,
            effective_count: 0,
            selected: Vec::new(),
            defaults_removed: Vec::new(),
            effective: Vec::new(),
            warnings: Vec::new(),
            error: Some(error),
        }
    }
}

pub fn ranking_csv_path(dir: &Path, bucket: Bucket) -> PathBuf {
    dir.join(format!("ranking-{}.csv", bucket.slug()))
}

pub fn ranking_json_path(dir: &Path, bucket: Bucket) -> PathBuf {
    dir.join(format!("ranking-{}.json", bucket.slug()))
}

pub fn targets_json_path(dir: &Path, bucket: Bucket) -> PathBuf {
    dir.join(format!("targets-{}.json", bucket.slug()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn ranking_csv(ranking: &MemberRanking) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RANKING_HEADER).expect("in-memory write");
    for e in &ranking.entries {
        w.write_record([e.rank.to_string(), e.member_id.clone(), e.member_score.to_string(), e.best_doc_id.clone()])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Re-reads a targets report and recounts it: |selected| = n_it,
/// d_it = |defaults_removed|, |effective| = n_it - d_it, and effective is
/// selected minus the defaults in the same order.
pub fn validate_targets_report(path: &Path) -> Result<TargetsReport, CliError> {
    let r: TargetsReport = read_json(path)?;
    if r.error.is_some() {
        return Ok(r);
    }
    let fail = |what: &str| Err(CliError::Data(format!("{}: {what}", path.display())));
    if r.selected.len() != r.n_it {
        return fail("selected list does not hold n_it members");
    }
    if r.defaults_removed.len() != r.d_it {
        return fail("d_it does not match the removed list");
    }
    if r.effective.len() != r.n_it - r.d_it || r.effective_count != r.effective.len() {
        return fail("effective count is not n_it - d_it");
    }
    let expected: Vec<&String> = r.selected.iter().filter(|m| !r.defaults_removed.contains(m)).collect();
    if expected != r.effective.iter().collect::<Vec<_>>() {
        return fail("effective list is not the selected list minus defaults");
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use egorank_core::classify::{Category, Polarity};

    #[test]
    fn csv_layout() {
        let ranking = MemberRanking {
            bucket: Bucket::new(Category::Politics, Polarity::Positive),
            entries: vec![RankEntry { rank: 1, member_id: "m1".into(), member_score: 2.5, best_doc_id: "d,1".into() }],
        };
        let text = String::from_utf8(ranking_csv(&ranking)).unwrap();
        assert_eq!(text, "rank,member_id,score,best_doc_id\n1,m1,2.5,\"d,1\"\n");
    }

    #[test]
    fn validator_catches_bad_counts() {
        let dir = tempfile::tempdir().unwrap();
        let sel = TargetSelection {
            bucket: Bucket::new(Category::Sports, Polarity::Positive),
            n_it: 3,
            selected: vec!["a".into(), "b".into(), "c".into()],
            defaults_removed: vec!["b".into()],
            effective: vec!["a".into(), "c".into()],
            warnings: vec![],
        };
        let mut report = TargetsReport::from_selection(&sel, 5000, "h");
        let p = dir.path().join("t.json");
        write_json(&p, &report).unwrap();
        assert!(validate_targets_report(&p).is_ok());
        report.effective.reverse();
        write_json(&p, &report).unwrap();
        assert!(validate_targets_report(&p).is_err());
        report.effective = vec!["a".into()];
        report.effective_count = 1;
        write_json(&p, &report).unwrap();
        assert!(validate_targets_report(&p).is_err());
    }
}
