//! Target eligibility and selection of the top influenceable targets from a
//! member ranking.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::classify::Bucket;
use crate::corpus::{InteractedMember, MemberKind, UserId};
use crate::recommend::MemberRanking;

pub const DEFAULT_THRESHOLD: u64 = 5000;
pub const MIN_N_IT: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TargetError {
    #[error("n_it = {n_it} is out of range: it must satisfy {min} <= n_it <= {network_size} (network size)")]
    NItOutOfRange { n_it: usize, min: usize, network_size: usize },
    #[error("ranking has {available} members, fewer than n_it = {n_it}")]
    RankingTooSmall { n_it: usize, available: usize },
    #[error("connection threshold must be positive")]
    BadThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetConfig {
    /// Members with more connections than this are default targets.
    pub threshold: u64,
    /// Lifts the lower bound of 50 on `n_it`.
    pub allow_small: bool,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig { threshold: DEFAULT_THRESHOLD, allow_small: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSelection {
    pub bucket: Bucket,
    pub n_it: usize,
    pub selected: Vec<UserId>,
    pub defaults_removed: Vec<UserId>,
    pub effective: Vec<UserId>,
    pub warnings: Vec<String>,
}

impl TargetSelection {
    pub fn d_it(&self) -> usize {
        self.defaults_removed.len()
    }
}

/// Groups can never be targets; every other member kind stays.
pub fn filter_eligible(members: &[InteractedMember]) -> Vec<InteractedMember> {
    members.iter().filter(|m| m.kind != MemberKind::Group).cloned().collect()
}

/// The first `n_it` members of the ranking.
pub fn select_targets(
    ranking: &MemberRanking,
    n_it: usize,
    network_size: usize,
    allow_small: bool,
) -> Result<Vec<UserId>, TargetError> {
    let min = if allow_small { 1 } else { MIN_N_IT };
    if n_it < min || n_it > network_size {
        return Err(TargetError::NItOutOfRange { n_it, min, network_size });
    }
    if ranking.len() < n_it {
        return Err(TargetError::RankingTooSmall { n_it, available: ranking.len() });
    }
    Ok(ranking.member_ids().take(n_it).map(str::to_string).collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefaultsOutcome {
    pub effective: Vec<UserId>,
    pub defaults_removed: Vec<UserId>,
    pub warnings: Vec<String>,
}

/// Drops members with more than `threshold` connections. A member whose
/// count is unknown is kept, with a warning.
pub fn remove_defaults(
    selected: &[UserId],
    members: &[InteractedMember],
    threshold: u64,
) -> Result<DefaultsOutcome, TargetError> {
    if threshold == 0 {
        return Err(TargetError::BadThreshold);
    }
    let counts: HashMap<&str, Option<u64>> = members
        .iter()
        .map(|m| (m.member_id.as_str(), m.connections_count))
        .collect();
    let mut out = DefaultsOutcome::default();
    for id in selected {
        match counts.get(id.as_str()).copied().flatten() {
            Some(c) if c > threshold => out.defaults_removed.push(id.clone()),
            Some(_) => out.effective.push(id.clone()),
            None => {
                out.warnings.push(format!("connection count of {id} is unknown; kept as a target"));
                out.effective.push(id.clone());
            }
        }
    }
    Ok(out)
}

/// Restricts the ranking to eligible members, selects `n_it` of them and
/// removes the defaults. No replacements are drawn for removed members.
pub fn top_most(
    ranking: &MemberRanking,
    n_it: usize,
    members: &[InteractedMember],
    config: &TargetConfig,
) -> Result<TargetSelection, TargetError> {
    let eligible = filter_eligible(members);
    let ids: std::collections::HashSet<&str> = eligible.iter().map(|m| m.member_id.as_str()).collect();
    let mut ranking = ranking.clone();
    ranking.retain(|e| ids.contains(e.member_id.as_str()));
    let selected = select_targets(&ranking, n_it, eligible.len(), config.allow_small)?;
    let outcome = remove_defaults(&selected, &eligible, config.threshold)?;
    let mut warnings = outcome.warnings;
    if outcome.effective.is_empty() {
        warnings.push("every selected member is a default target; no effective targets remain".into());
    }
    Ok(TargetSelection {
        bucket: ranking.bucket,
        n_it,
        selected,
        defaults_removed: outcome.defaults_removed,
        effective: outcome.effective,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{Category, Polarity};
    use crate::recommend::RankEntry;
    use std::collections::BTreeSet;

    fn member(id: &str, kind: MemberKind, connections: Option<u64>) -> InteractedMember {
        InteractedMember {
            member_id: id.into(),
            display_name: id.into(),
            kind,
            activity_types: BTreeSet::new(),
            connections_count: connections,
        }
    }

    fn ranking(n: usize) -> MemberRanking {
        MemberRanking {
            bucket: Bucket::new(Category::Sports, Polarity::Negative),
            entries: (0..n)
                .map(|i| RankEntry {
                    rank: i + 1,
                    member_id: format!("m{i:03}"),
                    member_score: (n - i) as f64,
                    best_doc_id: format!("d{i}"),
                })
                .collect(),
        }
    }

    #[test]
    fn groups_are_never_eligible() {
        let ms = [
            member("A", MemberKind::Friend, None),
            member("G", MemberKind::Group, None),
            member("P", MemberKind::Page, None),
        ];
        let ids: Vec<_> = filter_eligible(&ms).into_iter().map(|m| m.member_id).collect();
        assert_eq!(ids, ["A", "P"]);
        assert!(filter_eligible(&[member("G", MemberKind::Group, None)]).is_empty());
    }

    #[test]
    fn selection_bounds() {
        let r = ranking(120);
        assert_eq!(select_targets(&r, 50, 120, false).unwrap().len(), 50);
        assert_eq!(select_targets(&r, 50, 120, false).unwrap()[0], "m000");
        assert!(matches!(select_targets(&r, 10, 120, false), Err(TargetError::NItOutOfRange { .. })));
        assert_eq!(select_targets(&ranking(12), 10, 12, true).unwrap().len(), 10);
        assert!(matches!(select_targets(&r, 121, 120, false), Err(TargetError::NItOutOfRange { .. })));
        assert!(matches!(
            select_targets(&ranking(40), 50, 120, false),
            Err(TargetError::RankingTooSmall { n_it: 50, available: 40 })
        ));
    }

    #[test]
    fn three_megas_leave_forty_seven() {
        let r = ranking(60);
        let members: Vec<_> = (0..60)
            .map(|i| {
                let c = if [3, 17, 40].contains(&i) { 6000 + i as u64 } else { 100 };
                member(&format!("m{i:03}"), MemberKind::Friend, Some(c))
            })
            .collect();
        let sel = top_most(&r, 50, &members, &TargetConfig::default()).unwrap();
        assert_eq!(sel.selected.len(), 50);
        assert_eq!(sel.defaults_removed, ["m003", "m017", "m040"]);
        assert_eq!(sel.effective.len(), 47);
    }

    #[test]
    fn unknown_counts_are_kept() {
        let sel = vec!["a".to_string(), "b".to_string()];
        let ms = [member("a", MemberKind::Friend, None), member("b", MemberKind::Friend, Some(10))];
        let out = remove_defaults(&sel, &ms, 5000).unwrap();
        assert_eq!(out.effective, sel);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(remove_defaults(&sel, &ms, 0), Err(TargetError::BadThreshold));
    }

    #[test]
    fn exactly_threshold_is_not_default() {
        let sel = vec!["a".to_string()];
        let out = remove_defaults(&sel, &[member("a", MemberKind::Page, Some(5000))], 5000).unwrap();
        assert!(out.defaults_removed.is_empty());
    }

    #[test]
    fn groups_drop_out_of_the_ranking() {
        let r = ranking(5);
        let mut ms: Vec<_> = (0..5).map(|i| member(&format!("m{i:03}"), MemberKind::Friend, Some(1))).collect();
        ms[0].kind = MemberKind::Group;
        let sel = top_most(&r, 3, &ms, &TargetConfig { allow_small: true, ..Default::default() }).unwrap();
        assert_eq!(sel.selected, ["m001", "m002", "m003"]);
    }

    #[test]
    fn all_defaults_warns() {
        let r = ranking(2);
        let ms: Vec<_> = (0..2).map(|i| member(&format!("m{i:03}"), MemberKind::Page, Some(9000))).collect();
        let sel = top_most(&r, 2, &ms, &TargetConfig { allow_small: true, ..Default::default() }).unwrap();
        assert!(sel.effective.is_empty());
        assert_eq!(sel.d_it(), 2);
        assert!(!sel.warnings.is_empty());
    }
}
