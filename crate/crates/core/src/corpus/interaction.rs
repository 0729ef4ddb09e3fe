use std::collections::{BTreeMap, BTreeSet};

use super::{ActivityType, Corpus, InteractedMember};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionList {
    /// Deduplicated members sorted by member id.
    pub members: Vec<InteractedMember>,
    pub warnings: Vec<String>,
    /// Mentioned users that were not already Dataset 5 members.
    pub added_from_mentions: usize,
}

/// Collapses the Dataset 5 rows into one entry per member and merges users
/// harvested from `@` mentions in the ego's content.
///
/// Duplicate rows are merged independently of their order: activity types are
/// unioned, the kind is the first in declaration order, the display name is the
/// smallest non-empty one and the connection count is the largest known one.
/// A mention matches an existing member by id or, case-insensitively, by
/// display name; otherwise it becomes a new member of the platform's default
/// kind linked by a `Tag` activity.
pub fn build_interaction_list(corpus: &Corpus, mentions: &[String]) -> InteractionList {
    let mut warnings = Vec::new();
    if corpus.members.is_empty() {
        warnings.push("dataset 5 is empty; no interacted members".to_string());
    }

    let mut merged: BTreeMap<String, InteractedMember> = BTreeMap::new();
    for m in &corpus.members {
        merged
            .entry(m.member_id.clone())
            .and_modify(|e| {
                e.activity_types.extend(m.activity_types.iter().copied());
                e.kind = e.kind.min(m.kind);
                if !m.display_name.is_empty()
                    && (e.display_name.is_empty() || m.display_name < e.display_name)
                {
                    e.display_name = m.display_name.clone();
                }
                e.connections_count = match (e.connections_count, m.connections_count) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
            })
            .or_insert_with(|| m.clone());
    }

    let by_name: BTreeMap<String, String> = merged
        .values()
        .filter(|m| !m.display_name.is_empty())
        .map(|m| (m.display_name.to_lowercase(), m.member_id.clone()))
        .collect();

    let mut added = 0;
    let unique: BTreeSet<&String> = mentions.iter().collect();
    for name in unique {
        if name.is_empty() {
            continue;
        }
        let existing = if merged.contains_key(name) {
            Some(name.clone())
        } else {
            by_name.get(&name.to_lowercase()).cloned()
        };
        match existing {
            Some(id) => {
                if let Some(m) = merged.get_mut(&id) {
                    m.activity_types.insert(ActivityType::Tag);
                }
            }
            None => {
                added += 1;
                merged.insert(
                    name.clone(),
                    InteractedMember {
                        member_id: name.clone(),
                        display_name: name.clone(),
                        kind: corpus.platform.default_member_kind(),
                        activity_types: BTreeSet::from([ActivityType::Tag]),
                        connections_count: None,
                    },
                );
            }
        }
    }

    for w in &warnings {
        log::warn!("{w}");
    }
    InteractionList {
        members: merged.into_values().collect(),
        warnings,
        added_from_mentions: added,
    }
}
