use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{
    is_dependent_dataset, ActivityRecord, ActivityType, CorpusError, Document, InteractedMember,
    TimeWindow,
};

pub const ACTIVITY_HEADER: [&str; 9] = [
    "post_id",
    "content",
    "user_name",
    "user_id",
    "react_count",
    "share_count",
    "language",
    "time",
    "parent_post_id",
];

pub const MEMBER_HEADER: [&str; 5] = [
    "member_id",
    "display_name",
    "kind",
    "activity_types",
    "connections_count",
];

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads the header and data rows, checking the header column by column.
fn read_table<R: Read>(
    reader: R,
    path: &str,
    expected: &[&str],
) -> Result<Vec<csv::StringRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(CorpusError::EmptyFile { path: path.to_string() }),
        Some(r) => r.map_err(|source| CorpusError::Csv { path: path.to_string(), source })?,
    };
    for (i, name) in expected.iter().enumerate() {
        let got = header.get(i).map(|h| h.trim_start_matches('\u{feff}').trim());
        if got != Some(*name) {
            return Err(CorpusError::MissingColumn {
                path: path.to_string(),
                name: name.to_string(),
            });
        }
    }
    if header.len() != expected.len() {
        return Err(CorpusError::BadRow {
            path: path.to_string(),
            row: 0,
            reason: format!("header has {} columns, expected {}", header.len(), expected.len()),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|source| CorpusError::Csv { path: path.to_string(), source })?;
        if rec.len() != expected.len() {
            return Err(CorpusError::BadRow {
                path: path.to_string(),
                row: i + 1,
                reason: format!("{} fields, expected {}", rec.len(), expected.len()),
            });
        }
        rows.push(rec);
    }
    Ok(rows)
}

pub(crate) fn parse_time(value: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value.trim())
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

pub(crate) fn format_time(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn parse_records(rows: Vec<csv::StringRecord>, path: &str) -> Result<Vec<ActivityRecord>, CorpusError> {
    let bad = |row: usize, reason: String| CorpusError::BadRow { path: path.to_string(), row, reason };
    let mut out: Vec<ActivityRecord> = Vec::with_capacity(rows.len());
    let mut seen = HashSet::new();
    for (i, rec) in rows.iter().enumerate() {
        let row = i + 1;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let post_id = field(0).trim().to_string();
        if post_id.is_empty() {
            return Err(bad(row, "empty post_id".into()));
        }
        let user_id = field(3).trim().to_string();
        if user_id.is_empty() {
            return Err(bad(row, "empty user_id".into()));
        }
        let count = |k: usize, name: &str| -> Result<u64, CorpusError> {
            let v = field(k).trim();
            if v.is_empty() {
                return Ok(0);
            }
            v.parse::<u64>()
                .map_err(|_| bad(row, format!("{name} `{v}` is not a nonnegative integer")))
        };
        let react_count = count(4, "react_count")?;
        let share_count = count(5, "share_count")?;
        let time = parse_time(field(7)).ok_or_else(|| CorpusError::BadTimestamp {
            path: path.to_string(),
            row,
            value: field(7).to_string(),
        })?;
        if !seen.insert(post_id.clone()) {
            return Err(CorpusError::DuplicateId { path: path.to_string(), row, id: post_id });
        }
        let language = match field(6).trim() {
            "" => "und".to_string(),
            l => l.to_string(),
        };
        let parent = field(8).trim();
        out.push(ActivityRecord {
            post_id,
            content: field(1).to_string(),
            user_name: field(2).to_string(),
            user_id,
            react_count,
            share_count,
            language,
            time,
            parent_post_id: (!parent.is_empty()).then(|| parent.to_string()),
            comment_thread: Vec::new(),
        });
    }

    let index: HashMap<String, usize> = out
        .iter()
        .enumerate()
        .map(|(i, r)| (r.post_id.clone(), i))
        .collect();
    for child in 0..out.len() {
        if let Some(p) = out[child].parent_post_id.clone() {
            if let Some(&pi) = index.get(&p) {
                let id = out[child].post_id.clone();
                out[pi].comment_thread.push(id);
            }
        }
    }
    Ok(out)
}

/// Parses an activity CSV into raw records without any window filtering.
pub fn read_activity_records(path: &Path) -> Result<Vec<ActivityRecord>, CorpusError> {
    records_from_reader(open(path)?, &path.display().to_string())
}

pub(crate) fn records_from_reader<R: Read>(reader: R, name: &str) -> Result<Vec<ActivityRecord>, CorpusError> {
    let rows = read_table(reader, name, &ACTIVITY_HEADER)?;
    parse_records(rows, name)
}

pub(crate) fn records_to_documents(
    records: Vec<ActivityRecord>,
    name: &str,
    dataset_no: u8,
    owner_id: Option<&str>,
    window: &TimeWindow,
) -> Result<Vec<Document>, CorpusError> {
    if !(1..=9).contains(&dataset_no) {
        return Err(CorpusError::BadDatasetNo(dataset_no));
    }
    let activity_type =
        ActivityType::for_dataset(dataset_no).ok_or(CorpusError::NotAnActivityDataset(dataset_no))?;
    let dependent = is_dependent_dataset(dataset_no);
    let mut docs = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        if r.parent_post_id.is_some() != dependent {
            let reason = if dependent {
                format!("dataset {dataset_no} rows need a parent_post_id")
            } else {
                format!("dataset {dataset_no} rows must not have a parent_post_id")
            };
            return Err(CorpusError::BadRow { path: name.to_string(), row: i + 1, reason });
        }
        if !window.contains(r.time) {
            continue;
        }
        docs.push(Document {
            doc_id: r.post_id,
            owner_id: owner_id.map(str::to_string).unwrap_or(r.user_id),
            text: r.content,
            dataset_no,
            activity_type,
            parent_doc_id: r.parent_post_id,
            time: r.time,
            language: r.language,
        });
    }
    Ok(docs)
}

/// Loads one content dataset. With `owner_id` set every document is
/// attributed to that user; otherwise the row's `user_id` is the owner.
/// Rows outside `window` are dropped.
pub fn load_activity_csv(
    path: &Path,
    dataset_no: u8,
    owner_id: Option<&str>,
    window: &TimeWindow,
) -> Result<Vec<Document>, CorpusError> {
    let records = read_activity_records(path)?;
    records_to_documents(records, &path.display().to_string(), dataset_no, owner_id, window)
}

/// Writes records in the activity CSV layout.
pub fn write_activity_csv<W: Write>(writer: W, records: &[ActivityRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ACTIVITY_HEADER)?;
    for r in records {
        w.write_record([
            r.post_id.as_str(),
            r.content.as_str(),
            r.user_name.as_str(),
            r.user_id.as_str(),
            &r.react_count.to_string(),
            &r.share_count.to_string(),
            r.language.as_str(),
            &format_time(&r.time),
            r.parent_post_id.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

impl ActivityRecord {
    /// Rebuilds a row from a document; counts are not kept on documents and
    /// come back as zero.
    pub fn from_document(doc: &Document) -> Self {
        ActivityRecord {
            post_id: doc.doc_id.clone(),
            content: doc.text.clone(),
            user_name: doc.owner_id.clone(),
            user_id: doc.owner_id.clone(),
            react_count: 0,
            share_count: 0,
            language: doc.language.clone(),
            time: doc.time,
            parent_post_id: doc.parent_doc_id.clone(),
            comment_thread: Vec::new(),
        }
    }
}

/// Loads the Dataset 5 member list exactly as stored (duplicates kept).
pub fn load_members_csv(path: &Path) -> Result<Vec<InteractedMember>, CorpusError> {
    let p = path.display().to_string();
    members_from_reader(open(path)?, &p)
}

pub(crate) fn members_from_reader<R: Read>(reader: R, name: &str) -> Result<Vec<InteractedMember>, CorpusError> {
    let rows = read_table(reader, name, &MEMBER_HEADER)?;
    let bad = |row: usize, reason: String| CorpusError::BadRow { path: name.to_string(), row, reason };
    let mut out = Vec::with_capacity(rows.len());
    for (i, rec) in rows.iter().enumerate() {
        let row = i + 1;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let member_id = field(0);
        if member_id.is_empty() {
            return Err(bad(row, "empty member_id".into()));
        }
        let kind = field(2).parse().map_err(|e: String| bad(row, e))?;
        let activity_types = field(3)
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<ActivityType>())
            .collect::<Result<BTreeSet<_>, _>>()
            .map_err(|e| bad(row, e))?;
        if activity_types.is_empty() {
            return Err(bad(row, "no activity types".into()));
        }
        let connections_count = match field(4) {
            "" => None,
            v => Some(
                v.parse::<u64>()
                    .map_err(|_| bad(row, format!("connections_count `{v}` is not a nonnegative integer")))?,
            ),
        };
        out.push(InteractedMember {
            member_id: member_id.to_string(),
            display_name: field(1).to_string(),
            kind,
            activity_types,
            connections_count,
        });
    }
    Ok(out)
}

pub fn write_members_csv<W: Write>(writer: W, members: &[InteractedMember]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MEMBER_HEADER)?;
    for m in members {
        let types: Vec<&str> = m.activity_types.iter().map(|a| a.name()).collect();
        w.write_record([
            m.member_id.as_str(),
            m.display_name.as_str(),
            m.kind.name(),
            &types.join(";"),
            &m.connections_count.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
