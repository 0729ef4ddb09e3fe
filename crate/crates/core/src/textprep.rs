//! Primary text cleanup applied to every content document: language
//! handling, mention harvesting, noise removal and case/spelling
//! normalization.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::corpus::{DocId, Document, UserId};

#[derive(Debug, thiserror::Error)]
pub enum TextPrepError {
    #[error("translator unavailable: {0}")]
    TranslatorUnavailable(String),
    #[error("document {0} is from dataset 5, which holds members rather than text")]
    MemberDataset(DocId),
    #[error("dictionary line {line}: {reason}")]
    BadDictionary { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// External machine translation into English.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, source_language: &str) -> Result<String, String>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanDocument {
    pub doc_id: DocId,
    pub owner_id: UserId,
    pub text: String,
    pub mentions: Vec<String>,
    pub flagged_non_english: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    English,
    Other,
}

// Common English words used for language identification.
const ENGLISH_MARKERS: &str = "the a an and or but if of to in on at by for with from about as into \
    is are was were be been being am have has had do does did will would can could should may might must \
    i you he she it we they me him her us them my your his its our their this that these those there here \
    what who when where why how which not no yes all any some more most very so just now then than too \
    up out over after before again new good great day time today people one two get got go going make like \
    know think see say said want need love thanks thank hello hi hey well really still";

// Function words of other common Latin-script languages.
const FOREIGN_MARKERS: &str = "bonjour merci le la les des du un une et est sont avec pour dans pas je tu il \
    nous vous ils elle mais tres bien oui non cest quoi hola gracias el los las una es y por para con como \
    pero muy que esta estoy buenos dias der die das und ist nicht ich du wir sie ein eine mit auf zu danke \
    guten tag ja nein ciao grazie sono della questo molto bene obrigado voce nao uma isso";

fn marker_sets() -> &'static (HashSet<&'static str>, HashSet<&'static str>) {
    static SETS: OnceLock<(HashSet<&'static str>, HashSet<&'static str>)> = OnceLock::new();
    SETS.get_or_init(|| {
        (
            ENGLISH_MARKERS.split_whitespace().collect(),
            FOREIGN_MARKERS.split_whitespace().collect(),
        )
    })
}

/// Guesses whether `text` is English. A language hint such as `en` or `fr`
/// wins when present; `und` or an empty hint falls back to script and
/// function-word heuristics.
pub fn detect_language(text: &str, hint: Option<&str>) -> Language {
    if let Some(h) = hint.map(|h| h.trim().to_ascii_lowercase()) {
        if h == "en" || h.starts_with("en-") || h.starts_with("en_") {
            return Language::English;
        }
        if !h.is_empty() && h != "und" {
            return Language::Other;
        }
    }
    let letters: Vec<char> = text.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return Language::English;
    }
    let non_ascii = letters.iter().filter(|c| !c.is_ascii()).count();
    if non_ascii * 10 > letters.len() * 3 {
        return Language::Other;
    }
    let (english, foreign) = marker_sets();
    let lower = text.to_lowercase();
    let mut en_hits = 0;
    let mut foreign_hits = 0;
    for word in lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        if english.contains(word) {
            en_hits += 1;
        }
        if foreign.contains(word) {
            foreign_hits += 1;
        }
    }
    if foreign_hits > en_hits {
        Language::Other
    } else {
        Language::English
    }
}

/// Returns the (possibly translated) text and whether it is still non-English.
pub fn detect_and_translate(
    text: &str,
    language_hint: Option<&str>,
    translator: Option<&dyn Translator>,
) -> Result<(String, bool), TextPrepError> {
    if detect_language(text, language_hint) == Language::English {
        return Ok((text.to_string(), false));
    }
    match translator {
        Some(t) => {
            let source = language_hint.unwrap_or("und");
            let translated = t
                .translate(text, source)
                .map_err(TextPrepError::TranslatorUnavailable)?;
            Ok((translated, false))
        }
        None => Ok((text.to_string(), true)),
    }
}

/// Removes every whitespace-delimited token that starts with `@` and returns
/// the mentioned names (leading `@`s and trailing punctuation dropped) in
/// first-seen order without duplicates.
pub fn extract_mentions(text: &str) -> (String, Vec<String>) {
    let mut kept = Vec::new();
    let mut mentions: Vec<String> = Vec::new();
    for token in text.split_whitespace() {
        if let Some(rest) = token.strip_prefix('@') {
            let name: String = rest
                .trim_start_matches('@')
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            if !name.is_empty() && !mentions.contains(&name) {
                mentions.push(name);
            }
        } else {
            kept.push(token);
        }
    }
    (kept.join(" "), mentions)
}

fn keep_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == ',' || c == '.'
}

/// Drops symbols, emoji and non-ASCII letters, keeps commas and full stops,
/// and collapses whitespace to single spaces.
pub fn strip_noise(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if keep_char(c) {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

pub fn lowercase(text: &str) -> String {
    text.to_lowercase()
}

/// Unigram frequencies for edit-distance-1 spelling correction.
#[derive(Debug, Clone, Default)]
pub struct SpellDictionary {
    counts: HashMap<String, u64>,
}

impl SpellDictionary {
    pub fn from_counts<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        SpellDictionary {
            counts: entries.into_iter().map(|(w, c)| (w.into().to_lowercase(), c)).collect(),
        }
    }

    /// Parses `word<TAB>count` lines.
    pub fn parse(text: &str) -> Result<Self, TextPrepError> {
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or_else(|| TextPrepError::BadDictionary {
                line: i + 1,
                reason: "expected word<TAB>count".into(),
            })?;
            let count = count.trim().parse::<u64>().map_err(|_| TextPrepError::BadDictionary {
                line: i + 1,
                reason: format!("bad count `{count}`"),
            })?;
            counts.insert(word.trim().to_lowercase(), count);
        }
        Ok(SpellDictionary { counts })
    }

    pub fn load(path: &Path) -> Result<Self, TextPrepError> {
        let text = std::fs::read_to_string(path).map_err(|source| TextPrepError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    /// Most frequent dictionary word one edit away; ties go to the
    /// lexicographically smallest word.
    pub fn correction(&self, word: &str) -> Option<&str> {
        let mut best: Option<(&str, u64)> = None;
        for cand in edits1(word) {
            if let Some((w, &c)) = self.counts.get_key_value(cand.as_str()) {
                let better = match best {
                    None => true,
                    Some((bw, bc)) => c > bc || (c == bc && w.as_str() < bw),
                };
                if better {
                    best = Some((w.as_str(), c));
                }
            }
        }
        best.map(|(w, _)| w)
    }
}

/// All strings at edit distance one over `a-z`: deletes, transposes,
/// replaces and inserts.
pub fn edits1(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    let mut out = Vec::with_capacity(54 * n + 25);
    let build = |parts: &[&[char]]| parts.iter().flat_map(|p| p.iter()).collect::<String>();
    for i in 0..n {
        out.push(build(&[&chars[..i], &chars[i + 1..]]));
    }
    for i in 0..n.saturating_sub(1) {
        let mut c = chars.clone();
        c.swap(i, i + 1);
        out.push(c.into_iter().collect());
    }
    for i in 0..n {
        for l in 'a'..='z' {
            if l != chars[i] {
                out.push(build(&[&chars[..i], &[l], &chars[i + 1..]]));
            }
        }
    }
    for i in 0..=n {
        for l in 'a'..='z' {
            out.push(build(&[&chars[..i], &[l], &chars[i..]]));
        }
    }
    out
}

/// Lowercases and, with a dictionary, replaces unknown alphabetic words by
/// their best one-edit correction.
pub fn normalize_case_and_spell(text: &str, dictionary: Option<&SpellDictionary>) -> String {
    let lower = lowercase(text);
    let Some(dict) = dictionary else {
        return lower;
    };
    let mut out = String::with_capacity(lower.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if !word.is_empty() {
            match dict.contains(word) {
                true => out.push_str(word),
                false => out.push_str(dict.correction(word).unwrap_or(word)),
            }
            word.clear();
        }
    };
    for c in lower.chars() {
        if c.is_ascii_lowercase() {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

#[derive(Default, Clone, Copy)]
pub struct PrepConfig<'a> {
    pub translator: Option<&'a dyn Translator>,
    pub dictionary: Option<&'a SpellDictionary>,
}

/// Runs translation, mention extraction, noise removal and case/spelling
/// normalization in that order.
pub fn primary_preprocess(doc: &Document, config: &PrepConfig<'_>) -> Result<CleanDocument, TextPrepError> {
    if doc.dataset_no == 5 {
        return Err(TextPrepError::MemberDataset(doc.doc_id.clone()));
    }
    let (text, flagged) = detect_and_translate(&doc.text, Some(&doc.language), config.translator)?;
    let (text, mentions) = extract_mentions(&text);
    let text = strip_noise(&text);
    let text = normalize_case_and_spell(&text, config.dictionary);
    Ok(CleanDocument {
        doc_id: doc.doc_id.clone(),
        owner_id: doc.owner_id.clone(),
        text,
        mentions,
        flagged_non_english: flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ActivityType;
    use chrono::{TimeZone, Utc};

    fn doc(text: &str, dataset_no: u8) -> Document {
        Document {
            doc_id: "d1".into(),
            owner_id: "ego".into(),
            text: text.into(),
            dataset_no,
            activity_type: ActivityType::Post,
            parent_doc_id: None,
            time: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
            language: "und".into(),
        }
    }

    struct Upper;
    impl Translator for Upper {
        fn translate(&self, text: &str, _: &str) -> Result<String, String> {
            Ok(format!("translated {text}"))
        }
    }

    struct Down;
    impl Translator for Down {
        fn translate(&self, _: &str, _: &str) -> Result<String, String> {
            Err("connection refused".into())
        }
    }

    #[test]
    fn english_passes_through() {
        assert_eq!(detect_and_translate("hello there", None, None).unwrap(), ("hello there".into(), false));
    }

    #[test]
    fn foreign_flagged_without_translator() {
        assert_eq!(detect_and_translate("bonjour", None, None).unwrap(), ("bonjour".into(), true));
        let (t, f) = detect_and_translate("bonjour", None, Some(&Upper)).unwrap();
        assert_eq!((t.as_str(), f), ("translated bonjour", false));
        assert!(matches!(
            detect_and_translate("bonjour", None, Some(&Down)),
            Err(TextPrepError::TranslatorUnavailable(_))
        ));
        // an English document never reaches the translator
        assert!(detect_and_translate("hello there", None, Some(&Down)).is_ok());
    }

    #[test]
    fn language_hints_win() {
        assert_eq!(detect_language("bonjour", Some("en")), Language::English);
        assert_eq!(detect_language("hello there", Some("es")), Language::Other);
        assert_eq!(detect_language("Привет как дела", Some("und")), Language::Other);
        assert_eq!(detect_language("", None), Language::English);
    }

    #[test]
    fn five_foreign_fixtures_flagged() {
        let fixtures = [
            ("bonjour mes amis, merci pour tout", true),
            ("hola amigos, gracias por todo", true),
            ("guten tag, danke und bis bald", true),
            ("ciao, grazie mille sono molto felice", true),
            ("obrigado, isso foi muito bom voce", true),
            ("the match was great today", false),
            ("new policy on tax reform", false),
            ("i love this song", false),
        ];
        let flagged = fixtures
            .iter()
            .filter(|(t, _)| detect_and_translate(t, None, None).unwrap().1)
            .count();
        assert_eq!(flagged, 5);
        for (t, expect) in fixtures {
            assert_eq!(detect_and_translate(t, None, None).unwrap().1, expect, "{t}");
        }
    }

    #[test]
    fn mentions() {
        assert_eq!(
            extract_mentions("hello @alice how are you"),
            ("hello how are you".into(), vec!["alice".to_string()])
        );
        assert_eq!(extract_mentions("no mentions here."), ("no mentions here.".into(), vec![]));
        assert_eq!(
            extract_mentions("@a @b @a hi"),
            ("hi".into(), vec!["a".to_string(), "b".to_string()])
        );
        assert_eq!(extract_mentions("cc @@bob, ok @"), ("cc ok".into(), vec!["bob".to_string()]));
        // an address-like token is not a mention
        assert_eq!(extract_mentions("mail a@b.c"), ("mail a@b.c".into(), vec![]));
    }

    #[test]
    fn noise() {
        assert_eq!(strip_noise("great!!! 😀 #win"), "great win");
        assert_eq!(strip_noise("ok."), "ok.");
        assert_eq!(strip_noise("a,,b...c"), "a,,b...c");
        assert_eq!(strip_noise("  spaced \t\n out  "), "spaced out");
        assert_eq!(strip_noise("don't \u{FFFD} stop"), "dont stop");
        assert_eq!(strip_noise("🚀🚀"), "");
    }

    #[test]
    fn case_and_spelling() {
        assert_eq!(normalize_case_and_spell("Hello World", None), "hello world");
        let dict = SpellDictionary::from_counts([("hello", 10u64), ("help", 3)]);
        assert_eq!(normalize_case_and_spell("helo", Some(&dict)), "hello");
        assert_eq!(normalize_case_and_spell("zzqzz", Some(&dict)), "zzqzz");
        assert_eq!(normalize_case_and_spell("Helo, world.", Some(&dict)), "hello, world.");
    }

    #[test]
    fn spelling_ties_are_lexicographic() {
        // "cat" is one edit from both "bat" and "cot"
        let dict = SpellDictionary::from_counts([("cot", 5u64), ("bat", 5)]);
        assert_eq!(dict.correction("cat"), Some("bat"));
        let dict = SpellDictionary::parse("cot\t9\nbat\t5\n").unwrap();
        assert_eq!(dict.correction("cat"), Some("cot"));
        assert!(SpellDictionary::parse("cot 9").is_err());
    }

    #[test]
    fn edits1_matches_enumeration() {
        // deletes n, transposes n-1, replaces 25n, inserts 26(n+1)
        let e = edits1("helo");
        assert_eq!(e.len(), 4 + 3 + 25 * 4 + 26 * 5);
        assert!(e.contains(&"hello".to_string()));
        assert!(e.contains(&"hleo".to_string()));
    }

    #[test]
    fn full_primary_pass() {
        let clean = primary_preprocess(&doc("Check @Bob NOW!!! 🚀", 1), &PrepConfig::default()).unwrap();
        assert_eq!(clean.text, "check now");
        assert_eq!(clean.mentions, ["Bob"]);
        assert!(!clean.flagged_non_english);

        let same = primary_preprocess(&doc("already clean, text.", 6), &PrepConfig::default()).unwrap();
        assert_eq!(same.text, "already clean, text.");

        assert!(matches!(
            primary_preprocess(&doc("x", 5), &PrepConfig::default()),
            Err(TextPrepError::MemberDataset(_))
        ));
    }
}
