//! Default linguistic resources compiled into the library. Each one can be
//! replaced by a file of the same layout at run time.

use std::collections::BTreeMap;

use crate::classify::Category;

pub const STOP_WORDS: &str = include_str!("../resources/stopwords_en.txt");
pub const LEMMAS: &str = include_str!("../resources/lemmas_en.tsv");
pub const LEXICON: &str = include_str!("../resources/lexicon_en.tsv");
pub const NEGATORS: &str = include_str!("../resources/negators.txt");
pub const BOOSTERS: &str = include_str!("../resources/boosters.txt");
pub const TRAINING_DEMO: &str = include_str!("../resources/training_demo.csv");
pub const TOPICS: &str = include_str!("../resources/topics.tsv");
pub const FILLER: &str = include_str!("../resources/filler.txt");

/// Non-empty, trimmed lines that do not start with `#`.
pub fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn word_list(text: &str) -> Vec<String> {
    content_lines(text).map(|l| l.to_lowercase()).collect()
}

/// Per-category word weights from `category<TAB>word<TAB>weight` lines.
pub fn parse_topic_profiles(text: &str) -> Result<BTreeMap<Category, Vec<(String, f64)>>, String> {
    let mut out: BTreeMap<Category, Vec<(String, f64)>> = BTreeMap::new();
    for (i, line) in content_lines(text).enumerate() {
        let mut cols = line.split('\t');
        let (Some(c), Some(w), Some(x)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(format!("topic line {}: expected three tab-separated columns", i + 1));
        };
        let category: Category = c.parse()?;
        let weight: f64 = x
            .trim()
            .parse()
            .map_err(|_| format!("topic line {}: bad weight `{x}`", i + 1))?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(format!("topic line {}: weight must be positive", i + 1));
        }
        out.entry(category).or_default().push((w.trim().to_lowercase(), weight));
    }
    Ok(out)
}

pub fn builtin_topic_profiles() -> BTreeMap<Category, Vec<(String, f64)>> {
    parse_topic_profiles(TOPICS).expect("builtin topic table is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tables_parse() {
        let topics = builtin_topic_profiles();
        assert_eq!(topics.len(), 5);
        assert!(topics.values().all(|ws| ws.len() == 30));
        assert!(word_list(STOP_WORDS).contains(&"the".to_string()));
        assert!(word_list(FILLER).len() > 50);
    }
}
