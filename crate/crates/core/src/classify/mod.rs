//! Content categories, two-class sentiment and the (category, sentiment)
//! buckets that scoring is confined to.

mod bucket;
mod naive_bayes;
mod sentiment;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bucket::{assign_buckets, classify_category, inherit_category};
pub use naive_bayes::{train_category_classifier, CategoryClassifier, NaiveBayes};
pub use sentiment::{SentimentAnalyzer, SentimentRules};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("no training example for category {0}")]
    MissingCategory(Category),
    #[error("category model has not been trained")]
    UntrainedModel,
    #[error("document {doc_id} belongs to dependent dataset {dataset_no}; it inherits its parent's category")]
    DependentDataset { doc_id: String, dataset_no: u8 },
    #[error("document {doc_id} has no classified parent {parent}")]
    OrphanDocument { doc_id: String, parent: String },
    #[error("document {0} is flagged non-English and is not classified")]
    NonEnglish(String),
    #[error("document {0} has no parent id")]
    NoParent(String),
    #[error("sentiment lexicon is missing or empty")]
    MissingLexicon,
    #[error("document {0} has no {1} label")]
    Unlabeled(String, &'static str),
    #[error("bad resource line {line}: {reason}")]
    BadResource { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Technology,
    Politics,
    Sports,
    Business,
    Entertainment,
}

impl Category {
    /// Declaration order doubles as the tie-break order.
    pub const ALL: [Category; 5] = [
        Category::Technology,
        Category::Politics,
        Category::Sports,
        Category::Business,
        Category::Entertainment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Technology => "Technology",
            Category::Politics => "Politics",
            Category::Sports => "Sports",
            Category::Business => "Business",
            Category::Entertainment => "Entertainment",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s) || (s.eq_ignore_ascii_case("tech") && *c == Category::Technology))
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Positive, Polarity::Negative];

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Positive => "Positive",
            Polarity::Negative => "Negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Polarity::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown sentiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bucket {
    pub category: Category,
    pub polarity: Polarity,
}

impl Bucket {
    pub fn new(category: Category, polarity: Polarity) -> Self {
        Bucket { category, polarity }
    }

    /// All ten buckets, category-major.
    pub fn all() -> impl Iterator<Item = Bucket> {
        Category::ALL
            .into_iter()
            .flat_map(|c| Polarity::ALL.into_iter().map(move |p| Bucket::new(c, p)))
    }

    /// File-name friendly form, e.g. `politics-positive`.
    pub fn slug(&self) -> String {
        format!(
            "{}-{}",
            self.category.name().to_lowercase(),
            self.polarity.name().to_lowercase()
        )
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.category, self.polarity)
    }
}

impl FromStr for Bucket {
    type Err = String;

    /// Accepts `Politics/Positive`, `politics-positive` or `politics:positive`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(['/', '-', ':']);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(c), Some(p), None) => Ok(Bucket::new(c.parse()?, p.parse()?)),
            _ => Err(format!("bucket `{s}` should look like Category/Sentiment")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryLabel {
    pub value: Category,
    /// Posterior per category, in `Category::ALL` order.
    pub scores: BTreeMap<Category, f64>,
}

impl CategoryLabel {
    /// Label from normalized posteriors; argmax with ties to the earlier category.
    pub fn from_posteriors(posteriors: [f64; 5]) -> Self {
        let mut best = 0;
        for i in 1..5 {
            if posteriors[i] > posteriors[best] {
                best = i;
            }
        }
        CategoryLabel {
            value: Category::ALL[best],
            scores: Category::ALL.into_iter().zip(posteriors).collect(),
        }
    }

    /// A label that is certain of one category, used for inherited labels.
    pub fn certain(category: Category) -> Self {
        let mut p = [0.0; 5];
        p[category.index()] = 1.0;
        CategoryLabel::from_posteriors(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub polarity: Polarity,
    pub compound: f64,
}

impl SentimentResult {
    pub fn from_compound(compound: f64) -> Self {
        let compound = compound.clamp(-1.0, 1.0);
        let polarity = if compound >= 0.0 { Polarity::Positive } else { Polarity::Negative };
        SentimentResult { polarity, compound }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_buckets() {
        let all: Vec<_> = Bucket::all().collect();
        assert_eq!(all.len(), 10);
        let uniq: std::collections::BTreeSet<_> = all.iter().collect();
        assert_eq!(uniq.len(), 10);
    }

    #[test]
    fn bucket_parsing() {
        let b: Bucket = "Politics/Positive".parse().unwrap();
        assert_eq!(b, Bucket::new(Category::Politics, Polarity::Positive));
        assert_eq!(b.slug().parse::<Bucket>().unwrap(), b);
        assert!("sports".parse::<Bucket>().is_err());
    }

    #[test]
    fn posterior_ties_follow_enum_order() {
        let l = CategoryLabel::from_posteriors([0.1, 0.3, 0.3, 0.2, 0.1]);
        assert_eq!(l.value, Category::Politics);
        let flat = CategoryLabel::from_posteriors([0.2; 5]);
        assert_eq!(flat.value, Category::Technology);
    }

    #[test]
    fn zero_compound_is_positive() {
        assert_eq!(SentimentResult::from_compound(0.0).polarity, Polarity::Positive);
        assert_eq!(SentimentResult::from_compound(-1e-12).polarity, Polarity::Negative);
    }
}
