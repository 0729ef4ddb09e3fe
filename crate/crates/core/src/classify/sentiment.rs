use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::{ClassifyError, SentimentResult};
use crate::resources;

/// Rule constants of the lexicon-and-rule scorer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentRules {
    /// Multiplier applied to a hit preceded by a negator.
    pub negation_scalar: f64,
    /// How many preceding tokens are searched for a negator.
    pub negation_window: usize,
    /// Added toward the hit's sign when a booster immediately precedes it.
    pub booster_increment: f64,
    /// `alpha` in S / sqrt(S^2 + alpha).
    pub normalization_alpha: f64,
}

impl Default for SentimentRules {
    fn default() -> Self {
        SentimentRules {
            negation_scalar: -0.74,
            negation_window: 3,
            booster_increment: 0.293,
            normalization_alpha: 15.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SentimentAnalyzer {
    lexicon: HashMap<String, f64>,
    negators: HashSet<String>,
    boosters: HashSet<String>,
    pub rules: SentimentRules,
}

fn parse_lexicon(text: &str) -> Result<HashMap<String, f64>, ClassifyError> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| ClassifyError::BadResource { line: i + 1, reason };
        let mut cols = line.split('\t');
        let (Some(word), Some(v)) = (cols.next(), cols.next()) else {
            return Err(bad("expected word<TAB>valence".into()));
        };
        let v: f64 = v.trim().parse().map_err(|_| bad(format!("bad valence `{v}`")))?;
        if !(-4.0..=4.0).contains(&v) {
            return Err(bad(format!("valence {v} outside [-4, 4]")));
        }
        out.insert(word.trim().to_lowercase(), v);
    }
    Ok(out)
}

impl SentimentAnalyzer {
    pub fn from_parts(lexicon: &str, negators: &str, boosters: &str) -> Result<Self, ClassifyError> {
        let lexicon = parse_lexicon(lexicon)?;
        if lexicon.is_empty() {
            return Err(ClassifyError::MissingLexicon);
        }
        Ok(SentimentAnalyzer {
            lexicon,
            negators: resources::word_list(negators).into_iter().collect(),
            boosters: resources::word_list(boosters).into_iter().collect(),
            rules: SentimentRules::default(),
        })
    }

    pub fn builtin() -> Self {
        Self::from_parts(resources::LEXICON, resources::NEGATORS, resources::BOOSTERS)
            .expect("builtin lexicon is well formed")
    }

    /// Loads the three resource files; `None` paths fall back to the builtin
    /// negator and booster lists.
    pub fn load(lexicon: &Path, negators: Option<&Path>, boosters: Option<&Path>) -> Result<Self, ClassifyError> {
        let lex = std::fs::read_to_string(lexicon).map_err(|_| ClassifyError::MissingLexicon)?;
        let read = |p: Option<&Path>, default: &str| -> Result<String, ClassifyError> {
            match p {
                None => Ok(default.to_string()),
                Some(p) => std::fs::read_to_string(p).map_err(|e| ClassifyError::BadResource {
                    line: 0,
                    reason: format!("{}: {e}", p.display()),
                }),
            }
        };
        Self::from_parts(
            &lex,
            &read(negators, resources::NEGATORS)?,
            &read(boosters, resources::BOOSTERS)?,
        )
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.lexicon.get(word).copied()
    }

    pub fn lexicon(&self) -> impl Iterator<Item = (&str, f64)> {
        self.lexicon.iter().map(|(w, v)| (w.as_str(), *v))
    }

    pub fn negators(&self) -> impl Iterator<Item = &str> {
        self.negators.iter().map(String::as_str)
    }

    /// Sum of rule-adjusted valences over the text's words.
    pub fn valence_sum(&self, text: &str) -> f64 {
        let lower = text.to_lowercase();
        let words: Vec<&str> = lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .collect();
        let r = &self.rules;
        let mut sum = 0.0;
        for (i, w) in words.iter().enumerate() {
            let Some(mut v) = self.valence(w) else { continue };
            if v == 0.0 {
                continue;
            }
            if i > 0 && self.boosters.contains(words[i - 1]) {
                v += r.booster_increment * v.signum();
            }
            let start = i.saturating_sub(r.negation_window);
            if words[start..i].iter().any(|p| self.negators.contains(*p)) {
                v *= r.negation_scalar;
            }
            sum += v;
        }
        sum
    }

    pub fn sentiment(&self, text: &str) -> SentimentResult {
        let s = self.valence_sum(text);
        let compound = s / (s * s + self.rules.normalization_alpha).sqrt();
        SentimentResult::from_compound(compound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Polarity;

    #[test]
    fn empty_text_is_positive_zero() {
        let a = SentimentAnalyzer::builtin();
        let r = a.sentiment("");
        assert_eq!(r.compound, 0.0);
        assert_eq!(r.polarity, Polarity::Positive);
    }

    #[test]
    fn single_word_and_negation() {
        let a = SentimentAnalyzer::builtin();
        assert_eq!(a.valence("good"), Some(1.9));
        let good = a.sentiment("good");
        // 1.9 / sqrt(1.9^2 + 15) = 1.9 / sqrt(18.61)
        assert!((good.compound - 1.9 / 18.61f64.sqrt()).abs() < 1e-12);
        assert!((good.compound - 0.4404).abs() < 1e-4);
        assert_eq!(good.polarity, Polarity::Positive);

        assert!((a.valence_sum("not good") - (-1.406)).abs() < 1e-12);
        let neg = a.sentiment("not good");
        // -1.406 / sqrt(1.406^2 + 15) = -1.406 / sqrt(16.976836)
        assert!((neg.compound - (-1.406 / 16.976836f64.sqrt())).abs() < 1e-12);
        assert!((neg.compound - (-0.3412)).abs() < 1e-4);
        assert_eq!(neg.polarity, Polarity::Negative);
    }

    #[test]
    fn negation_window_is_three_tokens() {
        let a = SentimentAnalyzer::builtin();
        assert!(a.valence_sum("not really very good") < 0.0);
        assert!(a.valence_sum("not the big old good") > 0.0);
    }

    #[test]
    fn booster_moves_away_from_zero() {
        let a = SentimentAnalyzer::builtin();
        assert!((a.valence_sum("very good") - (1.9 + 0.293)).abs() < 1e-12);
        assert!((a.valence_sum("very bad") - (-2.5 - 0.293)).abs() < 1e-12);
        // boosted then negated
        assert!((a.valence_sum("not very good") - (1.9 + 0.293) * -0.74).abs() < 1e-12);
    }

    #[test]
    fn resource_errors() {
        assert!(matches!(SentimentAnalyzer::from_parts("", "", ""), Err(ClassifyError::MissingLexicon)));
        assert!(SentimentAnalyzer::from_parts("good\t9.0\n", "", "").is_err());
        assert!(SentimentAnalyzer::from_parts("good 1.0\n", "", "").is_err());
        assert!(matches!(
            SentimentAnalyzer::load(Path::new("/nonexistent"), None, None),
            Err(ClassifyError::MissingLexicon)
        ));
    }
}
