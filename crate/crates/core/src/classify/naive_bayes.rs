use std::collections::BTreeMap;

use super::{Category, CategoryLabel, ClassifyError};

/// Assigns one of the five content categories to a token list.
pub trait CategoryClassifier: Send + Sync {
    fn classify_tokens(&self, tokens: &[String]) -> Result<CategoryLabel, ClassifyError>;
}

/// Multinomial naive Bayes with add-one smoothing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NaiveBayes {
    doc_counts: [u64; 5],
    token_totals: [u64; 5],
    /// word -> per-category occurrence counts
    word_counts: BTreeMap<String, [u64; 5]>,
}

impl NaiveBayes {
    /// A model with no training data; classification fails until trained.
    pub fn untrained() -> Self {
        Self::default()
    }

    pub fn is_trained(&self) -> bool {
        self.doc_counts.iter().sum::<u64>() > 0
    }

    pub fn vocabulary_size(&self) -> usize {
        self.word_counts.len()
    }

    /// ln P(category)
    pub fn log_prior(&self, c: Category) -> f64 {
        let total: u64 = self.doc_counts.iter().sum();
        (self.doc_counts[c.index()] as f64 / total as f64).ln()
    }

    /// Smoothed P(word | category); `None` for words never seen in training.
    pub fn likelihood(&self, word: &str, c: Category) -> Option<f64> {
        let counts = self.word_counts.get(word)?;
        let v = self.word_counts.len() as f64;
        Some((counts[c.index()] as f64 + 1.0) / (self.token_totals[c.index()] as f64 + v))
    }

    pub fn log_posteriors(&self, tokens: &[String]) -> [f64; 5] {
        let v = self.word_counts.len() as f64;
        let mut scores = [0.0; 5];
        for c in Category::ALL {
            scores[c.index()] = self.log_prior(c);
        }
        for t in tokens {
            let Some(counts) = self.word_counts.get(t) else { continue };
            for c in Category::ALL {
                let i = c.index();
                scores[i] += ((counts[i] as f64 + 1.0) / (self.token_totals[i] as f64 + v)).ln();
            }
        }
        scores
    }
}

impl CategoryClassifier for NaiveBayes {
    fn classify_tokens(&self, tokens: &[String]) -> Result<CategoryLabel, ClassifyError> {
        if !self.is_trained() {
            return Err(ClassifyError::UntrainedModel);
        }
        let logs = self.log_posteriors(tokens);
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = logs.map(|l| (l - max).exp());
        let z: f64 = p.iter().sum();
        for x in &mut p {
            *x /= z;
        }
        Ok(CategoryLabel::from_posteriors(p))
    }
}

/// Fits the model from token lists; every category needs at least one example.
pub fn train_category_classifier<'a, I>(labeled: I) -> Result<NaiveBayes, ClassifyError>
where
    I: IntoIterator<Item = (&'a [String], Category)>,
{
    let mut model = NaiveBayes::default();
    for (tokens, c) in labeled {
        let i = c.index();
        model.doc_counts[i] += 1;
        model.token_totals[i] += tokens.len() as u64;
        for t in tokens {
            model.word_counts.entry(t.clone()).or_insert([0; 5])[i] += 1;
        }
    }
    if let Some(c) = Category::ALL.into_iter().find(|c| model.doc_counts[c.index()] == 0) {
        return Err(ClassifyError::MissingCategory(c));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn train(data: &[(Vec<String>, Category)]) -> Result<NaiveBayes, ClassifyError> {
        train_category_classifier(data.iter().map(|(t, c)| (t.as_slice(), *c)))
    }

    #[test]
    fn separable_singletons() {
        let data: Vec<_> = [
            ("chip code", Category::Technology),
            ("vote senate", Category::Politics),
            ("goal match", Category::Sports),
            ("stock bank", Category::Business),
            ("film song", Category::Entertainment),
        ]
        .iter()
        .map(|(t, c)| (toks(t), *c))
        .collect();
        let m = train(&data).unwrap();
        for (t, c) in &data {
            let label = m.classify_tokens(t).unwrap();
            assert_eq!(label.value, *c);
            let sum: f64 = label.scores.values().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_category() {
        let data = vec![(toks("a"), Category::Technology)];
        assert_eq!(train(&data), Err(ClassifyError::MissingCategory(Category::Politics)));
        assert_eq!(
            NaiveBayes::untrained().classify_tokens(&toks("a")),
            Err(ClassifyError::UntrainedModel)
        );
    }

    #[test]
    fn training_is_deterministic_and_order_free() {
        let mut data: Vec<_> = Category::ALL
            .iter()
            .enumerate()
            .map(|(i, c)| (toks(&format!("w{i} shared x{i}")), *c))
            .collect();
        let a = train(&data).unwrap();
        let b = train(&data).unwrap();
        assert_eq!(a, b);
        data.reverse();
        assert_eq!(a, train(&data).unwrap());
    }

    #[test]
    fn empty_document_gets_prior_argmax() {
        let mut data: Vec<_> = Category::ALL.iter().map(|c| (toks("w"), *c)).collect();
        let m = train(&data).unwrap();
        assert_eq!(m.classify_tokens(&[]).unwrap().value, Category::Technology);
        data.push((toks("v"), Category::Business));
        let m = train(&data).unwrap();
        assert_eq!(m.classify_tokens(&[]).unwrap().value, Category::Business);
    }

    #[test]
    fn twenty_doc_likelihoods_match_hand_counts() {
        // four docs per class; the counts below were tallied by hand
        let rows = [
            ("code chip code", Category::Technology),
            ("chip app", Category::Technology),
            ("app code", Category::Technology),
            ("cloud", Category::Technology),
            ("vote law", Category::Politics),
            ("vote vote", Category::Politics),
            ("law tax", Category::Politics),
            ("senate", Category::Politics),
            ("goal goal match", Category::Sports),
            ("match team", Category::Sports),
            ("team goal", Category::Sports),
            ("coach", Category::Sports),
            ("stock bank", Category::Business),
            ("bank tax", Category::Business),
            ("stock stock", Category::Business),
            ("trade", Category::Business),
            ("film song", Category::Entertainment),
            ("song song", Category::Entertainment),
            ("film actor", Category::Entertainment),
            ("code", Category::Entertainment),
        ];
        let data: Vec<_> = rows.iter().map(|(t, c)| (toks(t), *c)).collect();
        let m = train(&data).unwrap();
        // vocabulary: code chip app cloud vote law tax senate goal match team
        // coach stock bank trade film song actor = 18 words
        assert_eq!(m.vocabulary_size(), 18);
        // Technology has 8 tokens, "code" appears 3 times: (3+1)/(8+18)
        assert!((m.likelihood("code", Category::Technology).unwrap() - 4.0 / 26.0).abs() < 1e-15);
        // Entertainment has 7 tokens, "code" once: (1+1)/(7+18)
        assert!((m.likelihood("code", Category::Entertainment).unwrap() - 2.0 / 25.0).abs() < 1e-15);
        // Politics has 7 tokens, "goal" never: 1/(7+18)
        assert!((m.likelihood("goal", Category::Politics).unwrap() - 1.0 / 25.0).abs() < 1e-15);
        // Business "tax" once in 7 tokens: 2/25
        assert!((m.likelihood("tax", Category::Business).unwrap() - 2.0 / 25.0).abs() < 1e-15);
        assert!(m.likelihood("unseen", Category::Sports).is_none());
        assert!((m.log_prior(Category::Sports) - (0.2f64).ln()).abs() < 1e-15);

        // a Sports training doc: posterior by hand from the counts above
        // Sports: 8 tokens; goal 3, match 2 -> P ∝ 0.2 * (4/26)^2 * (3/26)
        // other classes: goal and match unseen -> 0.2 * (1/(n+18))^3
        let label = m.classify_tokens(&toks("goal goal match")).unwrap();
        let raw = [
            0.2 * (1.0f64 / 26.0).powi(3),
            0.2 * (1.0f64 / 25.0).powi(3),
            0.2 * (4.0f64 / 26.0).powi(2) * (3.0 / 26.0),
            0.2 * (1.0f64 / 25.0).powi(3),
            0.2 * (1.0f64 / 25.0).powi(3),
        ];
        let z: f64 = raw.iter().sum();
        assert_eq!(label.value, Category::Sports);
        for c in Category::ALL {
            assert!((label.scores[&c] - raw[c.index()] / z).abs() < 1e-12);
        }
    }
}
