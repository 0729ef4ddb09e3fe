use std::collections::HashMap;

use super::{Bucket, CategoryClassifier, CategoryLabel, ClassifyError, SentimentResult};
use crate::corpus::{is_dependent_dataset, DocId};
use crate::lexproc::{DocumentSet, TokenizedDoc};

/// Classifies an independent document (datasets 1, 4, 6, 9).
pub fn classify_category(doc: &TokenizedDoc, model: &dyn CategoryClassifier) -> Result<CategoryLabel, ClassifyError> {
    if is_dependent_dataset(doc.dataset_no) {
        return Err(ClassifyError::DependentDataset {
            doc_id: doc.doc_id.clone(),
            dataset_no: doc.dataset_no,
        });
    }
    if doc.flagged_non_english {
        return Err(ClassifyError::NonEnglish(doc.doc_id.clone()));
    }
    model.classify_tokens(&doc.tokens)
}

/// Shares and comments take their parent post's category unchanged.
pub fn inherit_category(
    doc: &TokenizedDoc,
    parent_labels: &HashMap<DocId, CategoryLabel>,
) -> Result<CategoryLabel, ClassifyError> {
    let parent = doc
        .parent_doc_id
        .as_ref()
        .ok_or_else(|| ClassifyError::NoParent(doc.doc_id.clone()))?;
    parent_labels
        .get(parent)
        .cloned()
        .ok_or_else(|| ClassifyError::OrphanDocument {
            doc_id: doc.doc_id.clone(),
            parent: parent.clone(),
        })
}

/// Rebuilds the bucket index: every scorable document lands in exactly one
/// bucket, in document order.
pub fn assign_buckets(
    set: &mut DocumentSet,
    labels: &HashMap<DocId, CategoryLabel>,
    sentiments: &HashMap<DocId, SentimentResult>,
) -> Result<(), ClassifyError> {
    let mut index: std::collections::BTreeMap<Bucket, Vec<DocId>> = Default::default();
    for d in set.documents.iter().filter(|d| d.is_scorable()) {
        let label = labels
            .get(&d.doc_id)
            .ok_or_else(|| ClassifyError::Unlabeled(d.doc_id.clone(), "category"))?;
        let s = sentiments
            .get(&d.doc_id)
            .ok_or_else(|| ClassifyError::Unlabeled(d.doc_id.clone(), "sentiment"))?;
        index
            .entry(Bucket::new(label.value, s.polarity))
            .or_default()
            .push(d.doc_id.clone());
    }
    set.bucket_index = index;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{train_category_classifier, Category, Polarity};

    fn doc(id: &str, dataset_no: u8, parent: Option<&str>, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            doc_id: id.into(),
            owner_id: "u".into(),
            dataset_no,
            parent_doc_id: parent.map(str::to_string),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            flagged_non_english: false,
        }
    }

    fn model() -> crate::classify::NaiveBayes {
        let data: Vec<(Vec<String>, Category)> = [
            ("chip code", Category::Technology),
            ("vote senate", Category::Politics),
            ("goal match", Category::Sports),
            ("stock bank", Category::Business),
            ("film song", Category::Entertainment),
        ]
        .iter()
        .map(|(t, c)| (t.split(' ').map(str::to_string).collect(), *c))
        .collect();
        train_category_classifier(data.iter().map(|(t, c)| (t.as_slice(), *c))).unwrap()
    }

    #[test]
    fn dependent_datasets_refused() {
        let m = model();
        let err = classify_category(&doc("c", 3, Some("p"), &["goal"]), &m).unwrap_err();
        assert!(matches!(err, ClassifyError::DependentDataset { dataset_no: 3, .. }));
        assert_eq!(classify_category(&doc("p", 6, None, &["goal"]), &m).unwrap().value, Category::Sports);
    }

    #[test]
    fn inheritance() {
        let mut parents = HashMap::new();
        parents.insert("p1".to_string(), CategoryLabel::certain(Category::Politics));
        parents.insert("p2".to_string(), CategoryLabel::certain(Category::Technology));
        assert_eq!(inherit_category(&doc("c", 3, Some("p1"), &[]), &parents).unwrap().value, Category::Politics);
        assert_eq!(inherit_category(&doc("s", 2, Some("p2"), &[]), &parents).unwrap().value, Category::Technology);
        assert!(matches!(
            inherit_category(&doc("c", 8, Some("gone"), &[]), &parents),
            Err(ClassifyError::OrphanDocument { .. })
        ));
    }

    #[test]
    fn buckets_partition_scorable_docs() {
        let docs: Vec<_> = (0..10).map(|i| doc(&format!("d{i}"), 1, None, &["chip"])).collect();
        let mut set = DocumentSet::from_documents(docs);
        let labels = (0..10)
            .map(|i| (format!("d{i}"), CategoryLabel::certain(Category::Technology)))
            .collect();
        let sent = (0..10)
            .map(|i| (format!("d{i}"), SentimentResult::from_compound(0.5)))
            .collect();
        assign_buckets(&mut set, &labels, &sent).unwrap();
        assert_eq!(set.bucket_index.len(), 1);
        assert_eq!(set.bucket(Bucket::new(Category::Technology, Polarity::Positive)).len(), 10);
    }

    #[test]
    fn inert_docs_skip_buckets_and_missing_labels_fail() {
        let mut set = DocumentSet::from_documents(vec![doc("a", 1, None, &["x"]), doc("b", 1, None, &[])]);
        let labels: HashMap<_, _> = [("a".to_string(), CategoryLabel::certain(Category::Sports))].into();
        let mut sent: HashMap<_, _> = HashMap::new();
        assert!(assign_buckets(&mut set, &labels, &sent).is_err());
        sent.insert("a".to_string(), SentimentResult::from_compound(-0.3));
        assign_buckets(&mut set, &labels, &sent).unwrap();
        let total: usize = set.bucket_index.values().map(Vec::len).sum();
        assert_eq!(total, 1);
        assert_eq!(set.bucket(Bucket::new(Category::Sports, Polarity::Negative)), ["a"]);
    }
}
