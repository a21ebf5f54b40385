use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOPWORDS: &str = include_str!("../../data/stopwords.txt");

pub fn stopwords() -> &'static BTreeSet<&'static str> {
    static SET: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Lowercase alphanumeric tokens minus stop words and single characters.
pub fn preprocess(text: &str) -> Result<Vec<String>> {
    let stop = stopwords();
    let tokens: Vec<String> = text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !stop.contains(t))
        .map(String::from)
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(tokens)
}

/// Sparse TF-IDF vector of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusVector {
    pub doc_id: String,
    pub tfidf: BTreeMap<String, f64>,
}

/// Vocabulary and smoothed idf, `ln((1 + n) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectorizer {
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    index: BTreeMap<String, usize>,
}

impl Vectorizer {
    pub fn fit(docs: &[Vec<String>]) -> Result<Self> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let uniq: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
            for t in uniq {
                *df.entry(t).or_default() += 1;
            }
        }
        if df.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let n = docs.len() as f64;
        let vocabulary: Vec<String> = df.keys().map(|t| t.to_string()).collect();
        let idf = df
            .values()
            .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        Ok(Self::from_parts(vocabulary, idf))
    }

    pub fn from_parts(vocabulary: Vec<String>, idf: Vec<f64>) -> Self {
        let index = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vectorizer {
            vocabulary,
            idf,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    /// L2-normalized dense vector; all zeros when no token is in vocabulary.
    pub fn transform(&self, tokens: &[String]) -> Vec<f64> {
        let mut v = vec![0.0; self.vocabulary.len()];
        for t in tokens {
            if let Some(&i) = self.index.get(t) {
                v[i] += 1.0;
            }
        }
        for (x, idf) in v.iter_mut().zip(&self.idf) {
            *x *= idf;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }

    pub fn sparse(&self, doc_id: &str, dense: &[f64]) -> CorpusVector {
        CorpusVector {
            doc_id: doc_id.to_string(),
            tfidf: dense
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(i, w)| (self.vocabulary[i].clone(), *w))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_stop_words_and_short_tokens() {
        assert_eq!(
            preprocess("The loan was approved").unwrap(),
            ["loan", "approved"]
        );
        assert_eq!(preprocess("A b, c-d: KYC!").unwrap(), ["kyc"]);
        assert!(matches!(preprocess(""), Err(Error::EmptyDocument)));
        assert!(matches!(
            preprocess("the of and"),
            Err(Error::EmptyDocument)
        ));
    }

    #[test]
    fn tfidf_is_normalized_and_nonnegative() {
        let docs: Vec<Vec<String>> = ["loan credit loan", "patient doctor", "loan patient"]
            .iter()
            .map(|d| preprocess(d).unwrap())
            .collect();
        let v = Vectorizer::fit(&docs).unwrap();
        for d in &docs {
            let x = v.transform(d);
            let norm: f64 = x.iter().map(|w| w * w).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(x.iter().all(|w| *w >= 0.0));
            assert!(!v.sparse("d", &x).tfidf.is_empty());
        }
        assert!(v
            .transform(&["unseen".to_string()])
            .iter()
            .all(|w| *w == 0.0));
    }
}
