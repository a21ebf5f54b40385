//! Domain clustering: TF-IDF, k-means, LDA refinement and identification.

pub mod corpus;
pub mod kmeans;
pub mod lda;
pub mod text;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use corpus::{keyword_pool, synthetic_corpus, CorpusParams, LabeledDoc};
pub use kmeans::{kmeans, KMeansFit, KMeansParams};
pub use lda::{lda_refine, TopicModel};
pub use text::{preprocess, CorpusVector, Vectorizer};

use crate::canon::{Domain, KnownDomain};
use crate::error::{Error, Result};

/// One input document; `label` is the curator's domain when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusDoc {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
}

impl From<&LabeledDoc> for CorpusDoc {
    fn from(d: &LabeledDoc) -> Self {
        CorpusDoc {
            id: d.id.clone(),
            text: d.text.clone(),
            label: Some(d.domain.short_name().to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub k: usize,
    pub seed: u64,
    pub kmeans: KMeansParams,
    /// LDA topics per cluster; 0 disables refinement.
    pub topics_per_cluster: usize,
    pub lda_iterations: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            k: KnownDomain::ALL.len(),
            seed: 42,
            kmeans: KMeansParams::default(),
            topics_per_cluster: 2,
            lda_iterations: lda::DEFAULT_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    /// Canonical domain name per cluster.
    pub labels: Vec<String>,
    pub inertia_history: Vec<f64>,
    pub topics: Option<Vec<TopicModel>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMatch {
    pub cluster: usize,
    pub label: String,
    pub confidence: f64,
    pub low_confidence: bool,
}

impl DomainMatch {
    pub fn domain(&self) -> Domain {
        Domain::parse(&self.label)
    }
}

/// Majority vote of member labels; ties and unlabeled clusters resolve
/// alphabetically (unlabeled clusters vote by keyword-pool mass instead).
fn label_cluster(members: &[Option<&str>], centroid: &[f64], vocabulary: &[String]) -> String {
    let mut votes: BTreeMap<String, usize> = BTreeMap::new();
    for label in members.iter().flatten() {
        let name = Domain::parse(label).short_name().to_string();
        *votes.entry(name).or_default() += 1;
    }
    if let Some(max) = votes.values().max() {
        return votes
            .iter()
            .find(|(_, v)| *v == max)
            .map(|(k, _)| k.clone())
            .expect("non-empty votes");
    }
    let mut best: Option<(f64, &str)> = None;
    let mut names: Vec<KnownDomain> = KnownDomain::ALL.to_vec();
    names.sort_by_key(|d| d.short_name());
    for d in names {
        let pool = keyword_pool(d);
        let mass: f64 = vocabulary
            .iter()
            .zip(centroid)
            .filter(|(w, _)| pool.contains(&w.as_str()))
            .map(|(_, x)| x)
            .sum();
        if best.is_none_or(|(m, _)| mass > m) {
            best = Some((mass, d.short_name()));
        }
    }
    best.expect("ten domains").1.to_string()
}

/// Fraction of documents whose label is the majority label of their cluster.
pub fn purity(assignments: &[usize], truth: &[&str], k: usize) -> f64 {
    if assignments.is_empty() {
        return 0.0;
    }
    let mut per: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    for (&a, &t) in assignments.iter().zip(truth) {
        *per[a].entry(t).or_default() += 1;
    }
    let hits: usize = per
        .iter()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / assignments.len() as f64
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl ClusterModel {
    pub fn build(docs: &[CorpusDoc], params: &ClusterParams) -> Result<Self> {
        let tokens: Vec<Vec<String>> = docs
            .iter()
            .map(|d| {
                preprocess(&d.text)
                    .map_err(|_| Error::DegenerateInput(format!("document `{}` is empty", d.id)))
            })
            .collect::<Result<_>>()?;
        let vectorizer = Vectorizer::fit(&tokens)?;
        let vectors: Vec<Vec<f64>> = tokens.iter().map(|t| vectorizer.transform(t)).collect();
        let fit = kmeans(&vectors, params.k, params.seed, &params.kmeans)?;
        let labels = (0..params.k)
            .map(|c| {
                let members: Vec<Option<&str>> = docs
                    .iter()
                    .zip(&fit.assignments)
                    .filter(|(_, &a)| a == c)
                    .map(|(d, _)| d.label.as_deref())
                    .collect();
                label_cluster(&members, &fit.centroids[c], &vectorizer.vocabulary)
            })
            .collect();
        let topics = if params.topics_per_cluster > 0 {
            let mut out = Vec::with_capacity(params.k);
            for c in 0..params.k {
                let member_tokens: Vec<Vec<String>> = tokens
                    .iter()
                    .zip(&fit.assignments)
                    .filter(|(_, &a)| a == c)
                    .map(|(t, _)| t.clone())
                    .collect();
                if member_tokens.is_empty() {
                    continue;
                }
                out.push(lda_refine(
                    &member_tokens,
                    params.topics_per_cluster,
                    params.lda_iterations,
                    params.seed.wrapping_add(c as u64),
                )?);
            }
            Some(out)
        } else {
            None
        };
        Ok(ClusterModel {
            k: params.k,
            vocabulary: vectorizer.vocabulary,
            idf: vectorizer.idf,
            centroids: fit.centroids,
            assignments: docs
                .iter()
                .zip(&fit.assignments)
                .map(|(d, &a)| (d.id.clone(), a))
                .collect(),
            labels,
            inertia_history: fit.inertia_history,
            topics,
        })
    }

    pub fn vectorizer(&self) -> Vectorizer {
        Vectorizer::from_parts(self.vocabulary.clone(), self.idf.clone())
    }

    /// Nearest centroid by cosine similarity; ties go to the lowest index.
    pub fn identify_domain(&self, text: &str) -> Result<DomainMatch> {
        let tokens = preprocess(text)?;
        let v = self.vectorizer().transform(&tokens);
        let mut best = (0usize, 0.0f64);
        if norm(&v) > 0.0 {
            for (i, c) in self.centroids.iter().enumerate() {
                let n = norm(c);
                if n == 0.0 {
                    continue;
                }
                let sim = (v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() / n).clamp(0.0, 1.0);
                if sim > best.1 {
                    best = (i, sim);
                }
            }
        }
        Ok(DomainMatch {
            cluster: best.0,
            label: self.labels[best.0].clone(),
            confidence: best.1,
            low_confidence: best.1 == 0.0,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ClusterModel = serde_json::from_str(text)?;
        if m.labels.len() != m.k || m.centroids.len() != m.k || m.idf.len() != m.vocabulary.len() {
            return Err(Error::DegenerateInput(
                "cluster model fields disagree in size".into(),
            ));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(seed: u64) -> Vec<CorpusDoc> {
        synthetic_corpus(&CorpusParams::default(), seed)
            .iter()
            .map(CorpusDoc::from)
            .collect()
    }

    #[test]
    fn pool_words_survive_preprocessing() {
        for d in KnownDomain::ALL {
            for w in keyword_pool(d) {
                assert_eq!(preprocess(w).unwrap(), [w.to_string()]);
            }
        }
    }

    #[test]
    fn synthetic_corpus_clusters_cleanly() {
        let corpus = docs(1);
        let model = ClusterModel::build(&corpus, &ClusterParams::default()).unwrap();
        let assign: Vec<usize> = corpus.iter().map(|d| model.assignments[&d.id]).collect();
        let truth: Vec<&str> = corpus.iter().map(|d| d.label.as_deref().unwrap()).collect();
        assert!(purity(&assign, &truth, model.k) >= 0.9);
        for w in model.inertia_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        for d in &corpus {
            let m = model.identify_domain(&d.text).unwrap();
            assert_eq!(m.cluster, model.assignments[&d.id]);
        }
        let finance = model
            .identify_domain("loan credit bank income interest mortgage borrower emi")
            .unwrap();
        assert_eq!(finance.domain().to_string(), "Finance & Banking");
        assert!(!finance.low_confidence);
    }

    #[test]
    fn no_overlap_is_flagged() {
        let model = ClusterModel::build(&docs(2), &ClusterParams::default()).unwrap();
        let m = model.identify_domain("zebra quantum origami").unwrap();
        assert_eq!(m.cluster, 0);
        assert_eq!(m.confidence, 0.0);
        assert!(m.low_confidence);
    }

    #[test]
    fn model_round_trips_and_is_deterministic() {
        let corpus = docs(3);
        let a = ClusterModel::build(&corpus, &ClusterParams::default()).unwrap();
        let b = ClusterModel::build(&corpus, &ClusterParams::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ClusterModel::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn alphabetical_tie_break() {
        let members = [Some("Travel"), Some("Finance & Banking")];
        assert_eq!(label_cluster(&members, &[], &[]), "Finance");
    }
}
