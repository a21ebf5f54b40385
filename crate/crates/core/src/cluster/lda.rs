//! Collapsed Gibbs sampling LDA.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 200;
pub const BETA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub vocabulary: Vec<String>,
    pub alpha: f64,
    pub beta: f64,
    /// topics × vocabulary
    pub topic_word: Vec<Vec<f64>>,
    /// documents × topics
    pub doc_topic: Vec<Vec<f64>>,
}

impl TopicModel {
    /// The `n` most probable words of `topic`, ties by vocabulary order.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.vocabulary.len()).collect();
        let row = &self.topic_word[topic];
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.into_iter()
            .take(n)
            .map(|i| self.vocabulary[i].as_str())
            .collect()
    }
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    for x in row.iter_mut() {
        *x /= s;
    }
}

pub fn lda_refine(
    docs: &[Vec<String>],
    topics: usize,
    iterations: usize,
    seed: u64,
) -> Result<TopicModel> {
    if topics == 0 {
        return Err(Error::TopicModel("topic count must be at least 1".into()));
    }
    if docs.is_empty() {
        return Err(Error::TopicModel("no documents".into()));
    }
    let distinct: BTreeSet<&str> = docs.iter().flatten().map(String::as_str).collect();
    if distinct.is_empty() {
        return Err(Error::TopicModel("vocabulary is empty".into()));
    }
    let vocabulary: Vec<String> = distinct.into_iter().map(String::from).collect();
    let word_id: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let v = vocabulary.len();
    let alpha = 50.0 / topics as f64;
    let beta = BETA;

    let words: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().map(|t| word_id[t.as_str()]).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n_dt = vec![vec![0usize; topics]; docs.len()];
    let mut n_tw = vec![vec![0usize; v]; topics];
    let mut n_t = vec![0usize; topics];
    let mut z: Vec<Vec<usize>> = words
        .iter()
        .enumerate()
        .map(|(d, ws)| {
            ws.iter()
                .map(|&w| {
                    let t = rng.gen_range(0..topics);
                    n_dt[d][t] += 1;
                    n_tw[t][w] += 1;
                    n_t[t] += 1;
                    t
                })
                .collect()
        })
        .collect();

    let mut p = vec![0.0; topics];
    let vbeta = v as f64 * beta;
    for _ in 0..iterations {
        for (d, ws) in words.iter().enumerate() {
            for (i, &w) in ws.iter().enumerate() {
                let old = z[d][i];
                n_dt[d][old] -= 1;
                n_tw[old][w] -= 1;
                n_t[old] -= 1;
                let mut total = 0.0;
                for t in 0..topics {
                    total += (n_dt[d][t] as f64 + alpha) * (n_tw[t][w] as f64 + beta)
                        / (n_t[t] as f64 + vbeta);
                    p[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = p.iter().position(|&c| u < c).unwrap_or(topics - 1);
                z[d][i] = new;
                n_dt[d][new] += 1;
                n_tw[new][w] += 1;
                n_t[new] += 1;
            }
        }
    }

    let topic_word = (0..topics)
        .map(|t| {
            let mut row: Vec<f64> = (0..v).map(|w| n_tw[t][w] as f64 + beta).collect();
            normalize(&mut row);
            row
        })
        .collect();
    let doc_topic = n_dt
        .iter()
        .map(|counts| {
            let mut row: Vec<f64> = counts.iter().map(|&c| c as f64 + alpha).collect();
            normalize(&mut row);
            row
        })
        .collect();
    Ok(TopicModel {
        vocabulary,
        alpha,
        beta,
        topic_word,
        doc_topic,
    })
}
