//! Random forest over trust features, trained on synthesized requests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::interpret::{oracle_trust, TrustFeatures};
use crate::error::{Error, Result};
use crate::model::{EmailClass, PurposeClass, TrustLevel};

/// email code, purpose code, then two noise features.
pub const FEATURE_COUNT: usize = 4;
/// Value given to the noise features when scoring a real request.
pub const NOISE_AT_SCORING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub features: [f64; FEATURE_COUNT],
    pub label: TrustLevel,
    /// Label differs from the oracle because of injected noise.
    pub perturbed: bool,
}

impl TrainingRow {
    pub fn trust_features(&self) -> TrustFeatures {
        let email = if self.features[0] >= 1.0 {
            EmailClass::Organizational
        } else {
            EmailClass::Personal
        };
        let purpose = match self.features[1] as u8 {
            0 => PurposeClass::ExternalUse,
            1 => PurposeClass::SelfUse,
            _ => PurposeClass::OrganizationalUse,
        };
        TrustFeatures { email, purpose }
    }
}

pub fn feature_vector(f: TrustFeatures) -> [f64; FEATURE_COUNT] {
    [
        f64::from(f.email.trust_code()),
        f64::from(f.purpose.trust_code()),
        NOISE_AT_SCORING,
        NOISE_AT_SCORING,
    ]
}

/// Uniform over the 2×3 grid with two uniform noise features; exactly
/// round(n·noise_rate) labels are moved one level.
pub fn synthesize_training_data(n: usize, noise_rate: f64, seed: u64) -> Result<Vec<TrainingRow>> {
    if n < 100 {
        return Err(Error::Training(format!(
            "need at least 100 rows, asked for {n}"
        )));
    }
    if !(0.0..1.0).contains(&noise_rate) {
        return Err(Error::Training(format!(
            "noise rate {noise_rate} must lie in [0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = TrustFeatures::grid();
    let mut rows: Vec<TrainingRow> = (0..n)
        .map(|_| {
            let f = grid[rng.gen_range(0..grid.len())];
            let base = feature_vector(f);
            TrainingRow {
                features: [base[0], base[1], rng.gen(), rng.gen()],
                label: oracle_trust(f),
                perturbed: false,
            }
        })
        .collect();
    let flips = (n as f64 * noise_rate).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    for &i in &idx[..flips] {
        let row = &mut rows[i];
        let code = row.label.code();
        let new = match code {
            0 => 1,
            2 => 1,
            _ => {
                if rng.gen_bool(0.5) {
                    0
                } else {
                    2
                }
            }
        };
        row.label = TrustLevel::from_code(new).expect("valid code");
        row.perturbed = true;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        label: TrustLevel,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64; FEATURE_COUNT]) -> TrustLevel {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub tree_count: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            tree_count: 25,
            max_depth: 12,
            min_samples_split: 2,
            seed: 7,
        }
    }
}

fn counts(rows: &[&TrainingRow]) -> [usize; 3] {
    let mut c = [0; 3];
    for r in rows {
        c[r.label.code() as usize] += 1;
    }
    c
}

fn gini(c: &[usize; 3], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - c.iter().map(|&k| (k as f64 / n).powi(2)).sum::<f64>()
}

fn majority(c: &[usize; 3]) -> TrustLevel {
    // ties go to the lower level
    let mut best = 0;
    for i in 1..3 {
        if c[i] > c[best] {
            best = i;
        }
    }
    TrustLevel::from_code(best as u8).expect("valid code")
}

struct Builder<'a> {
    params: &'a ForestParams,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn best_split(&self, rows: &[&TrainingRow], features: &[usize]) -> Option<(usize, f64)> {
        let n = rows.len();
        let parent = gini(&counts(rows), n);
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in features {
            let mut sorted: Vec<(f64, u8)> = rows
                .iter()
                .map(|r| (r.features[f], r.label.code()))
                .collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total = counts(rows);
            let mut left = [0usize; 3];
            for i in 0..n - 1 {
                left[sorted[i].1 as usize] += 1;
                if sorted[i].0 == sorted[i + 1].0 {
                    continue;
                }
                let nl = i + 1;
                let right = [total[0] - left[0], total[1] - left[1], total[2] - left[2]];
                let weighted = (nl as f64 * gini(&left, nl)
                    + (n - nl) as f64 * gini(&right, n - nl))
                    / n as f64;
                let gain = parent - weighted;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, (sorted[i].0 + sorted[i + 1].0) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, rows: Vec<&TrainingRow>, depth: usize) -> usize {
        let id = self.nodes.len();
        let c = counts(&rows);
        self.nodes.push(Node::Leaf {
            label: majority(&c),
        });
        let pure = c.iter().filter(|&&k| k > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || rows.len() < self.params.min_samples_split {
            return id;
        }
        let mtry = (FEATURE_COUNT as f64).sqrt().round() as usize;
        let mut order: Vec<usize> = (0..FEATURE_COUNT).collect();
        order.shuffle(&mut self.rng);
        // Draw √F candidates; if none of them splits, try the rest.
        let split = self
            .best_split(&rows, &order[..mtry])
            .or_else(|| self.best_split(&rows, &order[mtry..]));
        let Some((feature, threshold)) = split else {
            return id;
        };
        let (l, r): (Vec<&TrainingRow>, Vec<&TrainingRow>) = rows
            .into_iter()
            .partition(|row| row.features[feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn distinct_classes(rows: &[TrainingRow]) -> usize {
    let mut seen = [false; 3];
    for r in rows {
        seen[r.label.code() as usize] = true;
    }
    seen.iter().filter(|&&s| s).count()
}

fn fit_forest(rows: &[TrainingRow], params: &ForestParams, seed: u64) -> Vec<Tree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..params.tree_count)
        .map(|_| {
            let sample: Vec<&TrainingRow> = (0..rows.len())
                .map(|_| &rows[rng.gen_range(0..rows.len())])
                .collect();
            let mut b = Builder {
                params,
                rng: ChaCha8Rng::seed_from_u64(rng.gen()),
                nodes: Vec::new(),
            };
            b.grow(sample, 0);
            Tree { nodes: b.nodes }
        })
        .collect()
}

fn vote(trees: &[Tree], x: &[f64; FEATURE_COUNT]) -> TrustLevel {
    let mut c = [0usize; 3];
    for t in trees {
        c[t.predict(x).code() as usize] += 1;
    }
    majority(&c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustModel {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

impl TrustModel {
    pub fn predict_row(&self, x: &[f64; FEATURE_COUNT]) -> TrustLevel {
        vote(&self.trees, x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: TrustModel = serde_json::from_str(text)?;
        if m.trees.is_empty() {
            return Err(Error::Training("model has no trees".into()));
        }
        Ok(m)
    }
}

/// k-fold cross-validated forest; the returned model is refit on all rows.
pub fn train_trust_model(
    rows: &[TrainingRow],
    params: &ForestParams,
    folds: usize,
) -> Result<TrustModel> {
    if params.tree_count == 0 {
        return Err(Error::Training("tree count must be at least 1".into()));
    }
    if folds < 2 {
        return Err(Error::Training("need at least 2 folds".into()));
    }
    if rows.len() < 10 * folds {
        return Err(Error::Training(format!(
            "{} rows is too few for {folds}-fold cross-validation",
            rows.len()
        )));
    }
    if distinct_classes(rows) < 2 {
        return Err(Error::Training(
            "training data contains a single class".into(),
        ));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed_f01d));
    let mut fold_accuracies = Vec::with_capacity(folds);
    for k in 0..folds {
        let (mut train, mut test) = (Vec::new(), Vec::new());
        for (pos, &i) in order.iter().enumerate() {
            if pos % folds == k {
                test.push(rows[i].clone());
            } else {
                train.push(rows[i].clone());
            }
        }
        let trees = fit_forest(&train, params, params.seed.wrapping_add(k as u64 + 1));
        let correct = test
            .iter()
            .filter(|r| vote(&trees, &r.features) == r.label)
            .count();
        fold_accuracies.push(correct as f64 / test.len() as f64);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds as f64;
    Ok(TrustModel {
        trees: fit_forest(rows, params, params.seed),
        params: *params,
        fold_accuracies,
        mean_accuracy,
    })
}

pub fn score_trust(model: &TrustModel, features: TrustFeatures) -> TrustLevel {
    model.predict_row(&feature_vector(features))
}
