use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub max_iterations: usize,
    /// Independent k-means++ starts; the lowest final inertia wins.
    pub restarts: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            max_iterations: 100,
            restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step of the winning run.
    pub inertia_history: Vec<f64>,
    pub converged: bool,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().expect("at least one iteration")
    }
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn plus_plus(vectors: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![vectors[rng.gen_range(0..vectors.len())].clone()];
    let mut d2: Vec<f64> = vectors.iter().map(|v| sq_dist(v, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = d2.iter().rposition(|&d| d > 0.0).expect("positive mass");
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..vectors.len())
        };
        let c = vectors[pick].clone();
        for (d, v) in d2.iter_mut().zip(vectors) {
            *d = d.min(sq_dist(v, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(vectors: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iterations: usize) -> KMeansFit {
    let dim = vectors[0].len();
    let mut assignments = vec![usize::MAX; vectors.len()];
    let mut inertia_history = Vec::new();
    let mut converged = false;
    for _ in 0..max_iterations {
        let mut changed = false;
        let mut inertia = 0.0;
        for (a, v) in assignments.iter_mut().zip(vectors) {
            let (c, d) = nearest(v, &centroids);
            inertia += d;
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if let Some(&prev) = inertia_history.last() {
            debug_assert!(
                inertia <= prev + 1e-9,
                "inertia rose from {prev} to {inertia}"
            );
        }
        inertia_history.push(inertia);
        if !changed {
            converged = true;
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (&a, v) in assignments.iter().zip(vectors) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(v) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            // an emptied cluster keeps its previous centroid
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
    }
    KMeansFit {
        centroids,
        assignments,
        inertia_history,
        converged,
    }
}

fn distinct_points(vectors: &[Vec<f64>]) -> usize {
    let mut seen: Vec<&Vec<f64>> = Vec::new();
    for v in vectors {
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen.len()
}

/// k-means++ seeded Lloyd iterations over (already normalized) vectors.
pub fn kmeans(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::DegenerateInput("k must be at least 1".into()));
    }
    if vectors.len() < k {
        return Err(Error::DegenerateInput(format!(
            "{} vectors for k = {k}",
            vectors.len()
        )));
    }
    if vectors.iter().any(|v| v.len() != vectors[0].len()) {
        return Err(Error::DegenerateInput("vectors differ in dimension".into()));
    }
    let distinct = distinct_points(vectors);
    if distinct < k {
        return Err(Error::DegenerateInput(format!(
            "{distinct} distinct points for k = {k}"
        )));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..params.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let init = plus_plus(vectors, k, &mut rng);
        let fit = lloyd(vectors, init, params.max_iterations.max(1));
        if best.as_ref().is_none_or(|b| fit.inertia() < b.inertia()) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}
