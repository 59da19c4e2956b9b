use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KMEANS_MAX_ITERATIONS: usize = 50;
const KMEANS_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub category: String,
    pub centroids: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the closest centroid (squared L2); ties go to the lowest index.
pub fn nearest_centroid(centroids: &[Vec<f64>], v: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, v);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// k-means with k-means++ seeding; stops after 50 iterations or once no
/// centroid moves more than 1e-4. Deterministic for a given seed.
pub fn train_codebook(category: &str, descriptors: &[Vec<f64>], k: usize, seed: u64) -> Result<Codebook> {
    if k < 2 {
        return Err(Error::InsufficientData(format!("codebook needs k >= 2, got {k}")));
    }
    if descriptors.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} descriptors for a codebook of {k}",
            descriptors.len()
        )));
    }
    let dim = descriptors[0].len();
    if let Some(bad) = descriptors.iter().find(|d| d.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centroids = vec![descriptors[rng.random_range(0..descriptors.len())].clone()];
    let mut closest: Vec<f64> = descriptors.iter().map(|d| sq_dist(d, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total <= 0.0 {
            // Every point coincides with a centroid already; fall back to uniform choice.
            rng.random_range(0..descriptors.len())
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut idx = descriptors.len() - 1;
            for (i, &d) in closest.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        };
        let c = descriptors[pick].clone();
        for (slot, d) in closest.iter_mut().zip(descriptors) {
            *slot = slot.min(sq_dist(d, &c));
        }
        centroids.push(c);
    }

    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for d in descriptors {
            let c = nearest_centroid(&centroids, d);
            counts[c] += 1;
            sums[c].iter_mut().zip(d).for_each(|(s, v)| *s += v);
        }
        let mut max_shift = 0.0f64;
        for (c, (sum, &n)) in centroids.iter_mut().zip(sums.iter().zip(&counts)) {
            if n == 0 {
                continue;
            }
            let updated: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
            max_shift = max_shift.max(sq_dist(c, &updated).sqrt());
            *c = updated;
        }
        if max_shift < KMEANS_TOLERANCE {
            break;
        }
    }
    Ok(Codebook { category: category.to_string(), centroids })
}

/// L1-normalised visual-word histogram of length `k`; zero vector for no descriptors.
pub fn bow_histogram(descriptors: &[Vec<f64>], codebook: &Codebook) -> Result<Vec<f64>> {
    let mut hist = vec![0.0; codebook.k()];
    for d in descriptors {
        if d.len() != codebook.dim() {
            return Err(Error::DimensionMismatch { expected: codebook.dim(), actual: d.len() });
        }
        hist[nearest_centroid(&codebook.centroids, d)] += 1.0;
    }
    if !descriptors.is_empty() {
        let n = descriptors.len() as f64;
        hist.iter_mut().for_each(|h| *h /= n);
    }
    Ok(hist)
}
