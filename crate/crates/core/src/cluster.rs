//! Clustering of real vectors and k-th nearest neighbour distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::UnionFind;

pub const DEFAULT_KNN_K: usize = 5;

/// Restarts of k-means from independent k-means++ seeds; the lowest-inertia run wins.
const KMEANS_RESTARTS: u64 = 10;
const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ClusterMethod {
    /// Single-linkage: points within Euclidean distance `tol` of each other are merged,
    /// transitively.
    ToleranceLink { tol: f64 },
    /// Lloyd's algorithm with `k` clusters and k-means++ seeding.
    KMeans { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub method: ClusterMethod,
    pub knn_k: usize,
    pub seed: u64,
}

impl ClusterConfig {
    pub fn tolerance(tol: f64) -> Self {
        ClusterConfig {
            method: ClusterMethod::ToleranceLink { tol },
            knn_k: DEFAULT_KNN_K,
            seed: 0,
        }
    }

    pub fn kmeans(k: usize, seed: u64) -> Self {
        ClusterConfig {
            method: ClusterMethod::KMeans { k },
            knn_k: DEFAULT_KNN_K,
            seed,
        }
    }

    pub fn with_knn_k(mut self, knn_k: usize) -> Self {
        self.knn_k = knn_k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 {
            return Err(Error::Config("knn_k must be at least 1".into()));
        }
        match self.method {
            ClusterMethod::ToleranceLink { tol } if !(tol >= 0.0 && tol.is_finite()) => {
                Err(Error::Config(format!("cluster tolerance {tol} must be finite and >= 0")))
            }
            ClusterMethod::KMeans { k: 0 } => Err(Error::Config("k_clusters must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Input("nothing to cluster".into()))?;
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::Shape(format!("point {i} has dimension {}, expected {dim}", p.len())));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input(format!("point {i} has a non-finite coordinate")));
        }
    }
    Ok(dim)
}

/// Relabels so that labels appear in order of first occurrence.
fn canonical_labels(raw: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    raw.iter()
        .map(|&r| match map.iter().find(|(k, _)| *k == r) {
            Some(&(_, v)) => v,
            None => {
                let v = map.len();
                map.push((r, v));
                v
            }
        })
        .collect()
}

/// Cluster label for every point. Labels are numbered in order of first occurrence.
pub fn cluster(points: &[Vec<f64>], cfg: &ClusterConfig) -> Result<Vec<usize>> {
    cluster_weighted(points, &vec![1.0; points.len()], cfg)
}

/// As [`cluster`], with per-point multiplicities. Weights only affect k-means.
pub fn cluster_weighted(points: &[Vec<f64>], weights: &[f64], cfg: &ClusterConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    check_points(points)?;
    if weights.len() != points.len() {
        return Err(Error::Shape("one weight per point required".into()));
    }
    match cfg.method {
        ClusterMethod::ToleranceLink { tol } => Ok(tolerance_link(points, tol)),
        ClusterMethod::KMeans { k } => kmeans(points, weights, k, cfg.seed),
    }
}

fn tolerance_link(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    let tol2 = tol * tol;
    for i in 0..n {
        for j in (i + 1)..n {
            if sq_dist(&points[i], &points[j]) <= tol2 {
                uf.union(i, j);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    canonical_labels(&roots)
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for p in points {
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    distinct.len()
}

fn kmeans(points: &[Vec<f64>], weights: &[f64], k: usize, seed: u64) -> Result<Vec<usize>> {
    let distinct = count_distinct(points);
    if k > distinct {
        return Err(Error::Config(format!(
            "k_clusters = {k} exceeds the {distinct} distinct points"
        )));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart);
        let (inertia, labels) = lloyd(points, weights, k, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b - 1e-12) {
            best = Some((inertia, labels));
        }
    }
    let (_, labels) = best.expect("at least one restart");
    Ok(canonical_labels(&labels))
}

fn plus_plus_init(points: &[Vec<f64>], weights: &[f64], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let total: f64 = weights.iter().sum();
    let mut centers = vec![points[pick(weights, total, rng)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = (0..n).map(|i| weights[i] * d2[i]).collect();
        let s: f64 = scores.iter().sum();
        let next = if s > 0.0 {
            pick(&scores, s, rng)
        } else {
            // every remaining point coincides with a center; take any not already chosen
            (0..n)
                .find(|&i| !centers.iter().any(|c| *c == points[i]))
                .unwrap_or(0)
        };
        centers.push(points[next].clone());
        for i in 0..n {
            d2[i] = d2[i].min(sq_dist(&points[i], &centers[centers.len() - 1]));
        }
    }
    centers
}

fn pick(weights: &[f64], total: f64, rng: &mut impl Rng) -> usize {
    let mut r = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    centers
        .iter()
        .enumerate()
        .map(|(c, ctr)| (c, sq_dist(p, ctr)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

fn lloyd(points: &[Vec<f64>], weights: &[f64], k: usize, rng: &mut impl Rng) -> (f64, Vec<usize>) {
    let dim = points[0].len();
    let mut centers = plus_plus_init(points, weights, k, rng);
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut mass = vec![0.0; k];
        for ((p, &l), &w) in points.iter().zip(&labels).zip(weights) {
            mass[l] += w;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += w * x;
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                centers[c] = sums[c].iter().map(|s| s / mass[c]).collect();
            } else {
                // empty cluster: move it onto the point farthest from its center
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        let da = sq_dist(&points[a], &centers[labels[a]]);
                        let db = sq_dist(&points[b], &centers[labels[b]]);
                        da.total_cmp(&db)
                    })
                    .unwrap_or(0);
                centers[c] = points[far].clone();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = points
        .iter()
        .zip(&labels)
        .zip(weights)
        .map(|((p, &l), &w)| w * sq_dist(p, &centers[l]))
        .sum();
    (inertia, labels)
}

/// Distance from `query` to its `k`-th nearest neighbour in a multiset of points.
///
/// The multiset is given as distinct points with multiplicities. When `query` coincides with
/// a member, one copy of it is excluded (the query does not count as its own neighbour).
/// Returns `None` when fewer than `k` neighbours remain.
pub fn kth_neighbor_distance(query: &[f64], points: &[Vec<f64>], counts: &[usize], k: usize) -> Option<f64> {
    let mut excluded = false;
    let mut by_dist: Vec<(f64, usize)> = points
        .iter()
        .zip(counts)
        .filter_map(|(p, &c)| {
            let c = if !excluded && c > 0 && p.as_slice() == query {
                excluded = true;
                c - 1
            } else {
                c
            };
            (c > 0).then(|| (euclidean(query, p), c))
        })
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut seen = 0;
    for (d, c) in by_dist {
        seen += c;
        if seen >= k {
            return Some(d);
        }
    }
    None
}

/// Mean of the `k` nearest points (including the query's own copy) to `query`, by
/// Euclidean distance over `keys`, of the associated `values`. Ties broken by index.
pub fn knn_mean(query: &[f64], keys: &[Vec<f64>], values: &[Vec<f64>], k: usize) -> Vec<f64> {
    let mut order: Vec<(f64, usize)> = keys
        .iter()
        .enumerate()
        .map(|(i, p)| (sq_dist(query, p), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let k = k.min(order.len());
    let dim = values[0].len();
    let mut mean = vec![0.0; dim];
    for &(_, i) in &order[..k] {
        for (m, v) in mean.iter_mut().zip(&values[i]) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k as f64);
    mean
}
