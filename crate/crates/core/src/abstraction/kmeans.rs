//! k-means++ seeding followed by Lloyd iterations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WevaError};
use crate::hand_eval::FeatureMatrix;

pub const DEFAULT_MAX_ITERS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<u32>,
    /// `k x dim` centroids of the final assignment (empty clusters keep
    /// their last center).
    pub centers: FeatureMatrix,
    /// Within-cluster cost after each assignment step.
    pub cost_history: Vec<f64>,
    /// Final sum of squared distances to the assigned centroids.
    pub cost: f64,
    pub iterations: usize,
    pub empty_clusters: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center; ties go to the lower index.
fn nearest(point: &[f64], centers: &FeatureMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = sq_dist(point, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centers(points: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let n = points.rows();
    let mut centers = FeatureMatrix::zeros(k, points.cols());
    let first = rng.gen_range(0..n);
    copy_row(&mut centers, 0, points.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(first))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` just short of `target`
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            rng.gen_range(0..n)
        };
        copy_row(&mut centers, c, points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(pick)));
        }
    }
    centers
}

fn copy_row(m: &mut FeatureMatrix, r: usize, src: &[f64]) {
    for (c, &v) in src.iter().enumerate() {
        m.set(r, c, v);
    }
}

fn centroids(points: &FeatureMatrix, assignment: &[u32], prev: &FeatureMatrix) -> (FeatureMatrix, Vec<usize>) {
    let (k, dim) = (prev.rows(), prev.cols());
    let mut sum = vec![0.0; k * dim];
    let mut count = vec![0usize; k];
    for (i, &a) in assignment.iter().enumerate() {
        let a = a as usize;
        count[a] += 1;
        for (s, &v) in sum[a * dim..(a + 1) * dim].iter_mut().zip(points.row(i)) {
            *s += v;
        }
    }
    let mut out = prev.clone();
    for c in 0..k {
        if count[c] > 0 {
            for d in 0..dim {
                out.set(c, d, sum[c * dim + d] / count[c] as f64);
            }
        }
    }
    (out, count)
}

/// Moves, for each empty cluster, the point farthest from its centroid
/// (taken from a cluster with at least two members) into it. Returns the
/// number of clusters that stay empty.
fn repair_empty(points: &FeatureMatrix, assignment: &mut [u32], centers: &mut FeatureMatrix, count: &mut [usize]) -> usize {
    let mut left = 0;
    for c in 0..count.len() {
        if count[c] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, &a) in assignment.iter().enumerate() {
            let a = a as usize;
            if count[a] < 2 {
                continue;
            }
            let d = sq_dist(points.row(i), centers.row(a));
            if d > 0.0 && best.map_or(true, |(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, _)) => {
                count[assignment[i] as usize] -= 1;
                assignment[i] = c as u32;
                count[c] = 1;
                copy_row(centers, c, points.row(i));
            }
            None => left += 1,
        }
    }
    left
}

fn total_cost(points: &FeatureMatrix, assignment: &[u32], centers: &FeatureMatrix) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &a)| sq_dist(points.row(i), centers.row(a as usize)))
        .sum()
}

/// Clusters the rows of `points` into `k` groups.
pub fn kmeans_pp(points: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng, max_iters: usize) -> Result<KMeansResult> {
    let n = points.rows();
    if k == 0 {
        return Err(WevaError::InvalidArgument("k must be at least 1".into()));
    }
    if n == 0 {
        return Err(WevaError::InvalidArgument("no points to cluster".into()));
    }
    if !points.is_finite() {
        return Err(WevaError::NonFinite("clustering features".into()));
    }
    let mut centers = seed_centers(points, k, rng);
    let mut assignment: Vec<u32> = Vec::new();
    let mut cost_history = Vec::new();
    let mut iterations = 0;
    let mut empty = 0;
    for _ in 0..max_iters.max(1) {
        let next: Vec<u32> = (0..n).map(|i| nearest(points.row(i), &centers).0 as u32).collect();
        let unchanged = next == assignment;
        assignment = next;
        cost_history.push(total_cost(points, &assignment, &centers));
        if unchanged {
            break;
        }
        iterations += 1;
        let (mut c, mut count) = centroids(points, &assignment, &centers);
        empty = repair_empty(points, &mut assignment, &mut c, &mut count);
        centers = c;
    }
    let (centers, count) = centroids(points, &assignment, &centers);
    let remaining = count.iter().filter(|&&c| c == 0).count();
    if remaining > 0 || empty > 0 {
        log::warn!("k-means: {remaining} of {k} clusters empty (too few distinct rows)");
    }
    let cost = total_cost(points, &assignment, &centers);
    Ok(KMeansResult {
        assignment,
        centers,
        cost_history,
        cost,
        iterations,
        empty_clusters: remaining,
    })
}

/// Equal-frequency buckets: hands sorted by (value, index) and cut into
/// contiguous groups of `ceil(n / k)`.
pub fn quantile_buckets(values: &[f64], k: usize) -> Result<Vec<u32>> {
    if k == 0 {
        return Err(WevaError::InvalidArgument("k must be at least 1".into()));
    }
    let n = values.len();
    let size = n.div_ceil(k).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0u32; n];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = (pos / size) as u32;
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    pub fn centroids(points: &FeatureMatrix, assignment: &[u32], k: usize) -> (FeatureMatrix, Vec<usize>) {
        super::centroids(points, assignment, &FeatureMatrix::zeros(k, points.cols()))
    }

    pub fn repair(points: &FeatureMatrix, assignment: &mut [u32], centers: &mut FeatureMatrix, count: &mut [usize]) -> usize {
        repair_empty(points, assignment, centers, count)
    }
}
