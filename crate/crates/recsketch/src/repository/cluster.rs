use rand::Rng;

use super::{RepoError, SketchEntry};
use crate::rng::stream;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per input entry, in input order.
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

fn dist2<T: Scalar>(a: &[T], c: &[f64]) -> f64 {
    a.iter().zip(c).map(|(x, y)| (x.f64() - y).powi(2)).sum()
}

fn nearest<T: Scalar>(v: &[T], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(v, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Seeded k-means++ then Lloyd iterations. Entries are processed in id
/// order, so the result does not depend on the order they are passed in.
pub fn cluster<T: Scalar>(entries: &[&SketchEntry<T>], k: usize, iterations: usize, seed: u64) -> Result<Clustering, RepoError> {
    let n = entries.len();
    if k == 0 || k > n {
        return Err(RepoError::ClusterCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| entries[a].id.cmp(&entries[b].id));
    let pts: Vec<&[T]> = order.iter().map(|&i| entries[i].sketch.values.as_slice()).collect();
    let to_f64 = |v: &[T]| v.iter().map(|x| x.f64()).collect::<Vec<f64>>();

    let mut rng = stream(seed, "kmeans", &[k as u64]);
    let mut centroids = vec![to_f64(pts[rng.random_range(0..n)])];
    while centroids.len() < k {
        let w: Vec<f64> = pts.iter().map(|p| centroids.iter().map(|c| dist2(p, c)).fold(f64::INFINITY, f64::min)).collect();
        let total: f64 = w.iter().sum();
        let pick = if total > 0.0 {
            let mut t = rng.random_range(0.0..total);
            w.iter().position(|&x| {
                t -= x;
                t < 0.0
            })
            .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        centroids.push(to_f64(pts[pick]));
    }

    let mut assign = vec![usize::MAX; n];
    let mut done = 0;
    for it in 0..iterations.max(1) {
        done = it + 1;
        let next: Vec<usize> = pts.iter().map(|p| nearest(p, &centroids)).collect();
        let changed = next != assign;
        assign = next;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&[T]> = pts.iter().zip(&assign).filter(|(_, a)| **a == c).map(|(p, _)| *p).collect();
            if members.is_empty() {
                continue;
            }
            centroid.iter_mut().for_each(|x| *x = 0.0);
            for m in &members {
                for (x, v) in centroid.iter_mut().zip(*m) {
                    *x += v.f64();
                }
            }
            centroid.iter_mut().for_each(|x| *x /= members.len() as f64);
        }
        if !changed {
            break;
        }
    }

    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = assign[pos];
    }
    Ok(Clustering { centroids, assignments, iterations: done })
}
