use rand::Rng;
use rand_distr::StandardNormal;

use super::{top_k, Hit, RepoError, Snapshot};
use crate::rng::stream;
use crate::scalar::Scalar;
use crate::sketcher::Sketch;

pub const DEFAULT_HYPERPLANES: usize = 16;

/// Random-hyperplane buckets over a snapshot.
#[derive(Clone, Debug)]
pub struct LshIndex<T> {
    snapshot: Snapshot<T>,
    planes: Vec<Vec<f64>>,
    codes: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LshQuery {
    pub hits: Vec<Hit>,
    /// Entries that fell inside the probed buckets.
    pub candidates: usize,
    /// Fraction of the exact top-k that the bucketed search returned.
    pub recall: f64,
}

impl<T: Scalar> LshIndex<T> {
    pub fn build(snapshot: Snapshot<T>, hyperplanes: usize, seed: u64) -> Self {
        assert!((1..=64).contains(&hyperplanes), "1..=64 hyperplanes");
        let mut rng = stream(seed, "lsh", &[]);
        let planes: Vec<Vec<f64>> =
            (0..hyperplanes).map(|_| (0..snapshot.dim()).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let mut idx = LshIndex { snapshot, planes, codes: Vec::new() };
        idx.codes = idx.snapshot.entries().iter().map(|e| idx.code(&e.sketch.values)).collect();
        idx
    }

    pub fn code(&self, v: &[T]) -> u64 {
        self.planes.iter().enumerate().fold(0u64, |acc, (i, p)| {
            let side: f64 = p.iter().zip(v).map(|(a, b)| a * b.f64()).sum();
            acc | (((side >= 0.0) as u64) << i)
        })
    }

    /// Exact ranking restricted to buckets within Hamming `radius` of the
    /// probe's bucket.
    pub fn query(&self, probe: &Sketch<T>, k: usize, radius: u32) -> Result<LshQuery, RepoError> {
        self.snapshot.check(probe)?;
        let c = self.code(&probe.values);
        let cands: Vec<_> = self
            .snapshot
            .entries()
            .iter()
            .zip(&self.codes)
            .filter(|(_, code)| (*code ^ c).count_ones() <= radius)
            .map(|(e, _)| &**e)
            .collect();
        let hits = top_k(cands.iter().copied(), probe, k);
        let exact = self.snapshot.query_similar(probe, k)?;
        let recall = if exact.is_empty() {
            1.0
        } else {
            exact.iter().filter(|h| hits.iter().any(|g| g.seq == h.seq)).count() as f64 / exact.len() as f64
        };
        Ok(LshQuery { hits, candidates: cands.len(), recall })
    }
}
