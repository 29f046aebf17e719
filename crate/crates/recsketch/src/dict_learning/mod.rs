//! Recursable dictionary learning over block-random matrices, and the
//! pipeline that unrolls overall sketches level by level.

mod dictionary;
mod matching;
mod plant;
mod teacher;
mod unroll;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block_random::{decode_signs, BlockParams};
use crate::scalar::Scalar;

pub use dictionary::{LearnedColumn, LearnedDictionary, MatrixDiscovery};
pub use teacher::{score_unroll, teacher_networks, ModuleScore, TeacherConfig, TeacherScore};
pub use plant::{plant_samples, PlantConfig, PlantedSample};
pub use matching::{match_permutation, write_permutation_report, ColumnMatch, PermutationMatch};
pub use unroll::{
    classify_recovered_vectors, unroll_network, Label, ModuleEstimate, RecoveredEdge, UnrollConfig, UnrollResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DLError {
    #[error("sample {index} has length {got}, expected {expected}")]
    SampleLength { index: usize, got: usize, expected: usize },
    #[error("invalid learner configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DLConfig {
    /// Recursion level h, 1-based; thresholds use ε_{h+1}.
    pub h: usize,
    /// Number of levels H.
    pub levels: usize,
    /// ε_H; the schedule is ε_h = ε_H / 2^{H-h}.
    pub eps_top: f64,
    /// τ₁ = λ·ε_{h+1}/√(qd).
    pub lambda: f64,
    /// τ₂ in units of the hypercube scale 1/√(qd).
    pub g: f64,
    /// Matrix-signature match radius as a fraction of b.
    pub hamming_match: f64,
    /// Matching-set floor as a fraction of qd/b.
    pub set_floor: f64,
}

impl Default for DLConfig {
    fn default() -> Self {
        DLConfig { h: 1, levels: 3, eps_top: 0.2, lambda: 0.5, g: 0.3, hamming_match: 0.01, set_floor: 0.729 }
    }
}

impl DLConfig {
    pub fn validate(&self) -> Result<(), DLError> {
        let bad = |m: &str| Err(DLError::Config(m.to_string()));
        if self.levels == 0 || self.h == 0 || self.h >= self.levels.max(2) {
            return bad("need 1 <= h < H");
        }
        if !(self.eps_top > 0.0 && self.lambda > 0.0 && self.g > 0.0) {
            return bad("eps_top, lambda and g must be positive");
        }
        if !(0.0..1.0).contains(&self.hamming_match) || !(0.0..=1.0).contains(&self.set_floor) {
            return bad("hamming_match must be in [0, 1) and set_floor in [0, 1]");
        }
        Ok(())
    }

    pub fn eps(&self, h: usize) -> f64 {
        self.eps_top / 2f64.powi(self.levels as i32 - h as i32)
    }

    pub fn eps_schedule(&self) -> Vec<f64> {
        (1..=self.levels).map(|h| self.eps(h)).collect()
    }

    pub fn tau1(&self, p: &BlockParams) -> f64 {
        self.lambda * self.eps(self.h + 1) * p.scale()
    }

    pub fn tau2(&self) -> f64 {
        self.g
    }

    pub fn at_level(&self, h: usize) -> Self {
        DLConfig { h, ..self.clone() }
    }
}

/// min(Δ(a, b), Δ(a, −b)) over sign vectors.
pub fn symmetric_hamming(a: &[i8], b: &[i8]) -> usize {
    let same = a.iter().zip(b).filter(|(x, y)| x != y).count();
    same.min(a.len() - same)
}

/// min(‖a − b‖∞, ‖a + b‖∞).
pub fn symmetric_linf(a: &[f64], b: &[f64]) -> f64 {
    let (mut p, mut m) = (0f64, 0f64);
    for (x, y) in a.iter().zip(b) {
        p = p.max((x - y).abs());
        m = m.max((x + y).abs());
    }
    p.min(m)
}

fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Pattern with first entry +1, and the sign that was divided out.
fn canonical(p: &[i8]) -> (Vec<i8>, i8) {
    let s = if p.first().copied().unwrap_or(1) < 0 { -1 } else { 1 };
    (p.iter().map(|&x| x * s).collect(), s)
}

/// Most common pattern; ties go to the lexicographically smallest.
fn modal(patterns: impl Iterator<Item = Vec<i8>>) -> Option<Vec<i8>> {
    let mut counts: HashMap<Vec<i8>, usize> = HashMap::new();
    for p in patterns {
        *counts.entry(p).or_default() += 1;
    }
    counts.into_iter().max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| b.cmp(a))).map(|(p, _)| p)
}

struct BlockView {
    /// ℓ1 weight rescaled so a pure block of coefficient x gives |x|.
    w: f64,
    /// Block divided by w, in units of 1/√(qd).
    z: Vec<f64>,
    in_window: bool,
}

fn view_blocks<T: Scalar>(y: &[T], p: &BlockParams, tau1: f64) -> Vec<BlockView> {
    let unit = p.scale();
    let hi = 2.0 * unit;
    y.chunks_exact(p.b)
        .map(|blk| {
            let l1: f64 = blk.iter().map(|v| v.f64().abs()).sum();
            let w = l1 / (p.b as f64 * unit);
            let z = if w > 0.0 { blk.iter().map(|v| v.f64() / (w * unit)).collect() } else { vec![0.0; p.b] };
            let in_window = w > 0.0 && blk.iter().all(|v| (tau1..=hi).contains(&v.f64().abs()));
            BlockView { w, z, in_window }
        })
        .collect()
}

/// Runs the block-scanning learner over `samples`.
///
/// Deviations from the textbook loop: each block of a matching set is
/// rounded and sign-corrected on its own (sub-block flips differ between
/// blocks), the column index and sign are majority votes over the set, the
/// coefficient is the median block weight, and a column seen again fills
/// any still-empty blocks.
pub fn learn_dictionary<T: Scalar>(
    samples: &[Vec<T>],
    params: &BlockParams,
    config: &DLConfig,
) -> Result<LearnedDictionary<T>, DLError> {
    config.validate()?;
    let (d, b) = (params.d, params.b);
    for (index, y) in samples.iter().enumerate() {
        if y.len() != d {
            return Err(DLError::SampleLength { index, got: y.len(), expected: d });
        }
    }
    let mut dict = LearnedDictionary::empty(*params, samples.len());
    if params.q == 0.0 {
        return Ok(dict);
    }
    let th = b / 3;
    let tau1 = config.tau1(params);
    let tau2 = config.tau2();
    let floor = config.set_floor * params.q * d as f64 / b as f64;
    let radius = (config.hamming_match * b as f64).floor() as usize;

    for (k, y) in samples.iter().enumerate() {
        let blocks = view_blocks(y, params, tau1);
        let mut used = vec![false; blocks.len()];
        for l in 0..blocks.len() {
            let bl = &blocks[l];
            if used[l] || bl.w == 0.0 || !bl.in_window {
                continue;
            }
            let zs = &bl.z[..th];
            if zs.iter().any(|v| (v.abs() - 1.0).abs() > tau2) {
                continue;
            }
            let set: Vec<usize> = (0..blocks.len())
                .filter(|&m| blocks[m].in_window && symmetric_linf(&blocks[m].z[..th], zs) <= 2.0 * tau2)
                .collect();
            if (set.len() as f64) < floor {
                continue;
            }
            set.iter().for_each(|&m| used[m] = true);

            let rounded: Vec<Vec<i8>> = set.iter().map(|&m| blocks[m].z.iter().map(|&v| sign(v)).collect()).collect();
            let Some(sig) = modal(rounded.iter().map(|r| canonical(&r[2 * th..]).0)) else { continue };
            let matrix = dict.matrix_for(&sig, radius, k, l);

            // Per-block (column, sign) from its own codeword and signature.
            let decoded: Vec<Option<(usize, i8)>> = rounded
                .iter()
                .map(|r| decode_signs(&r[th..2 * th], d).ok().map(|(j, f)| (j - 1, r[2 * th] * f)))
                .collect();
            let Some(&j) = modal_usize(decoded.iter().flatten().map(|&(j, _)| j)).as_ref() else { continue };
            let votes: i32 = decoded.iter().flatten().filter(|&&(jj, _)| jj == j).map(|&(_, s)| s as i32).sum();
            let s: i8 = if votes < 0 { -1 } else { 1 };
            let mut weights: Vec<f64> = set
                .iter()
                .zip(&decoded)
                .filter(|(_, dec)| matches!(dec, Some((jj, _)) if *jj == j))
                .map(|(&m, _)| blocks[m].w)
                .collect();
            weights.sort_by(f64::total_cmp);
            let w = weights[weights.len() / 2];

            let installs = set.iter().zip(&rounded).zip(&decoded).filter_map(|((&m, r), dec)| match dec {
                Some((jj, _)) if *jj == j => Some((m, r.iter().map(|&v| v * s).collect::<Vec<i8>>())),
                _ => None,
            });
            dict.install(matrix, j, installs);
            dict.set_coefficient(k, matrix, j, T::of(s as f64 * w));
        }
    }
    Ok(dict)
}

fn modal_usize(it: impl Iterator<Item = usize>) -> Option<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for j in it {
        *counts.entry(j).or_default() += 1;
    }
    counts.into_iter().max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| b.cmp(a))).map(|(j, _)| j)
}
