use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block_random::BlockRandomMatrix;
use crate::rng::stream;
use crate::scalar::Scalar;

/// A synthetic sample with one dominant coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedSample<T> {
    pub y: Vec<T>,
    /// (matrix, column, coefficient).
    pub dominant: (usize, usize, T),
    pub residual: Vec<(usize, usize, T)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantConfig {
    pub samples: usize,
    pub dominant: f64,
    /// Total ℓ1 mass of the residual coefficients.
    pub residual_mass: f64,
    pub residual_terms: usize,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig { samples: 200, dominant: 0.9, residual_mass: 0.05, residual_terms: 5 }
    }
}

/// y = Σ coefficient · column over a random dominant (matrix, column) with
/// a random sign, plus residual terms on other random columns.
pub fn plant_samples<T: Scalar>(matrices: &[&BlockRandomMatrix<T>], cfg: &PlantConfig, seed: u64) -> Vec<PlantedSample<T>> {
    let mut rng = stream(seed, "plant", &[]);
    let n = matrices.len();
    if n == 0 {
        return Vec::new();
    }
    let d = matrices[0].dim();
    let signs = [-1.0, 1.0];
    (0..cfg.samples)
        .map(|_| {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| (rng.random_range(0..n), rng.random_range(0..d));
            let (mi, j) = pick(&mut rng);
            let dom = T::of(cfg.dominant * signs.choose(&mut rng).unwrap());
            let mut y = vec![T::zero(); d];
            let mut add = |m: usize, j: usize, c: T| {
                for (o, v) in y.iter_mut().zip(matrices[m].column(j)) {
                    *o += c * v;
                }
            };
            add(mi, j, dom);
            let mut residual = Vec::with_capacity(cfg.residual_terms);
            for _ in 0..cfg.residual_terms {
                let (m2, j2) = pick(&mut rng);
                if (m2, j2) == (mi, j) {
                    continue;
                }
                let c = T::of(cfg.residual_mass / cfg.residual_terms as f64 * signs.choose(&mut rng).unwrap());
                add(m2, j2, c);
                residual.push((m2, j2, c));
            }
            PlantedSample { y, dominant: (mi, j, dom), residual }
        })
        .collect()
}
