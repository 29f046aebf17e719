use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block_random::{BlockParams, DeltaFit, MatrixMode, ParamError, RandomMatrix, SeedKey};
use crate::network_model::ModuleId;
use crate::scalar::Scalar;

/// Registry key: a module matrix R_{M,slot} or a tuple matrix R_i at a tuple level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatrixKey {
    Module { module: ModuleId, slot: u8 },
    Tuple { index: usize, depth: u32 },
}

impl MatrixKey {
    pub fn module(module: &ModuleId, slot: u8) -> Self {
        MatrixKey::Module { module: module.clone(), slot }
    }

    pub fn tuple(index: usize, depth: u32) -> Self {
        MatrixKey::Tuple { index, depth }
    }
}

impl fmt::Display for MatrixKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixKey::Module { module, slot } => write!(f, "m:{module}:{slot}"),
            MatrixKey::Tuple { index, depth } => write!(f, "t:{index}:{depth}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("bad matrix key `{0}`")]
pub struct KeyParseError(pub String);

impl FromStr for MatrixKey {
    type Err = KeyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || KeyParseError(s.to_string());
        let mut parts = s.splitn(3, ':');
        let (kind, a, b) = (parts.next(), parts.next(), parts.next());
        match (kind, a, b) {
            (Some("m"), Some(m), Some(slot)) if !m.is_empty() => {
                Ok(MatrixKey::Module { module: ModuleId(m.into()), slot: slot.parse().map_err(|_| err())? })
            }
            (Some("t"), Some(i), Some(h)) => Ok(MatrixKey::Tuple {
                index: i.parse().map_err(|_| err())?,
                depth: h.parse().map_err(|_| err())?,
            }),
            _ => Err(err()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("calibrated delta {delta:.4} at d = {d} exceeds 1/(4H) = {bound:.4}; raise d or pass the override")]
    DimensionTooSmall { d: usize, delta: f64, bound: f64 },
}

/// Deterministic map from keys to matrices; knowing the master seed is
/// knowing every matrix.
#[derive(Debug)]
pub struct MatrixRegistry<T> {
    master_seed: u64,
    params: BlockParams,
    mode: MatrixMode,
    cache: RwLock<HashMap<MatrixKey, Arc<RandomMatrix<T>>>>,
}

impl<T: Scalar> MatrixRegistry<T> {
    pub fn new(master_seed: u64, params: BlockParams, mode: MatrixMode) -> Result<Self, RegistryError> {
        params.validate()?;
        Ok(MatrixRegistry { master_seed, params, mode, cache: RwLock::new(HashMap::new()) })
    }

    /// Like [`new`](Self::new) but refuses a dimension whose calibrated
    /// delta exceeds 1/(4H), unless `allow_override` is set.
    pub fn new_checked(
        master_seed: u64,
        params: BlockParams,
        mode: MatrixMode,
        fit: &DeltaFit,
        h_cap: u32,
        allow_override: bool,
    ) -> Result<Self, RegistryError> {
        let delta = fit.delta_at(&params);
        let bound = 1.0 / (4.0 * h_cap.max(1) as f64);
        if mode == MatrixMode::BlockRandom && delta > bound && !allow_override {
            return Err(RegistryError::DimensionTooSmall { d: params.d, delta, bound });
        }
        Self::new(master_seed, params, mode)
    }

    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.d
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Short fingerprint of (seed, mode, params) written into sketch files.
    pub fn fingerprint(&self) -> u64 {
        let p = &self.params;
        crate::rng::fingerprint(
            self.master_seed,
            &format!("registry/{}/{}/{}/{}/{}", self.mode.name(), p.b, p.q, p.d, p.n_cap),
        )
    }

    pub fn get(&self, key: &MatrixKey) -> Arc<RandomMatrix<T>> {
        if let Some(m) = self.cache.read().expect("registry lock").get(key) {
            return m.clone();
        }
        let m = Arc::new(
            RandomMatrix::sample(self.mode, self.params, SeedKey::new(self.master_seed, key.to_string()))
                .expect("params validated at construction"),
        );
        self.cache.write().expect("registry lock").entry(key.clone()).or_insert(m).clone()
    }

    pub fn module(&self, module: &ModuleId, slot: u8) -> Arc<RandomMatrix<T>> {
        self.get(&MatrixKey::module(module, slot))
    }

    pub fn tuple(&self, index: usize, depth: u32) -> Arc<RandomMatrix<T>> {
        self.get(&MatrixKey::tuple(index, depth))
    }

    pub fn cached(&self) -> usize {
        self.cache.read().expect("registry lock").len()
    }
}
