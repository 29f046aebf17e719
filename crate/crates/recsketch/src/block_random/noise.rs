//! Empirical isometry and desynchronization profiles.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::{Factor, MatrixExpr};
use super::matrix::{MatrixMode, RandomMatrix, SeedKey};
use super::params::{BlockParams, ParamError};
use crate::rng::stream;
use crate::scalar::{dot, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    Plain,
    Transpose,
    Transparent,
    TransparentTranspose,
    Identity,
}

/// Shape of a random expression; every trial draws fresh matrices for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExprTemplate(pub Vec<FactorKind>);

impl ExprTemplate {
    pub fn plain() -> Self {
        ExprTemplate(vec![FactorKind::Plain])
    }

    pub fn transparent() -> Self {
        ExprTemplate(vec![FactorKind::Transparent])
    }

    pub fn product(n: usize) -> Self {
        ExprTemplate(vec![FactorKind::Plain; n])
    }

    fn instantiate<T: Scalar>(
        &self,
        params: BlockParams,
        mode: MatrixMode,
        master: u64,
        tag: &str,
    ) -> Result<MatrixExpr<T>, ParamError> {
        let mut factors = Vec::with_capacity(self.0.len());
        for (k, kind) in self.0.iter().enumerate() {
            let draw = || -> Result<Arc<RandomMatrix<T>>, ParamError> {
                Ok(Arc::new(RandomMatrix::sample(mode, params, SeedKey::new(master, format!("{tag}/{k}")))?))
            };
            factors.push(match kind {
                FactorKind::Plain => Factor::Plain(draw()?),
                FactorKind::Transpose => Factor::Transpose(draw()?),
                FactorKind::Transparent => Factor::Transparent(draw()?),
                FactorKind::TransparentTranspose => Factor::TransparentTranspose(draw()?),
                FactorKind::Identity => Factor::Identity,
            });
        }
        Ok(MatrixExpr::new(params.d, factors).expect("shared dimension"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseMode {
    /// Z = ⟨Ex, Ex⟩ − α⟨x, x⟩
    Isometry,
    /// Z = ⟨Ex, x⟩ − α⟨x, x⟩
    Desynchronization,
    /// Z = ⟨E₁x, E₂x⟩ − α⟨x, x⟩ with E₁, E₂ independent draws of the template
    CrossDesynchronization,
}

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("at least 30 trials are required, got {0}")]
    TooFewTrials(usize),
    #[error("quantile {0} must lie in (0, 1)")]
    BadQuantile(f64),
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub mode: NoiseMode,
    pub delta_iso: f64,
    pub delta_desync: f64,
    /// Fitted scale (isometry) or leak (desynchronization) of the requested mode.
    pub alpha: f64,
    pub alpha_iso: f64,
    pub alpha_desync: f64,
    pub trials: usize,
    pub quantile: f64,
}

impl NoiseProfile {
    pub fn delta(&self) -> f64 {
        match self.mode {
            NoiseMode::Isometry => self.delta_iso,
            _ => self.delta_desync,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NoiseConfig {
    pub trials: usize,
    pub quantile: f64,
    pub matrix_mode: MatrixMode,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { trials: 200, quantile: 0.99, matrix_mode: MatrixMode::BlockRandom, seed: 0 }
    }
}

/// Fixed unit test vector, dense Gaussian direction.
pub fn test_vector<T: Scalar>(d: usize, seed: u64) -> Vec<T> {
    let mut rng = stream(seed, "noise/x", &[d as u64]);
    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.into_iter().map(|v| T::of(v / n)).collect()
}

pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    if v.is_empty() {
        return 0.0;
    }
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Mean computed around the first sample, so identical samples give that
/// sample back exactly.
fn shifted_mean(v: &[f64]) -> f64 {
    let base = v[0];
    base + v.iter().map(|x| x - base).sum::<f64>() / v.len() as f64
}

fn deviation(samples: &[f64], xx: f64, q: f64) -> (f64, f64) {
    let alpha = shifted_mean(samples) / xx;
    let z: Vec<f64> = samples.iter().map(|s| (s - alpha * xx).abs()).collect();
    (alpha, quantile(&z, q))
}

pub fn measure_noise_profile<T: Scalar>(
    template: &ExprTemplate,
    mode: NoiseMode,
    params: BlockParams,
    config: &NoiseConfig,
) -> Result<NoiseProfile, NoiseError> {
    if config.trials < 30 {
        return Err(NoiseError::TooFewTrials(config.trials));
    }
    if !(config.quantile > 0.0 && config.quantile < 1.0) {
        return Err(NoiseError::BadQuantile(config.quantile));
    }
    params.validate()?;
    let x: Vec<T> = test_vector(params.d, config.seed);
    let xx = dot(&x, &x).f64();
    let mut iso = Vec::with_capacity(config.trials);
    let mut des = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let e = template.instantiate::<T>(params, config.matrix_mode, config.seed, &format!("noise/{trial}/a"))?;
        let ex = e.apply(&x).expect("dimension checked");
        match mode {
            NoiseMode::CrossDesynchronization => {
                let e2 =
                    template.instantiate::<T>(params, config.matrix_mode, config.seed, &format!("noise/{trial}/b"))?;
                let v = dot(&ex, &e2.apply(&x).expect("dimension checked")).f64();
                iso.push(v);
                des.push(v);
            }
            _ => {
                iso.push(dot(&ex, &ex).f64());
                des.push(dot(&ex, &x).f64());
            }
        }
    }
    let (alpha_iso, delta_iso) = deviation(&iso, xx, config.quantile);
    let (alpha_desync, delta_desync) = deviation(&des, xx, config.quantile);
    Ok(NoiseProfile {
        mode,
        delta_iso,
        delta_desync,
        alpha: if mode == NoiseMode::Isometry { alpha_iso } else { alpha_desync },
        alpha_iso,
        alpha_desync,
        trials: config.trials,
        quantile: config.quantile,
    })
}

/// Fit of measured deltas against δ(d) = c·√(b log2 N / d).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaFit {
    pub c: f64,
    /// Slope of log δ against log d.
    pub exponent: f64,
    /// log δ − log(c·√(b log2 N / d)) per point.
    pub residuals: Vec<f64>,
}

impl DeltaFit {
    pub fn delta_at(&self, params: &BlockParams) -> f64 {
        self.c * law(params)
    }
}

fn law(p: &BlockParams) -> f64 {
    (p.b as f64 * (p.n_cap.max(2) as f64).log2() / p.d as f64).sqrt()
}

/// Least squares in log space. Needs at least two distinct dimensions.
pub fn fit_delta_law(points: &[(BlockParams, f64)]) -> Option<DeltaFit> {
    if points.len() < 2 || points.iter().any(|(_, dl)| *dl <= 0.0) {
        return None;
    }
    let logc: Vec<f64> = points.iter().map(|(p, dl)| dl.ln() - law(p).ln()).collect();
    let c_ln = logc.iter().sum::<f64>() / logc.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(p, _)| (p.d as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, dl)| dl.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(DeltaFit { c: c_ln.exp(), exponent: sxy / sxx, residuals: logc.iter().map(|l| l - c_ln).collect() })
}
