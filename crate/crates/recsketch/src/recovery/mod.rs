//! Interrogating sketches: attribute vectors, counts, sums, similarity,
//! signatures, and the erased-prefix variants.

mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block_random::{ceil_log2, RandomMatrix};
use crate::network_model::{ModuleId, ObjectPath};
use crate::scalar::{dot, Scalar};
use crate::sketcher::{object_tuple_level, MatrixRegistry, Sketch, SLOT_ATTR, SLOT_COUNT, SLOT_MAGIC, SLOT_OBJECT};

pub use report::{Estimate, QueryKind, RecoveryReport, REPORT_CSV_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoveryError {
    #[error("sketch has dimension {got}, registry has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("sketch was produced by a different registry")]
    RegistryMismatch,
    #[error("sketches differ in erased prefix ({0} vs {1})")]
    PrefixMismatch(usize, usize),
    #[error("prefix {d_prime} is below the block size {b}")]
    PrefixTooShort { d_prime: usize, b: usize },
    #[error("depth must be at least 2 (got {0})")]
    Depth(u32),
    #[error("effective weight must be positive (got {0})")]
    Weight(f64),
    #[error("invalid path: {0}")]
    Path(String),
    #[error("coordinate {0} outside the sketch")]
    Coordinate(usize),
    #[error("sketch was not built with signatures")]
    NotSignature,
    #[error("recovered count is 0; the class is empty")]
    EmptyClass,
}

/// Which β to scale by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaConvention {
    /// Inverse of the exact expected gain of the construction, 2^{4h−3}/w.
    #[default]
    Exact,
    /// 2^{3h+1}/w.
    Nominal,
}

/// Estimators combined before the final transpose.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteSet {
    /// Mean over the four routes through the identity or the rotated branch
    /// of the target's object matrix and attribute tuple slot.
    #[default]
    Averaged,
    /// Identity branches only: β·Rᵀ s.
    Single,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub beta: BetaConvention,
    pub routes: RouteSet,
    /// Only these attribute coordinates are estimated.
    pub coords: Option<Vec<usize>>,
    /// Calibrated δ; enables `predicted_error` in reports.
    pub delta: Option<f64>,
}

pub fn beta(h: u32, w: f64, signature: bool, convention: BetaConvention) -> f64 {
    let base = match convention {
        BetaConvention::Exact => 2f64.powi(4 * h as i32 - 3),
        BetaConvention::Nominal => 2f64.powi(3 * h as i32 + 1),
    };
    if signature {
        1.5 * base / w
    } else {
        base / w
    }
}

/// Plain inner product of two sketches.
pub fn sketch_similarity<T: Scalar>(a: &Sketch<T>, b: &Sketch<T>) -> Result<T, RecoveryError> {
    if a.dim() != b.dim() {
        return Err(RecoveryError::Dimension { expected: a.dim(), got: b.dim() });
    }
    if a.erased_prefix != b.erased_prefix {
        return Err(RecoveryError::PrefixMismatch(a.erased_prefix, b.erased_prefix));
    }
    Ok(dot(&a.values, &b.values))
}

/// Quantized signature read back from a sketch.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureRecovery<T> {
    pub report: RecoveryReport<T>,
    /// Sorted support of the quantized magic number, `None` for no match.
    pub support: Option<Vec<usize>>,
}

impl<T: Scalar> SignatureRecovery<T> {
    pub fn quantized(&self, d: usize) -> Option<Vec<T>> {
        let s = self.support.as_ref()?;
        let v = T::of(1.0 / (s.len() as f64).sqrt());
        let mut out = vec![T::zero(); d];
        s.iter().for_each(|&i| out[i] = v);
        Some(out)
    }
}

pub struct Recoverer<'r, T> {
    registry: &'r MatrixRegistry<T>,
    options: RecoveryOptions,
}

impl<'r, T: Scalar> Recoverer<'r, T> {
    pub fn new(registry: &'r MatrixRegistry<T>) -> Self {
        Recoverer { registry, options: RecoveryOptions::default() }
    }

    pub fn with_options(registry: &'r MatrixRegistry<T>, options: RecoveryOptions) -> Self {
        Recoverer { registry, options }
    }

    pub fn options(&self) -> &RecoveryOptions {
        &self.options
    }

    fn check(&self, s: &Sketch<T>, h: u32, w: f64) -> Result<(), RecoveryError> {
        let d = self.registry.dim();
        if s.dim() != d {
            return Err(RecoveryError::Dimension { expected: d, got: s.dim() });
        }
        if s.fingerprint != 0 && s.fingerprint != self.registry.fingerprint() {
            return Err(RecoveryError::RegistryMismatch);
        }
        if s.erased_prefix < self.registry.params().b {
            return Err(RecoveryError::PrefixTooShort { d_prime: s.erased_prefix, b: self.registry.params().b });
        }
        if h < 2 {
            return Err(RecoveryError::Depth(h));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(RecoveryError::Weight(w));
        }
        Ok(())
    }

    /// The sketch contracted over its surviving prefix and rescaled by d/d′.
    fn surviving(&self, s: &Sketch<T>) -> Vec<T> {
        let d = s.dim();
        let dp = s.erased_prefix;
        if dp == d {
            return s.values.clone();
        }
        let scale = T::of(d as f64 / dp as f64);
        s.values.iter().enumerate().map(|(i, &v)| if i < dp { v * scale } else { T::zero() }).collect()
    }

    /// Mean over the route subsets through the target's object matrix and
    /// attribute tuple slot; by linearity this costs two transposes.
    fn routes(&self, v: Vec<T>, module: &ModuleId, h: u32) -> Vec<T> {
        if self.options.routes == RouteSet::Single {
            return v;
        }
        let mut a = v;
        let r0 = self.registry.module(module, SLOT_OBJECT).mul_t(&a);
        a.iter_mut().zip(r0).for_each(|(x, y)| *x += y);
        let ra = self.registry.tuple(1, object_tuple_level(h)).mul_t(&a);
        let quarter = T::of(0.25);
        a.iter_mut().zip(ra).for_each(|(x, y)| *x = (*x + y) * quarter);
        a
    }

    fn finish(&self, m: &RandomMatrix<T>, v: &[T], coords: Option<&[usize]>, scale: T) -> Result<Vec<T>, RecoveryError> {
        let mut out = match coords {
            Some(c) => {
                if let Some(&bad) = c.iter().find(|&&i| i >= v.len()) {
                    return Err(RecoveryError::Coordinate(bad));
                }
                m.mul_t_at(v, c)
            }
            None => m.mul_t(v),
        };
        out.iter_mut().for_each(|x| *x *= scale);
        Ok(out)
    }

    fn report(&self, kind: QueryKind, s: &Sketch<T>, module: &ModuleId, h: u32, w: f64, beta: f64) -> RecoveryReport<T> {
        let d = s.dim();
        let predicted = self.options.delta.map(|delta| {
            let norm = s.norm().f64() * d as f64 / s.erased_prefix as f64;
            beta * delta * norm
        });
        RecoveryReport {
            kind,
            estimate: Estimate::Scalar { value: T::zero(), rounded: 0 },
            coords: self.options.coords.clone(),
            beta,
            module: module.clone(),
            path: None,
            depth: h,
            weight: w,
            d,
            erased_prefix: s.erased_prefix,
            predicted_error: predicted,
            error: None,
            low_confidence: false,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn vector(
        &self,
        kind: QueryKind,
        s: &Sketch<T>,
        module: &ModuleId,
        h: u32,
        w: f64,
        v: Vec<T>,
        slot: u8,
        coords: Option<&[usize]>,
    ) -> Result<RecoveryReport<T>, RecoveryError> {
        let b = beta(h, w, s.signature, self.options.beta);
        let routed = self.routes(v, module, h);
        let m = self.registry.module(module, slot);
        let est = self.finish(&m, &routed, coords, T::of(b))?;
        let mut r = self.report(kind, s, module, h, w, b);
        r.coords = coords.map(<[usize]>::to_vec);
        r.estimate = Estimate::Vector(est);
        Ok(r)
    }

    /// β R_{M,1}ᵀ s for the single object of `module`.
    pub fn unique(&self, s: &Sketch<T>, module: &ModuleId, h: u32, w: f64) -> Result<RecoveryReport<T>, RecoveryError> {
        self.check(s, h, w)?;
        self.vector(QueryKind::Unique, s, module, h, w, self.surviving(s), SLOT_ATTR, self.options.coords.as_deref())
    }

    /// Follows the positional input-tuple transposes of `path` before the
    /// attribute transpose, isolating the object at that path.
    pub fn by_path(&self, s: &Sketch<T>, path: &ObjectPath, w: f64) -> Result<RecoveryReport<T>, RecoveryError> {
        let module = path.target_module().ok_or_else(|| RecoveryError::Path("empty path".into()))?.clone();
        let h = path.depth();
        self.check(s, h, w)?;
        let mut v = self.surviving(s);
        for (i, step) in path.steps.iter().enumerate() {
            if step.position == 0 {
                return Err(RecoveryError::Path(format!("step {} has position 0; positions are 1-based", i + 1)));
            }
            v = self.registry.tuple(step.position, 2 * i as u32 + 1).mul_t(&v);
        }
        let mut r = self.vector(QueryKind::Path, s, &module, h, w, v, SLOT_ATTR, self.options.coords.as_deref())?;
        r.path = Some(path.clone());
        Ok(r)
    }

    /// β e₁ᵀ R_{M,2}ᵀ s, with its nearest integer.
    pub fn frequency(&self, s: &Sketch<T>, module: &ModuleId, h: u32, w: f64) -> Result<RecoveryReport<T>, RecoveryError> {
        self.check(s, h, w)?;
        let b = beta(h, w, s.signature, self.options.beta);
        let routed = self.routes(self.surviving(s), module, h);
        let m = self.registry.module(module, SLOT_COUNT);
        let value = self.finish(&m, &routed, Some(&[0]), T::of(b))?[0];
        let mut r = self.report(QueryKind::Frequency, s, module, h, w, b);
        r.coords = Some(vec![0]);
        r.estimate = Estimate::Scalar { value, rounded: value.f64().round().max(0.0) as i64 };
        Ok(r)
    }

    /// Sum of the attribute vectors of every object of `module` at weight w.
    pub fn summed(&self, s: &Sketch<T>, module: &ModuleId, h: u32, w: f64) -> Result<RecoveryReport<T>, RecoveryError> {
        self.check(s, h, w)?;
        self.vector(QueryKind::Summed, s, module, h, w, self.surviving(s), SLOT_ATTR, self.options.coords.as_deref())
    }

    /// Summed estimate divided by the rounded count. Flagged low-confidence
    /// when the count estimate sits more than 0.4 from its rounding.
    pub fn mean(&self, s: &Sketch<T>, module: &ModuleId, h: u32, w: f64) -> Result<RecoveryReport<T>, RecoveryError> {
        let f = self.frequency(s, module, h, w)?;
        let Estimate::Scalar { value, rounded } = f.estimate else { unreachable!() };
        if rounded == 0 {
            return Err(RecoveryError::EmptyClass);
        }
        let mut r = self.summed(s, module, h, w)?;
        if let Estimate::Vector(v) = &mut r.estimate {
            let n = T::of(rounded as f64);
            v.iter_mut().for_each(|x| *x /= n);
        }
        r.kind = QueryKind::Mean;
        r.low_confidence = (value.f64() - rounded as f64).abs() > 0.4;
        Ok(r)
    }

    /// Reads the magic number through R_{M,3} and quantizes it to the
    /// {0, 1/√k} grid. A match requires exactly k coordinates above the
    /// midpoint 1/(2√k).
    pub fn signature(&self, s: &Sketch<T>, module: &ModuleId, h: u32, w: f64, n_cap: usize) -> Result<SignatureRecovery<T>, RecoveryError> {
        if !s.signature {
            return Err(RecoveryError::NotSignature);
        }
        self.check(s, h, w)?;
        let r = self.vector(QueryKind::Signature, s, module, h, w, self.surviving(s), SLOT_MAGIC, None)?;
        let k = ceil_log2(n_cap).max(1).min(s.dim());
        let mid = 0.5 / (k as f64).sqrt();
        let Estimate::Vector(v) = &r.estimate else { unreachable!() };
        let support: Vec<usize> = v.iter().enumerate().filter(|(_, x)| x.f64() > mid).map(|(i, _)| i).collect();
        let support = (support.len() == k).then_some(support);
        Ok(SignatureRecovery { report: r, support })
    }
}
