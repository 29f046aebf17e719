//! Recursive sketches over a network, plus the two prototype sketches used
//! as oracles.

pub mod io;
mod registry;
mod sketch;

use std::collections::HashMap;

use rand::seq::index::sample;
use thiserror::Error;

use crate::block_random::ceil_log2;
use crate::network_model::{ModularNetwork, ModuleId, ObjectId, ObjectNode, WEIGHT_TOL};
use crate::rng::stream;
use crate::scalar::Scalar;

pub use io::{export_csv, read_sketch, write_sketch, SketchFileError};
pub use registry::{KeyParseError, MatrixKey, MatrixRegistry, RegistryError};
pub use sketch::{erase_to_prefix, Sketch, SketchKind};

/// Module matrix slots.
pub const SLOT_OBJECT: u8 = 0;
pub const SLOT_ATTR: u8 = 1;
pub const SLOT_COUNT: u8 = 2;
pub const SLOT_MAGIC: u8 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SketchError {
    #[error("{sketches} sketches but {weights} weights")]
    LengthMismatch { sketches: usize, weights: usize },
    #[error("tuple weights must be nonnegative with sum at most 1 (sum {0})")]
    WeightViolation(f64),
    #[error("sketch has dimension {got}, registry has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("object `{0}` is not reachable from the output")]
    Unreachable(String),
    #[error("prototype sketches need every object directly below the output; `{0}` is deeper")]
    PrototypeScope(String),
    #[error("prefix {d_prime} outside 1..={d}")]
    PrefixOutOfRange { d_prime: usize, d: usize },
}

/// Tuple level of an object's (attribute, input) pair tuple.
pub fn object_tuple_level(depth: u32) -> u32 {
    2 * depth - 2
}

/// Tuple level of an object's input tuple.
pub fn input_tuple_level(depth: u32) -> u32 {
    2 * depth - 1
}

/// Deterministic (log N)-sparse magic number of an object, hashed from its
/// module and its attributes quantized to a 1e-6 grid.
pub fn magic_number<T: Scalar>(module: &ModuleId, attributes: &[T], d: usize, n_cap: usize) -> Vec<T> {
    let k = ceil_log2(n_cap).max(1).min(d);
    let mut tag = format!("magic/{module}");
    for (i, v) in attributes.iter().enumerate() {
        let q = (v.f64() * 1e6).round() as i64;
        if q != 0 {
            tag.push_str(&format!("/{i}:{q}"));
        }
    }
    let mut rng = stream(0, &tag, &[d as u64]);
    let mut out = vec![T::zero(); d];
    let val = T::of(1.0 / (k as f64).sqrt());
    for i in sample(&mut rng, d, k) {
        out[i] = val;
    }
    out
}

fn e1<T: Scalar>(d: usize) -> Vec<T> {
    let mut v = vec![T::zero(); d];
    v[0] = T::one();
    v
}

fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    y.iter_mut().zip(x).for_each(|(o, &v)| *o += a * v);
}

type ContentKey = (ModuleId, u32, Vec<(usize, u64)>, Vec<(usize, u64)>);

/// Per-call memo: identical subtrees (same module, depth, attributes and
/// children) share one object sketch.
#[derive(Default)]
struct Memo<T> {
    by_id: HashMap<ObjectId, usize>,
    by_content: HashMap<ContentKey, usize>,
    sketches: Vec<Sketch<T>>,
}

pub struct Sketcher<'r, T> {
    registry: &'r MatrixRegistry<T>,
    signature_mode: bool,
}

impl<'r, T: Scalar> Sketcher<'r, T> {
    pub fn new(registry: &'r MatrixRegistry<T>) -> Self {
        Sketcher { registry, signature_mode: false }
    }

    pub fn with_signatures(mut self, on: bool) -> Self {
        self.signature_mode = on;
        self
    }

    pub fn registry(&self) -> &MatrixRegistry<T> {
        self.registry
    }

    fn stamp(&self, mut s: Sketch<T>) -> Sketch<T> {
        s.signature = self.signature_mode;
        s.fingerprint = self.registry.fingerprint();
        s
    }

    fn check_dim(&self, got: usize) -> Result<(), SketchError> {
        let expected = self.registry.dim();
        if got != expected {
            return Err(SketchError::Dimension { expected, got });
        }
        Ok(())
    }

    /// Σ wᵢ (I + Rᵢ)/2 sᵢ with the tuple matrices of the given level.
    pub fn tuple_sketch(&self, sketches: &[&Sketch<T>], weights: &[T], level: u32) -> Result<Sketch<T>, SketchError> {
        self.tuple_values(&sketches.iter().map(|s| s.values.as_slice()).collect::<Vec<_>>(), weights, level)
            .map(|v| self.stamp(Sketch::new(v, SketchKind::Tuple, level)))
    }

    fn tuple_values(&self, items: &[&[T]], weights: &[T], level: u32) -> Result<Vec<T>, SketchError> {
        if items.len() != weights.len() {
            return Err(SketchError::LengthMismatch { sketches: items.len(), weights: weights.len() });
        }
        let sum: f64 = weights.iter().map(|w| w.f64()).sum();
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) || sum > 1.0 + WEIGHT_TOL {
            return Err(SketchError::WeightViolation(sum));
        }
        let d = self.registry.dim();
        let mut out = vec![T::zero(); d];
        let half = T::of(0.5);
        for (k, (s, &w)) in items.iter().zip(weights).enumerate() {
            self.check_dim(s.len())?;
            if w == T::zero() {
                continue;
            }
            let rs = self.registry.tuple(k + 1, level).mul(s);
            for ((o, &a), b) in out.iter_mut().zip(s.iter()).zip(rs) {
                *o += w * ((a + b) * half);
            }
        }
        Ok(out)
    }

    /// ½R_{M,1}x + ½R_{M,2}e₁, or thirds with R_{M,3}m_θ in signature mode.
    pub fn attribute_subsketch(&self, net: &ModularNetwork<T>, obj: &ObjectNode<T>) -> Result<Sketch<T>, SketchError> {
        self.check_dim(obj.attributes.len())?;
        let d = self.registry.dim();
        let m = &obj.producer;
        let c = if self.signature_mode { T::of(1.0 / 3.0) } else { T::of(0.5) };
        let mut out = vec![T::zero(); d];
        let rx = self.registry.module(m, SLOT_ATTR).mul(&obj.attributes);
        axpy(c, &rx, &mut out);
        let re = self.registry.module(m, SLOT_COUNT).mul(&e1(d));
        axpy(c, &re, &mut out);
        if self.signature_mode {
            let magic = magic_number(m, &obj.attributes, d, net.n_cap);
            let rm = self.registry.module(m, SLOT_MAGIC).mul(&magic);
            axpy(c, &rm, &mut out);
        }
        Ok(self.stamp(Sketch::new(out, SketchKind::Attribute, obj.depth)))
    }

    pub fn input_subsketch(&self, net: &ModularNetwork<T>, obj: &ObjectNode<T>) -> Result<Sketch<T>, SketchError> {
        let mut memo = Memo::default();
        self.input_inner(net, obj, &mut memo)
    }

    pub fn object_sketch(&self, net: &ModularNetwork<T>, obj: &ObjectNode<T>) -> Result<Sketch<T>, SketchError> {
        let mut memo = Memo::default();
        let k = self.object_inner(net, obj, &mut memo)?;
        Ok(memo.sketches.swap_remove(k))
    }

    /// The input subsketch of the output pseudo-object.
    pub fn overall_sketch(&self, net: &ModularNetwork<T>) -> Result<Sketch<T>, SketchError> {
        let mut memo = Memo::default();
        let mut s = self.input_inner(net, net.output_object(), &mut memo)?;
        s.kind = SketchKind::Overall;
        Ok(s)
    }

    fn input_inner(&self, net: &ModularNetwork<T>, obj: &ObjectNode<T>, memo: &mut Memo<T>) -> Result<Sketch<T>, SketchError> {
        if obj.depth == 0 {
            return Err(SketchError::Unreachable(obj.name.clone()));
        }
        let mut idx = Vec::with_capacity(obj.inputs.len());
        for (c, _) in &obj.inputs {
            idx.push(self.object_inner(net, net.object(*c), memo)?);
        }
        let items: Vec<&[T]> = idx.iter().map(|&k| memo.sketches[k].values.as_slice()).collect();
        let weights: Vec<T> = obj.inputs.iter().map(|(_, w)| *w).collect();
        let v = self.tuple_values(&items, &weights, input_tuple_level(obj.depth))?;
        Ok(self.stamp(Sketch::new(v, SketchKind::Input, obj.depth)))
    }

    fn object_inner(&self, net: &ModularNetwork<T>, obj: &ObjectNode<T>, memo: &mut Memo<T>) -> Result<usize, SketchError> {
        if let Some(&k) = memo.by_id.get(&obj.id) {
            return Ok(k);
        }
        if obj.depth < 2 {
            return Err(SketchError::Unreachable(obj.name.clone()));
        }
        let mut children = Vec::with_capacity(obj.inputs.len());
        for (c, w) in &obj.inputs {
            children.push((self.object_inner(net, net.object(*c), memo)?, w.f64().to_bits()));
        }
        let attrs: Vec<(usize, u64)> = obj
            .attributes
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, v)| (i, v.f64().to_bits()))
            .collect();
        let key = (obj.producer.clone(), obj.depth, attrs, children);
        if let Some(&k) = memo.by_content.get(&key) {
            memo.by_id.insert(obj.id, k);
            return Ok(k);
        }
        let attr = self.attribute_subsketch(net, obj)?;
        let items: Vec<&[T]> = key.3.iter().map(|&(k, _)| memo.sketches[k].values.as_slice()).collect();
        let weights: Vec<T> = obj.inputs.iter().map(|(_, w)| *w).collect();
        let input = self.tuple_values(&items, &weights, input_tuple_level(obj.depth))?;
        let half = T::of(0.5);
        let pair = self.tuple_values(&[&attr.values, &input], &[half, half], object_tuple_level(obj.depth))?;
        let r0 = self.registry.module(&obj.producer, SLOT_OBJECT).mul(&pair);
        let v: Vec<T> = pair.iter().zip(r0).map(|(&a, b)| (a + b) * half).collect();
        let k = memo.sketches.len();
        memo.sketches.push(self.stamp(Sketch::new(v, SketchKind::Object, obj.depth)));
        memo.by_content.insert(key, k);
        memo.by_id.insert(obj.id, k);
        Ok(k)
    }

    fn shallow_inputs<'n>(&self, net: &'n ModularNetwork<T>) -> Result<Vec<(&'n ObjectNode<T>, T)>, SketchError> {
        let mut out = Vec::new();
        for &(c, w) in &net.output_object().inputs {
            let o = net.object(c);
            self.check_dim(o.attributes.len())?;
            if !o.inputs.is_empty() {
                return Err(SketchError::PrototypeScope(o.name.clone()));
            }
            out.push((o, w));
        }
        Ok(out)
    }

    /// Σ w_θ R_{M(θ)} x_θ over the objects directly below the output.
    pub fn prototype_a_overall(&self, net: &ModularNetwork<T>) -> Result<Sketch<T>, SketchError> {
        let mut out = vec![T::zero(); self.registry.dim()];
        for (o, w) in self.shallow_inputs(net)? {
            let r = self.registry.module(&o.producer, SLOT_ATTR).mul(&o.attributes);
            axpy(w, &r, &mut out);
        }
        Ok(self.stamp(Sketch::new(out, SketchKind::Overall, 1)))
    }

    /// Tuple over prototype object sketches ½R_{M,1}x + ½R_{M,2}e₁.
    pub fn prototype_b_overall(&self, net: &ModularNetwork<T>) -> Result<Sketch<T>, SketchError> {
        let inputs = self.shallow_inputs(net)?;
        let d = self.registry.dim();
        let half = T::of(0.5);
        let mut objs = Vec::with_capacity(inputs.len());
        for (o, _) in &inputs {
            let mut v = vec![T::zero(); d];
            axpy(half, &self.registry.module(&o.producer, SLOT_ATTR).mul(&o.attributes), &mut v);
            axpy(half, &self.registry.module(&o.producer, SLOT_COUNT).mul(&e1(d)), &mut v);
            objs.push(v);
        }
        let items: Vec<&[T]> = objs.iter().map(|v| v.as_slice()).collect();
        let weights: Vec<T> = inputs.iter().map(|(_, w)| *w).collect();
        let v = self.tuple_values(&items, &weights, 1)?;
        Ok(self.stamp(Sketch::new(v, SketchKind::Overall, 1)))
    }
}
