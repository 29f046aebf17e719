//! Communication graph of one input: objects, their producing modules,
//! weighted input edges and attribute vectors.

mod build;
pub mod io;
pub mod synth;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use build::{build_network, EdgeSpec, ModuleSpec, NetworkSpec, ObjectSpec};
pub use io::{load_network, parse_network, save_network, write_network, ParseError};
pub use synth::{generate_synthetic, SyntheticProfile, WeightScheme};

pub const WEIGHT_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-9;
pub const DEFAULT_N_MULTIPLIER: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModuleId(pub String);

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModuleId {
    fn from(s: &str) -> Self {
        ModuleId(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    pub id: ModuleId,
    pub is_output: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectNode<T> {
    pub id: ObjectId,
    pub name: String,
    pub producer: ModuleId,
    pub attributes: Vec<T>,
    pub inputs: Vec<(ObjectId, T)>,
    /// 1 for the output pseudo-object, parent depth + 1 below it, 0 when
    /// the object is unreachable from the output.
    pub depth: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("no output module declared")]
    MissingOutputModule,
    #[error("more than one output module: {0} and {1}")]
    MultipleOutputModules(String, String),
    #[error("output module must produce exactly one object, found {0}")]
    OutputObjectCount(usize),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("invalid identifier `{0}`")]
    BadName(String),
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("object `{object}`: attribute index {index} outside dimension {dim}")]
    AttributeIndex { object: String, index: usize, dim: usize },
    #[error("object `{object}`: attribute index {index} given twice")]
    DuplicateAttribute { object: String, index: usize },
    #[error("object `{object}`: attribute entries must be finite and nonnegative")]
    NegativeAttribute { object: String },
    #[error("the output pseudo-object must have a zero attribute vector")]
    OutputAttributes,
    #[error("edge {parent} -> {child}: weight must be finite and nonnegative")]
    NegativeWeight { parent: String, child: String },
    #[error("object `{object}`: input weights sum to {sum} > 1")]
    WeightSum { object: String, sum: f64 },
    #[error("the output pseudo-object `{0}` is used as an input")]
    OutputNotSink(String),
    #[error("cycle through object `{0}`")]
    Cycle(String),
    #[error("object `{object}` is reached at depths {first} and {second}")]
    DepthInconsistent { object: String, first: u32, second: u32 },
    #[error("module `{module}` produces objects at depths {first} and {second}")]
    ModuleDepth { module: String, first: u32, second: u32 },
    #[error("N = {given} is below the required {required}")]
    NTooSmall { given: usize, required: usize },
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("path does not follow input edges at step {0}")]
    BadPath(usize),
    #[error("infeasible synthetic profile: {0}")]
    Infeasible(String),
    #[error("cannot shrink dimension from {from} to {to}")]
    Shrink { from: usize, to: usize },
}

/// One step below an object: which input position is taken and the module
/// of the object reached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    /// 1-based position in the parent's input list.
    pub position: usize,
    pub module: ModuleId,
}

/// Route from the output pseudo-object down to a target object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectPath {
    pub steps: Vec<PathStep>,
}

impl ObjectPath {
    /// Depth of the object the path ends at.
    pub fn depth(&self) -> u32 {
        self.steps.len() as u32 + 1
    }

    pub fn target_module(&self) -> Option<&ModuleId> {
        self.steps.last().map(|s| &s.module)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModularNetwork<T> {
    pub dim: usize,
    pub modules: Vec<Module>,
    pub objects: Vec<ObjectNode<T>>,
    pub output: ObjectId,
    /// N, the size parameter actually used.
    pub n_cap: usize,
    pub n_multiplier: usize,
    /// H = 3 × maximum depth.
    pub h_cap: u32,
}

impl<T: Scalar> ModularNetwork<T> {
    pub fn object(&self, id: ObjectId) -> &ObjectNode<T> {
        &self.objects[id.0]
    }

    pub fn output_object(&self) -> &ObjectNode<T> {
        self.object(self.output)
    }

    pub fn by_name(&self, name: &str) -> Option<&ObjectNode<T>> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn output_module(&self) -> &ModuleId {
        &self.output_object().producer
    }

    pub fn module_objects<'a>(&'a self, module: &'a ModuleId) -> impl Iterator<Item = &'a ObjectNode<T>> + 'a {
        self.objects.iter().filter(move |o| &o.producer == module && o.depth > 0)
    }

    pub fn max_depth(&self) -> u32 {
        self.objects.iter().map(|o| o.depth).max().unwrap_or(1)
    }

    /// Product of edge weights along an object-id path starting at the output.
    /// With parallel edges between two objects the first one is used.
    pub fn effective_weight(&self, path: &[ObjectId]) -> Result<T, NetworkError> {
        match path.first() {
            Some(&first) if first == self.output => {}
            _ => return Err(NetworkError::BadPath(0)),
        }
        let mut w = T::one();
        for (k, pair) in path.windows(2).enumerate() {
            let parent = self.objects.get(pair[0].0).ok_or(NetworkError::BadPath(k + 1))?;
            let (_, ew) = parent
                .inputs
                .iter()
                .find(|(c, _)| *c == pair[1])
                .ok_or(NetworkError::BadPath(k + 1))?;
            w *= *ew;
        }
        Ok(w)
    }

    /// Every route from the output to `target`, with its effective weight.
    pub fn paths_to(&self, target: ObjectId) -> Vec<(ObjectPath, T)> {
        let mut out = Vec::new();
        let mut steps = Vec::new();
        self.walk(self.output, target, T::one(), &mut steps, &mut out);
        out
    }

    fn walk(&self, at: ObjectId, target: ObjectId, w: T, steps: &mut Vec<PathStep>, out: &mut Vec<(ObjectPath, T)>) {
        if at == target {
            out.push((ObjectPath { steps: steps.clone() }, w));
            return;
        }
        for (pos, &(child, ew)) in self.object(at).inputs.iter().enumerate() {
            steps.push(PathStep { position: pos + 1, module: self.object(child).producer.clone() });
            self.walk(child, target, w * ew, steps, out);
            steps.pop();
        }
    }

    /// Objects along a path, output first.
    pub fn resolve_path(&self, path: &ObjectPath) -> Result<Vec<ObjectId>, NetworkError> {
        let mut ids = vec![self.output];
        let mut at = self.output;
        for (k, step) in path.steps.iter().enumerate() {
            let &(child, _) = self
                .object(at)
                .inputs
                .get(step.position.wrapping_sub(1))
                .ok_or(NetworkError::BadPath(k + 1))?;
            if self.object(child).producer != step.module {
                return Err(NetworkError::BadPath(k + 1));
            }
            ids.push(child);
            at = child;
        }
        Ok(ids)
    }

    /// Zero-pad every attribute vector to a larger dimension.
    pub fn with_dimension(mut self, d: usize) -> Result<Self, NetworkError> {
        if d < self.dim {
            return Err(NetworkError::Shrink { from: self.dim, to: d });
        }
        for o in &mut self.objects {
            o.attributes.resize(d, T::zero());
        }
        self.dim = d;
        Ok(self)
    }
}
