use std::collections::{HashMap, VecDeque};

use super::*;

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleSpec {
    pub name: String,
    pub is_output: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSpec<T> {
    pub name: String,
    pub module: String,
    /// Sparse (index, value) attribute entries.
    pub attributes: Vec<(usize, T)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec<T> {
    /// The consuming object.
    pub parent: String,
    /// The object whose output is consumed.
    pub child: String,
    pub weight: T,
}

/// Declarative description of a network. Edges of one parent keep their
/// listed order, which fixes tuple positions.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec<T> {
    pub dim: usize,
    pub n_multiplier: usize,
    /// Requested N; the builder raises nothing and rejects values below the minimum.
    pub n_cap: Option<usize>,
    pub modules: Vec<ModuleSpec>,
    pub objects: Vec<ObjectSpec<T>>,
    pub edges: Vec<EdgeSpec<T>>,
}

impl<T> NetworkSpec<T> {
    pub fn new(dim: usize) -> Self {
        NetworkSpec {
            dim,
            n_multiplier: DEFAULT_N_MULTIPLIER,
            n_cap: None,
            modules: Vec::new(),
            objects: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn module(mut self, name: &str) -> Self {
        self.modules.push(ModuleSpec { name: name.into(), is_output: false });
        self
    }

    pub fn output_module(mut self, name: &str) -> Self {
        self.modules.push(ModuleSpec { name: name.into(), is_output: true });
        self
    }

    pub fn object(mut self, name: &str, module: &str, attributes: Vec<(usize, T)>) -> Self {
        self.objects.push(ObjectSpec { name: name.into(), module: module.into(), attributes });
        self
    }

    pub fn edge(mut self, parent: &str, child: &str, weight: T) -> Self {
        self.edges.push(EdgeSpec { parent: parent.into(), child: child.into(), weight });
        self
    }
}

pub(crate) fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

pub fn build_network<T: Scalar>(spec: &NetworkSpec<T>) -> Result<ModularNetwork<T>, NetworkError> {
    if spec.dim == 0 {
        return Err(NetworkError::ZeroDim);
    }
    let mut modules: Vec<Module> = Vec::new();
    let mut output_module: Option<&str> = None;
    for m in &spec.modules {
        if !valid_name(&m.name) {
            return Err(NetworkError::BadName(m.name.clone()));
        }
        if modules.iter().any(|x| x.id.0 == m.name) {
            return Err(NetworkError::DuplicateName(m.name.clone()));
        }
        if m.is_output {
            if let Some(prev) = output_module {
                return Err(NetworkError::MultipleOutputModules(prev.into(), m.name.clone()));
            }
            output_module = Some(&m.name);
        }
        modules.push(Module { id: ModuleId(m.name.clone()), is_output: m.is_output });
    }
    let output_module = output_module.ok_or(NetworkError::MissingOutputModule)?;

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut objects: Vec<ObjectNode<T>> = Vec::with_capacity(spec.objects.len());
    for (k, o) in spec.objects.iter().enumerate() {
        if !valid_name(&o.name) {
            return Err(NetworkError::BadName(o.name.clone()));
        }
        if index.insert(&o.name, k).is_some() {
            return Err(NetworkError::DuplicateName(o.name.clone()));
        }
        if !modules.iter().any(|m| m.id.0 == o.module) {
            return Err(NetworkError::UnknownModule(o.module.clone()));
        }
        let mut attributes = vec![T::zero(); spec.dim];
        let mut seen = vec![false; spec.dim];
        for &(i, v) in &o.attributes {
            if i >= spec.dim {
                return Err(NetworkError::AttributeIndex { object: o.name.clone(), index: i, dim: spec.dim });
            }
            if seen[i] {
                return Err(NetworkError::DuplicateAttribute { object: o.name.clone(), index: i });
            }
            if !v.is_finite() || v < T::zero() {
                return Err(NetworkError::NegativeAttribute { object: o.name.clone() });
            }
            seen[i] = true;
            attributes[i] = v;
        }
        normalize(&mut attributes);
        objects.push(ObjectNode {
            id: ObjectId(k),
            name: o.name.clone(),
            producer: ModuleId(o.module.clone()),
            attributes,
            inputs: Vec::new(),
            depth: 0,
        });
    }
    let outs: Vec<usize> = objects.iter().filter(|o| o.producer.0 == output_module).map(|o| o.id.0).collect();
    if outs.len() != 1 {
        return Err(NetworkError::OutputObjectCount(outs.len()));
    }
    let output = ObjectId(outs[0]);
    if objects[output.0].attributes.iter().any(|v| *v != T::zero()) {
        return Err(NetworkError::OutputAttributes);
    }

    for e in &spec.edges {
        let p = *index.get(e.parent.as_str()).ok_or_else(|| NetworkError::UnknownObject(e.parent.clone()))?;
        let c = *index.get(e.child.as_str()).ok_or_else(|| NetworkError::UnknownObject(e.child.clone()))?;
        if !e.weight.is_finite() || e.weight < T::zero() {
            return Err(NetworkError::NegativeWeight { parent: e.parent.clone(), child: e.child.clone() });
        }
        if c == output.0 {
            return Err(NetworkError::OutputNotSink(e.child.clone()));
        }
        objects[p].inputs.push((ObjectId(c), e.weight));
    }
    for o in &objects {
        let sum: f64 = o.inputs.iter().map(|(_, w)| w.f64()).sum();
        if sum > 1.0 + WEIGHT_TOL {
            return Err(NetworkError::WeightSum { object: o.name.clone(), sum });
        }
    }
    check_acyclic(&objects)?;
    assign_depths(&mut objects, output)?;

    let mut module_depth: HashMap<&ModuleId, u32> = HashMap::new();
    for o in objects.iter().filter(|o| o.depth > 0) {
        let d = *module_depth.entry(&o.producer).or_insert(o.depth);
        if d != o.depth {
            return Err(NetworkError::ModuleDepth { module: o.producer.0.clone(), first: d, second: o.depth });
        }
    }

    let required = spec.n_multiplier.max(1) * modules.len().max(objects.len());
    let n_cap = match spec.n_cap {
        Some(n) if n < required => return Err(NetworkError::NTooSmall { given: n, required }),
        Some(n) => n,
        None => required,
    };
    let max_depth = objects.iter().map(|o| o.depth).max().unwrap_or(1);
    Ok(ModularNetwork {
        dim: spec.dim,
        modules,
        objects,
        output,
        n_cap,
        n_multiplier: spec.n_multiplier.max(1),
        h_cap: 3 * max_depth,
    })
}

/// Rescale a nonzero vector to unit norm unless it already is within rounding.
pub(crate) fn normalize<T: Scalar>(v: &mut [T]) {
    let n = v.iter().map(|x| x.f64() * x.f64()).sum::<f64>().sqrt();
    if n > 0.0 && (n - 1.0).abs() > 1e-12 {
        let n = T::of(n);
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn check_acyclic<T>(objects: &[ObjectNode<T>]) -> Result<(), NetworkError> {
    // 0 unvisited, 1 on stack, 2 done
    let mut state = vec![0u8; objects.len()];
    for start in 0..objects.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&(c, _)) = objects[v].inputs.get(*next) {
                *next += 1;
                match state[c.0] {
                    0 => {
                        state[c.0] = 1;
                        stack.push((c.0, 0));
                    }
                    1 => return Err(NetworkError::Cycle(objects[c.0].name.clone())),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}

fn assign_depths<T>(objects: &mut [ObjectNode<T>], output: ObjectId) -> Result<(), NetworkError> {
    objects[output.0].depth = 1;
    let mut queue = VecDeque::from([output.0]);
    while let Some(v) = queue.pop_front() {
        let d = objects[v].depth + 1;
        for k in 0..objects[v].inputs.len() {
            let c = objects[v].inputs[k].0 .0;
            match objects[c].depth {
                0 => {
                    objects[c].depth = d;
                    queue.push_back(c);
                }
                prev if prev != d => {
                    return Err(NetworkError::DepthInconsistent {
                        object: objects[c].name.clone(),
                        first: prev,
                        second: d,
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}
