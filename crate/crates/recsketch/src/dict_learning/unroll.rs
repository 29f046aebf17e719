use serde::{Deserialize, Serialize};

use super::{learn_dictionary, DLConfig, DLError};
use crate::block_random::BlockParams;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Attribute,
    E1,
    ObjectSketch,
    Garbage,
}

fn linf<T: Scalar>(v: &[T]) -> f64 {
    crate::scalar::linf(v).f64()
}

/// Labels the vectors recovered from one object's two subsketches.
///
/// `groups[g]` holds the vectors learned from subsketch g. Vectors below
/// `eps` in ℓ∞ are garbage. If no remaining vector has a first coordinate of
/// at least 3w·2^{-H}, everything is garbage; otherwise the one with the
/// largest first coordinate is e₁, its siblings are attribute vectors and
/// the other group's vectors are object sketches.
pub fn classify_recovered_vectors<T: Scalar>(groups: &[Vec<Vec<T>>], w: f64, levels: usize, eps: f64) -> Vec<Vec<Label>> {
    let mut labels: Vec<Vec<Label>> = groups
        .iter()
        .map(|g| g.iter().map(|v| if linf(v) < eps { Label::Garbage } else { Label::ObjectSketch }).collect())
        .collect();
    let threshold = 3.0 * w * 2f64.powi(-(levels as i32));
    let mut best: Option<(usize, usize, f64)> = None;
    for (gi, g) in groups.iter().enumerate() {
        for (vi, v) in g.iter().enumerate() {
            let first = v.first().map_or(0.0, |x| x.f64());
            if labels[gi][vi] != Label::Garbage && best.is_none_or(|(_, _, b)| first > b) {
                best = Some((gi, vi, first));
            }
        }
    }
    match best {
        Some((gi, vi, first)) if first >= threshold => {
            for (k, l) in labels[gi].iter_mut().enumerate() {
                if *l != Label::Garbage {
                    *l = if k == vi { Label::E1 } else { Label::Attribute };
                }
            }
        }
        _ => labels.iter_mut().flatten().for_each(|l| *l = Label::Garbage),
    }
    labels
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnrollConfig {
    /// Weight goal w.
    pub w: f64,
    /// Network depth; H = 3·depth.
    pub depth: u32,
    pub dl: DLConfig,
}

impl UnrollConfig {
    pub fn levels(&self) -> usize {
        3 * self.depth as usize
    }
}

/// Attribute estimates of one learned module, unscaled by its e₁.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleEstimate<T> {
    /// (unrolling step, learned matrix) of the module's object matrix.
    pub key: (usize, usize),
    /// (source sketch, attribute estimate).
    pub occurrences: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> ModuleEstimate<T> {
    pub fn mean(&self) -> Vec<T> {
        let d = self.occurrences.first().map_or(0, |(_, v)| v.len());
        let mut out = vec![T::zero(); d];
        for (_, v) in &self.occurrences {
            out.iter_mut().zip(v).for_each(|(o, &x)| *o += x);
        }
        let n = T::of(self.occurrences.len().max(1) as f64);
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

/// Parent module → child module, observed through an input subsketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RecoveredEdge {
    pub parent: Option<(usize, usize)>,
    pub child: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnrollResult<T> {
    pub modules: Vec<ModuleEstimate<T>>,
    pub edges: Vec<RecoveredEdge>,
    /// Live vectors fed to the learner at each step.
    pub samples_per_step: Vec<usize>,
    /// Learned matrices per step.
    pub matrices_per_step: Vec<usize>,
    /// Stopped before every level was unrolled.
    pub partial: bool,
}

#[derive(Clone, Debug)]
struct Node<T> {
    source: usize,
    vector: Vec<T>,
    /// Module key of the object this vector belongs to, once known.
    module: Option<(usize, usize)>,
    /// Module key of the parent object, for edges.
    parent_module: Option<(usize, usize)>,
    /// Index of the producing node in the previous step.
    parent: usize,
}

fn children<T: Scalar>(
    nodes: &[Node<T>],
    params: &BlockParams,
    cfg: &DLConfig,
    eps: f64,
) -> Result<(Vec<Vec<(usize, Vec<T>)>>, usize), DLError> {
    let samples: Vec<Vec<T>> = nodes.iter().map(|n| n.vector.clone()).collect();
    let dict = learn_dictionary(&samples, params, cfg)?;
    let out = (0..nodes.len())
        .map(|k| {
            (0..dict.n_matrices())
                .map(|i| (i, dict.coefficient_vector(k, i)))
                .filter(|(_, v)| linf(v) >= eps)
                .collect()
        })
        .collect();
    Ok((out, dict.n_matrices()))
}

/// Alternates dictionary learning and classification to peel overall
/// sketches back to per-module attribute estimates.
///
/// Step 0 splits overall sketches into object sketches; then, per depth
/// level, object sketches lose their object matrix, pair tuples split into
/// subsketches, and subsketches split into attribute vectors, e₁'s and
/// child object sketches.
pub fn unroll_network<T: Scalar>(sketches: &[Vec<T>], params: &BlockParams, config: &UnrollConfig) -> Result<UnrollResult<T>, DLError> {
    let levels = config.levels().max(2);
    let dl = DLConfig { levels, ..config.dl.clone() };
    let mut result = UnrollResult {
        modules: Vec::new(),
        edges: Vec::new(),
        samples_per_step: Vec::new(),
        matrices_per_step: Vec::new(),
        partial: false,
    };
    let mut step = 0usize;
    let mut level = 1usize;
    let run = |nodes: &[Node<T>], level: usize, result: &mut UnrollResult<T>| {
        let cfg = dl.at_level(level.min(levels - 1));
        let eps = dl.eps((level + 1).min(levels));
        result.samples_per_step.push(nodes.len());
        let (kids, n) = children(nodes, params, &cfg, eps)?;
        result.matrices_per_step.push(n);
        Ok::<_, DLError>(kids)
    };

    let roots: Vec<Node<T>> = sketches
        .iter()
        .enumerate()
        .map(|(k, v)| Node { source: k, vector: v.clone(), module: None, parent_module: None, parent: k })
        .collect();
    let kids = run(&roots, level, &mut result)?;
    let mut objects: Vec<Node<T>> = kids
        .into_iter()
        .enumerate()
        .flat_map(|(p, ks)| {
            let src = roots[p].source;
            ks.into_iter().map(move |(_, v)| Node { source: src, vector: v, module: None, parent_module: None, parent: p })
        })
        .collect();

    for _ in 1..config.depth.max(1) {
        if objects.is_empty() {
            break;
        }
        // Object sketch → pair tuple; the learned matrix names the module.
        step += 1;
        level += 1;
        let kids = run(&objects, level, &mut result)?;
        let pairs: Vec<Node<T>> = kids
            .into_iter()
            .enumerate()
            .flat_map(|(p, ks)| {
                let o = &objects[p];
                let (src, pm) = (o.source, o.parent_module);
                ks.into_iter()
                    .map(move |(i, v)| Node { source: src, vector: v, module: Some((step, i)), parent_module: pm, parent: p })
            })
            .collect();
        if pairs.is_empty() {
            break;
        }
        // Pair tuple → attribute and input subsketches.
        step += 1;
        level += 1;
        let kids = run(&pairs, level, &mut result)?;
        let subs: Vec<Node<T>> = kids
            .into_iter()
            .enumerate()
            .flat_map(|(p, ks)| {
                let o = &pairs[p];
                let (src, m, pm) = (o.source, o.module, o.parent_module);
                ks.into_iter().map(move |(_, v)| Node { source: src, vector: v, module: m, parent_module: pm, parent: p })
            })
            .collect();
        if subs.is_empty() {
            break;
        }
        // Subsketches → attribute vectors, e₁'s and child object sketches.
        step += 1;
        level += 1;
        let kids = run(&subs, level, &mut result)?;
        let eps = dl.eps((level + 1).min(levels));
        let mut next = Vec::new();
        for (p, pair) in pairs.iter().enumerate() {
            let members: Vec<usize> = (0..subs.len()).filter(|&s| subs[s].parent == p).collect();
            let groups: Vec<Vec<Vec<T>>> = members.iter().map(|&s| kids[s].iter().map(|(_, v)| v.clone()).collect()).collect();
            let labels = classify_recovered_vectors(&groups, config.w, levels, eps);
            let module = pair.module.expect("pairs carry a module");
            result.edges.push(RecoveredEdge { parent: pair.parent_module, child: module });
            let e1 = groups.iter().zip(&labels).find_map(|(g, l)| l.iter().position(|x| *x == Label::E1).map(|i| g[i][0]));
            let Some(scale) = e1 else { continue };
            for (g, l) in groups.iter().zip(&labels) {
                for (v, lab) in g.iter().zip(l) {
                    match lab {
                        Label::Attribute => {
                            let est = v.iter().map(|&x| x / scale).collect();
                            match result.modules.iter_mut().find(|m| m.key == module) {
                                Some(m) => m.occurrences.push((pair.source, est)),
                                None => result.modules.push(ModuleEstimate { key: module, occurrences: vec![(pair.source, est)] }),
                            }
                        }
                        Label::ObjectSketch => next.push(Node {
                            source: pair.source,
                            vector: v.clone(),
                            module: None,
                            parent_module: Some(module),
                            parent: p,
                        }),
                        Label::E1 | Label::Garbage => {}
                    }
                }
            }
        }
        objects = next;
    }
    result.edges.sort();
    result.edges.dedup();
    let expected = 1 + 3 * (config.depth.max(1) as usize - 1);
    result.partial = result.modules.is_empty() || result.samples_per_step.len() < expected;
    Ok(result)
}
