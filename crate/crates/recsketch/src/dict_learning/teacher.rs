use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::unroll::UnrollResult;
use crate::network_model::{build_network, ModularNetwork, ModuleId, NetworkError, NetworkSpec};
use crate::rng::stream;
use crate::scalar::{linf, Scalar};

/// Fixed tree below the output: one object per module, equal weights,
/// attributes redrawn for every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeacherConfig {
    pub dim: usize,
    pub modules: usize,
    pub attr_nonzeros: usize,
    pub attr_span: usize,
    pub samples: usize,
}

impl TeacherConfig {
    pub fn weight(&self) -> f64 {
        1.0 / self.modules.max(1) as f64
    }

    pub fn module_names(&self) -> Vec<String> {
        (0..self.modules).map(|m| format!("t{m}")).collect()
    }
}

pub fn teacher_networks<T: Scalar>(cfg: &TeacherConfig, seed: u64) -> Result<Vec<ModularNetwork<T>>, NetworkError> {
    let names = cfg.module_names();
    (0..cfg.samples)
        .map(|k| {
            let mut rng = stream(seed, "teacher", &[k as u64]);
            let mut spec = NetworkSpec::new(cfg.dim).output_module("output").object("root", "output", vec![]);
            for name in &names {
                let attrs = sample(&mut rng, cfg.attr_span, cfg.attr_nonzeros)
                    .into_iter()
                    .map(|i| (i, T::of(rng.random_range(0.05..1.0))))
                    .collect();
                spec = spec.module(name).object(&format!("o_{name}"), name, attrs).edge("root", &format!("o_{name}"), T::of(cfg.weight()));
            }
            build_network(&spec)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleScore {
    pub module: ModuleId,
    /// Learned module key matched to it, if any.
    pub learned: Option<(usize, usize)>,
    /// Median ℓ∞ error of the matched module's per-sample estimates.
    pub median_linf: f64,
    pub occurrences: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TeacherScore {
    pub modules: Vec<ModuleScore>,
    /// Learned modules not matched to any teacher module.
    pub spurious: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::INFINITY;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Greedy one-to-one matching of learned modules to teacher modules by
/// median per-sample ℓ∞ error; matches above `tolerance` count as spurious.
pub fn score_unroll<T: Scalar>(result: &UnrollResult<T>, networks: &[ModularNetwork<T>], tolerance: f64) -> TeacherScore {
    let Some(first) = networks.first() else {
        return TeacherScore { modules: Vec::new(), spurious: result.modules.len() };
    };
    let truth: Vec<ModuleId> = first.modules.iter().filter(|m| !m.is_output).map(|m| m.id.clone()).collect();
    let err = |li: usize, t: &ModuleId| {
        median(
            result.modules[li]
                .occurrences
                .iter()
                .map(|(src, est)| {
                    let x = &networks[*src].module_objects(t).next().expect("teacher module has an object").attributes;
                    let diff: Vec<T> = est.iter().zip(x).map(|(&a, &b)| a - b).collect();
                    linf(&diff).f64()
                })
                .collect(),
        )
    };
    let mut pairs: Vec<(f64, usize, usize)> = (0..result.modules.len())
        .flat_map(|li| truth.iter().enumerate().map(move |(ti, _)| (li, ti)))
        .map(|(li, ti)| (err(li, &truth[ti]), li, ti))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut modules: Vec<ModuleScore> =
        truth.iter().map(|m| ModuleScore { module: m.clone(), learned: None, median_linf: f64::INFINITY, occurrences: 0 }).collect();
    let mut used = vec![false; result.modules.len()];
    for (e, li, ti) in pairs {
        if used[li] || modules[ti].learned.is_some() || e > tolerance {
            continue;
        }
        used[li] = true;
        modules[ti] = ModuleScore {
            module: truth[ti].clone(),
            learned: Some(result.modules[li].key),
            median_linf: e,
            occurrences: result.modules[li].occurrences.len(),
        };
    }
    for (ti, m) in modules.iter_mut().enumerate() {
        if m.learned.is_none() {
            // Report the best unmatched error for diagnostics.
            m.median_linf = (0..result.modules.len()).filter(|&li| !used[li]).map(|li| err(li, &truth[ti])).fold(f64::INFINITY, f64::min);
        }
    }
    TeacherScore { modules, spurious: used.iter().filter(|u| !**u).count() }
}
