use rand::seq::index::sample;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::*;
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// Every input weighted 1/k.
    Uniform,
    /// Exponential draws normalized to sum to one.
    Dirichlet,
}

/// A fan-in tree below the output. Modules are split between the depth
/// levels so every module keeps a single depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    /// Modules excluding the output module.
    pub n_modules: usize,
    /// Depth of the deepest objects (the output has depth 1).
    pub depth: u32,
    pub fan_in: usize,
    pub weights: WeightScheme,
    /// Nonzero attribute entries per object.
    pub attr_nonzeros: usize,
    /// Attribute entries are drawn from coordinates [0, attr_span).
    pub attr_span: usize,
    pub dim: usize,
    #[serde(default = "default_multiplier")]
    pub n_multiplier: usize,
}

fn default_multiplier() -> usize {
    DEFAULT_N_MULTIPLIER
}

impl SyntheticProfile {
    pub fn single_leaf(dim: usize) -> Self {
        SyntheticProfile {
            n_modules: 1,
            depth: 2,
            fan_in: 1,
            weights: WeightScheme::Uniform,
            attr_nonzeros: 2,
            attr_span: dim.min(8),
            dim,
            n_multiplier: DEFAULT_N_MULTIPLIER,
        }
    }
}

pub fn generate_synthetic<T: Scalar>(profile: &SyntheticProfile, seed: u64) -> Result<ModularNetwork<T>, NetworkError> {
    let levels = profile.depth.saturating_sub(1) as usize;
    let infeasible = profile.depth == 0
        || profile.dim == 0
        || profile.attr_span > profile.dim
        || profile.attr_nonzeros > profile.attr_span
        || (levels > 0 && (profile.fan_in == 0 || profile.n_modules < levels));
    if infeasible {
        return Err(infeasible_error(profile));
    }
    let mut rng = stream(seed, "synthetic", &[]);
    let mut spec = NetworkSpec::new(profile.dim).output_module("output");
    spec.n_multiplier = profile.n_multiplier;
    for m in 0..profile.n_modules {
        spec = spec.module(&format!("m{m}"));
    }
    spec = spec.object("root", "output", vec![]);
    let mut frontier = vec!["root".to_string()];
    for level in 0..levels {
        let mods: Vec<usize> = (0..profile.n_modules).filter(|m| m % levels == level).collect();
        let mut next = Vec::new();
        for parent in &frontier {
            let weights: Vec<f64> = match profile.weights {
                WeightScheme::Uniform => vec![1.0 / profile.fan_in as f64; profile.fan_in],
                WeightScheme::Dirichlet => {
                    let g: Vec<f64> = (0..profile.fan_in).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                    let s: f64 = g.iter().sum();
                    g.into_iter().map(|v| v / s).collect()
                }
            };
            for w in weights {
                let name = format!("o{}", spec.objects.len());
                let module = mods[rng.random_range(0..mods.len())];
                let attrs = sample(&mut rng, profile.attr_span, profile.attr_nonzeros)
                    .into_iter()
                    .map(|i| (i, T::of(rng.random_range(0.05..1.0))))
                    .collect();
                spec = spec.object(&name, &format!("m{module}"), attrs).edge(parent, &name, T::of(w));
                next.push(name);
            }
        }
        frontier = next;
    }
    build_network(&spec)
}

fn infeasible_error(p: &SyntheticProfile) -> NetworkError {
    NetworkError::Infeasible(format!(
        "{} modules over {} levels, fan-in {}, {} nonzeros in span {} of dim {}",
        p.n_modules,
        p.depth.saturating_sub(1),
        p.fan_in,
        p.attr_nonzeros,
        p.attr_span,
        p.dim
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf_profile() {
        let net: ModularNetwork<f64> = generate_synthetic(&SyntheticProfile::single_leaf(16), 1).unwrap();
        assert_eq!(net.objects.len(), 2);
        assert_eq!(net.output_object().inputs.len(), 1);
        assert_eq!(net.output_object().inputs[0].1, 1.0);
        assert_eq!(net.object(net.output_object().inputs[0].0).depth, 2);
    }

    #[test]
    fn deterministic_and_uniform() {
        let p = SyntheticProfile { n_modules: 4, depth: 3, fan_in: 3, ..SyntheticProfile::single_leaf(32) };
        let a: ModularNetwork<f64> = generate_synthetic(&p, 9).unwrap();
        let b: ModularNetwork<f64> = generate_synthetic(&p, 9).unwrap();
        assert_eq!(a, b);
        for o in &a.objects {
            for (_, w) in &o.inputs {
                assert_eq!(*w, 1.0 / 3.0);
            }
        }
        assert_eq!(a.objects.len(), 1 + 3 + 9);
    }

    #[test]
    fn infeasible() {
        let p = SyntheticProfile { n_modules: 1, depth: 4, ..SyntheticProfile::single_leaf(8) };
        assert!(generate_synthetic::<f64>(&p, 0).is_err());
    }
}
