//! Networks, registries and sketches shared by the commands.

use recsketch::block_random::BlockParams;
use recsketch::network_model::{build_network, generate_synthetic, load_network, ModularNetwork, NetworkSpec};
use recsketch::rng::fingerprint;
use recsketch::sketcher::{erase_to_prefix, MatrixRegistry, Sketch, Sketcher};

use crate::config::{Config, Prototype};
use crate::error::{invalid, CliError};

pub type Net = ModularNetwork<f64>;

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    fingerprint(master, &format!("trial/{trial}"))
}

pub const LEAF: &str = "leaf";

/// Output → n2 → … → leaf, with the leaf at depth `depth`. The first edge
/// carries `weight`, the rest weight 1.
pub fn chain(d: usize, depth: u32, weight: f64, attributes: &[f64]) -> Result<Net, CliError> {
    if depth < 2 {
        return Err(CliError::Config(format!("sweep.depth: {depth} is below 2")));
    }
    if attributes.len() > d {
        return Err(CliError::Config(format!("recover.attributes: {} entries exceed d = {d}", attributes.len())));
    }
    let mut spec = NetworkSpec::new(d).output_module("output").object("root", "output", vec![]);
    let mut parent = "root".to_string();
    for h in 2..=depth {
        let (name, module, attrs) = if h == depth {
            (LEAF.to_string(), LEAF.to_string(), attributes.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect())
        } else {
            (format!("n{h}"), format!("m{h}"), vec![])
        };
        let w = if h == 2 { weight } else { 1.0 };
        spec = spec.module(&module).object(&name, &module, attrs).edge(&parent, &name, w);
        parent = name;
    }
    build_network(&spec).map_err(invalid("chain network"))
}

/// The configured network at dimension `d`, or None without a [network]
/// section. Synthetic networks are drawn with `seed`.
pub fn configured_network(cfg: &Config, d: usize, seed: u64) -> Result<Option<Net>, CliError> {
    let Some(n) = &cfg.network else { return Ok(None) };
    let net = if let Some(file) = &n.file {
        let path = cfg.resolve(file);
        if !path.exists() {
            return Err(CliError::Config(format!("network.file: {} does not exist", path.display())));
        }
        load_network(&path, Some(d)).map_err(invalid("network.file"))?
    } else {
        let mut profile = n.synthetic.clone().expect("validated");
        profile.dim = d;
        generate_synthetic(&profile, seed).map_err(invalid("network.synthetic"))?
    };
    let net = if net.dim < d { net.with_dimension(d).map_err(invalid("network"))? } else { net };
    if net.dim != d {
        return Err(CliError::Validation(format!("network dimension {} exceeds d = {d}", net.dim)));
    }
    Ok(Some(net))
}

pub fn registry(cfg: &Config, params: BlockParams, seed: u64) -> Result<MatrixRegistry<f64>, CliError> {
    MatrixRegistry::new(seed, params, cfg.params.matrix).map_err(invalid("registry"))
}

pub fn d_prime(cfg: &Config, d: usize) -> Option<usize> {
    cfg.modes.erase_fraction.filter(|f| *f < 1.0).map(|f| ((f * d as f64).floor() as usize).max(1))
}

/// Overall sketch under the configured modes, erased if requested.
pub fn sketch(cfg: &Config, reg: &MatrixRegistry<f64>, net: &Net) -> Result<Sketch<f64>, CliError> {
    let sk = Sketcher::new(reg).with_signatures(cfg.modes.signature);
    let s = match cfg.modes.prototype {
        None => sk.overall_sketch(net),
        Some(Prototype::A) => sk.prototype_a_overall(net),
        Some(Prototype::B) => sk.prototype_b_overall(net),
    }
    .map_err(invalid("sketch"))?;
    match d_prime(cfg, s.dim()) {
        Some(dp) => erase_to_prefix(&s, dp).map_err(invalid("modes.erase_fraction")),
        None => Ok(s),
    }
}

/// Block parameters sized for `net` at target `d`, and the network padded
/// to the rounded dimension.
pub fn fit(cfg: &Config, net: Net, d_target: usize) -> Result<(Net, BlockParams), CliError> {
    let params = cfg.block_params(d_target, net.n_cap)?;
    let net = net.with_dimension(params.d).map_err(invalid("network"))?;
    Ok((net, params))
}
