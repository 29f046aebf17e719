//! Run configuration, one TOML file per run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use recsketch::block_random::{BlockParams, MatrixMode};
use recsketch::dict_learning::{DLConfig, PlantConfig, TeacherConfig};
use recsketch::network_model::SyntheticProfile;
use recsketch::recovery::{BetaConvention, RouteSet};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub output: PathBuf,
    pub run_id: Option<String>,
    #[serde(default)]
    pub params: ParamsCfg,
    pub network: Option<NetworkCfg>,
    #[serde(default)]
    pub sweep: SweepCfg,
    #[serde(default)]
    pub modes: ModesCfg,
    #[serde(default)]
    pub calibrate: CalibrateCfg,
    #[serde(default)]
    pub recover: RecoverCfg,
    #[serde(default)]
    pub similarity: SimilarityCfg,
    #[serde(default)]
    pub learn: LearnCfg,
    #[serde(default)]
    pub repo: RepoCfg,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsCfg {
    /// Target dimension; rounded up to a multiple of the block size.
    pub d: usize,
    /// N; taken from the network when absent.
    pub n_cap: Option<usize>,
    /// Explicit block size; the smallest valid one when absent.
    pub b: Option<usize>,
    pub q: f64,
    pub matrix: MatrixMode,
}

impl Default for ParamsCfg {
    fn default() -> Self {
        ParamsCfg { d: 1024, n_cap: None, b: None, q: 1.0, matrix: MatrixMode::BlockRandom }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkCfg {
    pub file: Option<PathBuf>,
    pub synthetic: Option<SyntheticProfile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepCfg {
    /// Defaults to `params.d`.
    pub d: Vec<usize>,
    pub weight: Vec<f64>,
    pub depth: Vec<u32>,
    pub trials: usize,
}

impl Default for SweepCfg {
    fn default() -> Self {
        SweepCfg { d: Vec::new(), weight: vec![1.0], depth: vec![2], trials: 30 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prototype {
    A,
    B,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesCfg {
    pub signature: bool,
    /// Keep this fraction of the coordinates, d′ = ⌊fraction·d⌋.
    pub erase_fraction: Option<f64>,
    pub prototype: Option<Prototype>,
    pub beta: BetaConvention,
    pub routes: RouteSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    Plain,
    Transparent,
    Product2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Noise {
    Isometry,
    Desynchronization,
    CrossDesynchronization,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateCfg {
    pub template: Template,
    pub noise: Noise,
    pub quantile: f64,
}

impl Default for CalibrateCfg {
    fn default() -> Self {
        CalibrateCfg { template: Template::Plain, noise: Noise::Isometry, quantile: 0.99 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Query {
    Unique,
    Path,
    Frequency,
    Summed,
    Mean,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverCfg {
    pub query: Query,
    /// Object name for unique/path, module name otherwise. Defaults to the
    /// leaf of the built-in chain.
    pub target: Option<String>,
    /// Coordinates to score; defaults to the leaf attribute span for the
    /// built-in chain and to every coordinate otherwise.
    pub coords: Option<Vec<usize>>,
    /// Leaf attributes of the built-in chain, normalized on use.
    pub attributes: Vec<f64>,
}

impl Default for RecoverCfg {
    fn default() -> Self {
        RecoverCfg { query: Query::Unique, target: None, coords: None, attributes: vec![0.6, 0.0, 0.8, 0.0, 0.0] }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimilarityCfg {
    /// Network files; both absent means two synthetic draws per trial.
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnMode {
    Planted,
    Network,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnCfg {
    pub mode: LearnMode,
    /// Number of planted matrices.
    pub matrices: usize,
    pub plant: PlantConfig,
    pub dl: DLConfig,
    pub teacher: TeacherConfig,
    /// ℓ∞ tolerance for matching a learned module to a teacher module.
    pub tolerance: f64,
}

impl Default for LearnCfg {
    fn default() -> Self {
        LearnCfg {
            mode: LearnMode::Planted,
            matrices: 2,
            plant: PlantConfig::default(),
            dl: DLConfig::default(),
            teacher: TeacherConfig { dim: 0, modules: 2, attr_nonzeros: 3, attr_span: 8, samples: 500 },
            tolerance: 0.1,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsertItem {
    pub id: String,
    pub sketch: PathBuf,
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepoCfg {
    pub log: Option<PathBuf>,
    pub insert: Vec<InsertItem>,
    pub probe: Option<PathBuf>,
    pub k: usize,
    /// Bucketed search instead of brute force.
    pub lsh: bool,
    pub hyperplanes: usize,
    pub radius: u32,
    pub clusters: usize,
    pub iterations: usize,
}

impl Default for RepoCfg {
    fn default() -> Self {
        RepoCfg {
            log: None,
            insert: Vec::new(),
            probe: None,
            k: 5,
            lsh: false,
            hyperplanes: recsketch::repository::DEFAULT_HYPERPLANES,
            radius: 2,
            clusters: 2,
            iterations: 50,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Config = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.output = cfg.resolve(&cfg.output);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| "run".to_string())
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Config(format!("{field}: {msg}")));
        if self.sweep.weight.is_empty() {
            return bad("sweep.weight", "must not be empty");
        }
        if self.sweep.depth.is_empty() {
            return bad("sweep.depth", "must not be empty");
        }
        if self.sweep.trials == 0 {
            return bad("sweep.trials", "must be positive");
        }
        if let Some(f) = self.modes.erase_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad("modes.erase_fraction", "must lie in (0, 1]");
            }
        }
        if let Some(n) = &self.network {
            if n.file.is_some() == n.synthetic.is_some() {
                return bad("network", "set exactly one of `file` or `synthetic`");
            }
        }
        if self.similarity.a.is_some() != self.similarity.b.is_some() {
            return bad("similarity", "set both `a` and `b` or neither");
        }
        Ok(())
    }

    pub fn d_values(&self) -> Vec<usize> {
        if self.sweep.d.is_empty() {
            vec![self.params.d]
        } else {
            self.sweep.d.clone()
        }
    }

    /// Block parameters at target dimension `d`.
    pub fn block_params(&self, d: usize, n_cap: usize) -> Result<BlockParams, CliError> {
        let n = self.params.n_cap.unwrap_or(n_cap).max(1);
        let p = match self.params.b {
            Some(b) => BlockParams::new(b, self.params.q, d, n),
            None => BlockParams::fitted(d, n, self.params.q),
        };
        p.map_err(|e| CliError::Validation(format!("params: {e}")))
    }
}
