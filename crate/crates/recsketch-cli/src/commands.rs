use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use recsketch::block_random::{measure_noise_profile, fit_delta_law, BlockRandomMatrix, ExprTemplate, NoiseConfig, NoiseError, NoiseMode, SeedKey};
use recsketch::dict_learning::{
    learn_dictionary, match_permutation, plant_samples, score_unroll, teacher_networks, unroll_network, write_permutation_report,
    UnrollConfig,
};
use recsketch::network_model::{generate_synthetic, save_network, ObjectNode};
use recsketch::recovery::{sketch_similarity, Recoverer, RecoveryError, RecoveryOptions, RecoveryReport};
use recsketch::repository::{cluster, LshIndex, Repository};
use recsketch::sketcher::{read_sketch, write_sketch, Sketch, Sketcher};

use crate::config::{Config, LearnMode, Noise, Query, Template};
use crate::error::{invalid, CliError};
use crate::fixtures::{chain, configured_network, d_prime, fit, registry, sketch, trial_seed, Net, LEAF};
use crate::results::{median, write_results, Row};

fn out_dir(cfg: &Config) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.output)?;
    Ok(&cfg.output)
}

fn finish(cfg: &Config, rows: &[Row]) -> Result<(), CliError> {
    write_results(&out_dir(cfg)?.join("results.csv"), &cfg.run_id(), rows)
}

pub fn calibrate(cfg: &Config) -> Result<(), CliError> {
    let template = match cfg.calibrate.template {
        Template::Plain => ExprTemplate::plain(),
        Template::Transparent => ExprTemplate::transparent(),
        Template::Product2 => ExprTemplate::product(2),
    };
    let mode = match cfg.calibrate.noise {
        Noise::Isometry => NoiseMode::Isometry,
        Noise::Desynchronization => NoiseMode::Desynchronization,
        Noise::CrossDesynchronization => NoiseMode::CrossDesynchronization,
    };
    let noise = NoiseConfig {
        trials: cfg.sweep.trials,
        quantile: cfg.calibrate.quantile,
        matrix_mode: cfg.params.matrix,
        seed: cfg.seed,
    };
    let n = cfg.params.n_cap.unwrap_or(64);
    let points = cfg
        .d_values()
        .into_par_iter()
        .map(|d| {
            let p = cfg.block_params(d, n)?;
            let prof = measure_noise_profile::<f64>(&template, mode, p, &noise).map_err(|e| match e {
                NoiseError::TooFewTrials(_) => CliError::Validation(format!("sweep.trials: {e}")),
                other => CliError::Validation(format!("calibrate: {other}")),
            })?;
            Ok((p, prof))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::new();
    for (p, prof) in &points {
        rows.push(Row::new(cfg.seed, Some(*p), "delta", prof.delta()));
        rows.push(Row::new(cfg.seed, Some(*p), "alpha", prof.alpha));
    }
    let fitted: Vec<_> = points.iter().map(|(p, prof)| (*p, prof.delta())).collect();
    if let Some(f) = fit_delta_law(&fitted) {
        rows.push(Row::new(cfg.seed, None, "fit_c", f.c));
        rows.push(Row::new(cfg.seed, None, "fit_exponent", f.exponent));
        for ((p, _), r) in points.iter().zip(&f.residuals) {
            rows.push(Row::new(cfg.seed, Some(*p), "fit_residual", *r));
        }
    }
    finish(cfg, &rows)
}

pub fn gen_network(cfg: &Config) -> Result<(), CliError> {
    let Some(profile) = cfg.network.as_ref().and_then(|n| n.synthetic.as_ref()) else {
        return Err(CliError::Config("network.synthetic: required by gen-network".into()));
    };
    let net: Net = generate_synthetic(profile, cfg.seed).map_err(invalid("network.synthetic"))?;
    save_network(&net, out_dir(cfg)?.join("network.txt"))?;
    let rows = [
        Row::new(cfg.seed, None, "objects", net.objects.iter().filter(|o| o.depth > 0).count() as f64),
        Row::new(cfg.seed, None, "max_depth", net.max_depth() as f64),
        Row::new(cfg.seed, None, "n_cap", net.n_cap as f64),
    ];
    finish(cfg, &rows)
}

pub fn sketch_cmd(cfg: &Config) -> Result<(), CliError> {
    let net = configured_network(cfg, cfg.params.d, cfg.seed)?.ok_or_else(|| CliError::Config("network: required by sketch".into()))?;
    let (net, params) = fit(cfg, net, cfg.params.d)?;
    let reg = registry(cfg, params, cfg.seed)?;
    let s = sketch(cfg, &reg, &net)?;
    write_sketch(&out_dir(cfg)?.join("sketch.rsk"), &s).map_err(|e| CliError::Validation(format!("sketch: {e}")))?;
    let rows = [Row::new(cfg.seed, Some(params), "norm", s.norm()).erased(d_prime(cfg, params.d))];
    finish(cfg, &rows)
}

struct Target<'a> {
    objects: Vec<(&'a ObjectNode<f64>, f64)>,
    depth: u32,
    weight: f64,
}

/// Objects addressed by the query, each with its total effective weight.
fn target<'a>(cfg: &Config, net: &'a Net) -> Result<Target<'a>, CliError> {
    let name = cfg.recover.target.as_deref().unwrap_or(LEAF);
    let module: recsketch::network_model::ModuleId = name.into();
    let objects: Vec<&ObjectNode<f64>> = match cfg.recover.query {
        Query::Unique | Query::Path => {
            vec![net.by_name(name).ok_or_else(|| CliError::Config(format!("recover.target: no object `{name}`")))?]
        }
        _ => net.objects.iter().filter(|o| o.producer == module && o.depth > 0).collect(),
    };
    let Some(first) = objects.first() else {
        return Err(CliError::Config(format!("recover.target: module `{name}` has no reachable objects")));
    };
    let weighted: Vec<_> = objects.iter().map(|o| (*o, net.paths_to(o.id).iter().map(|(_, w)| *w).sum::<f64>())).collect();
    let weight = net.paths_to(first.id).first().map_or(0.0, |(_, w)| *w);
    Ok(Target { objects: weighted, depth: first.depth, weight })
}

fn recover_one(cfg: &Config, net: &Net, reg: &recsketch::sketcher::MatrixRegistry<f64>, s: &Sketch<f64>, coords: &[usize]) -> Result<(RecoveryReport<f64>, Vec<f64>), CliError> {
    let t = target(cfg, net)?;
    let d = net.dim;
    let opts = RecoveryOptions {
        beta: cfg.modes.beta,
        routes: cfg.modes.routes,
        coords: Some(coords.to_vec()),
        delta: None,
    };
    let r = Recoverer::with_options(reg, opts);
    let (obj, _) = t.objects[0];
    let module = &obj.producer;
    let summed = || {
        let mut v = vec![0.0; d];
        for (o, w) in &t.objects {
            v.iter_mut().zip(&o.attributes).for_each(|(a, x)| *a += w / t.weight * x);
        }
        v
    };
    let count: f64 = t.objects.iter().map(|(_, w)| w / t.weight).sum();
    let report = match cfg.recover.query {
        Query::Unique => r.unique(s, module, t.depth, t.weight).map(|rep| (rep, obj.attributes.clone())),
        Query::Path => {
            let path = net.paths_to(obj.id).into_iter().next().map(|(p, _)| p).expect("reachable target");
            r.by_path(s, &path, t.weight).map(|rep| (rep, obj.attributes.clone()))
        }
        Query::Frequency => r.frequency(s, module, t.depth, t.weight).map(|rep| (rep, vec![count])),
        Query::Summed => r.summed(s, module, t.depth, t.weight).map(|rep| (rep, summed())),
        Query::Mean => r.mean(s, module, t.depth, t.weight).map(|rep| {
            let n = count.round().max(1.0);
            (rep, summed().into_iter().map(|v| v / n).collect())
        }),
    };
    report.map_err(|e: RecoveryError| CliError::Validation(format!("recover: {e}")))
}

/// Error-vs-parameter sweep of one recovery query.
pub fn recover(cfg: &Config) -> Result<(), CliError> {
    let mut points = Vec::new();
    for &d in &cfg.d_values() {
        if cfg.network.is_some() {
            points.push((d, None));
        } else {
            for &h in &cfg.sweep.depth {
                for &w in &cfg.sweep.weight {
                    points.push((d, Some((h, w))));
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (d, hw) in points {
        let trials = (0..cfg.sweep.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(cfg.seed, t);
                let net = match hw {
                    Some((h, w)) => chain(d, h, w, &cfg.recover.attributes)?,
                    None => configured_network(cfg, d, seed)?.expect("network configured"),
                };
                let (net, params) = fit(cfg, net, d)?;
                let reg = registry(cfg, params, seed)?;
                let s = sketch(cfg, &reg, &net)?;
                let coords: Vec<usize> = match (&cfg.recover.coords, hw, cfg.recover.query) {
                    (_, _, Query::Frequency) => vec![0],
                    (Some(c), _, _) => c.clone(),
                    (None, Some(_), _) => (0..cfg.recover.attributes.len()).collect(),
                    (None, None, _) => (0..params.d).collect(),
                };
                if let Some(&c) = coords.iter().find(|&&c| c >= params.d) {
                    return Err(CliError::Config(format!("recover.coords: {c} outside d = {}", params.d)));
                }
                let (rep, truth) = recover_one(cfg, &net, &reg, &s, &coords)?;
                let t = target(cfg, &net)?;
                let row = |metric: &str, v: f64| {
                    Row::new(seed, Some(params), metric, v).at(t.depth, t.weight).erased(d_prime(cfg, params.d))
                };
                let mut out = vec![row("linf_error", rep.linf_error(&truth))];
                if let Some((v, rounded)) = rep.scalar() {
                    out.push(row("estimate", v));
                    out.push(row("rounded_exact", (rounded as f64 == truth[0].round()) as u8 as f64));
                }
                if rep.low_confidence {
                    out.push(row("low_confidence", 1.0));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let errs: Vec<f64> = trials.iter().map(|r| r[0].value).collect();
        let mut agg = trials[0][0].clone();
        agg.seed = cfg.seed;
        agg.metric = "median_linf_error".into();
        agg.value = median(errs);
        rows.extend(trials.into_iter().flatten());
        rows.push(agg);
    }
    finish(cfg, &rows)
}

pub fn similarity(cfg: &Config) -> Result<(), CliError> {
    let files = match (&cfg.similarity.a, &cfg.similarity.b) {
        (Some(a), Some(b)) => Some((cfg.resolve(a), cfg.resolve(b))),
        _ => None,
    };
    if files.is_none() && cfg.network.as_ref().and_then(|n| n.synthetic.as_ref()).is_none() {
        return Err(CliError::Config("similarity: set `a` and `b`, or [network.synthetic]".into()));
    }
    let d = cfg.params.d;
    let mut rows = (0..cfg.sweep.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t);
            let (a, b) = match &files {
                Some((a, b)) => {
                    let load = |p: &PathBuf| {
                        if !p.exists() {
                            return Err(CliError::Config(format!("similarity: {} does not exist", p.display())));
                        }
                        recsketch::network_model::load_network::<f64>(p, Some(d)).map_err(invalid("similarity"))
                    };
                    (load(a)?, load(b)?)
                }
                None => (
                    configured_network(cfg, d, trial_seed(seed, 0))?.expect("synthetic"),
                    configured_network(cfg, d, trial_seed(seed, 1))?.expect("synthetic"),
                ),
            };
            let n = a.n_cap.max(b.n_cap);
            let params = cfg.block_params(d, n)?;
            let a = a.with_dimension(params.d).map_err(invalid("similarity.a"))?;
            let b = b.with_dimension(params.d).map_err(invalid("similarity.b"))?;
            let reg = registry(cfg, params, seed)?;
            let (sa, sb) = (sketch(cfg, &reg, &a)?, sketch(cfg, &reg, &b)?);
            let dot = sketch_similarity(&sa, &sb).map_err(invalid("similarity"))?;
            Ok(Row::new(seed, Some(params), "dot", dot).erased(d_prime(cfg, params.d)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut agg = rows[0].clone();
    agg.seed = cfg.seed;
    agg.metric = "median_dot".into();
    agg.value = median(rows.iter().map(|r| r.value).collect());
    rows.push(agg);
    finish(cfg, &rows)
}

pub fn learn(cfg: &Config) -> Result<(), CliError> {
    match cfg.learn.mode {
        LearnMode::Planted => learn_planted(cfg),
        LearnMode::Network => learn_network(cfg),
    }
}

fn learn_planted(cfg: &Config) -> Result<(), CliError> {
    let l = &cfg.learn;
    if l.matrices == 0 {
        return Err(CliError::Config("learn.matrices: must be positive".into()));
    }
    let params = cfg.block_params(cfg.params.d, l.matrices)?;
    let truth = (0..l.matrices)
        .map(|i| BlockRandomMatrix::<f64>::sample(params, SeedKey::new(cfg.seed, format!("plant/m{i}"))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid("params"))?;
    let refs: Vec<_> = truth.iter().collect();
    let samples = plant_samples(&refs, &l.plant, cfg.seed);
    let ys: Vec<Vec<f64>> = samples.iter().map(|s| s.y.clone()).collect();
    let dict = learn_dictionary(&ys, &params, &l.dl).map_err(invalid("learn"))?;
    let m = match_permutation(&dict, &refs);
    let dir = out_dir(cfg)?.join("dictionary");
    dict.write_dir(&dir)?;
    write_permutation_report(&dir, &m)?;

    let mut recovered = 0;
    let mut coef_err: f64 = 0.0;
    for (k, s) in samples.iter().enumerate() {
        let (t, j, x) = s.dominant;
        let Some(li) = m.mapping.iter().position(|v| *v == Some(t)) else { continue };
        if m.columns.iter().any(|c| c.learned_matrix == li && c.column == j && c.hamming == 0) {
            recovered += 1;
            coef_err = coef_err.max((dict.coefficient(k, li, j) - x).abs());
        }
    }
    let row = |metric: &str, v: f64| Row::new(cfg.seed, Some(params), metric, v);
    let rows = [
        row("learned_matrices", dict.n_matrices() as f64),
        row("ambiguous_matrices", m.ambiguous.len() as f64),
        row("false_columns", m.false_columns() as f64),
        row("dominant_recovered_fraction", recovered as f64 / samples.len().max(1) as f64),
        row("max_coefficient_error", coef_err),
    ];
    finish(cfg, &rows)
}

fn learn_network(cfg: &Config) -> Result<(), CliError> {
    let l = &cfg.learn;
    let mut teacher = l.teacher.clone();
    if teacher.dim == 0 {
        teacher.dim = cfg.params.d;
    }
    let nets: Vec<Net> = teacher_networks(&teacher, cfg.seed).map_err(invalid("learn.teacher"))?;
    let Some(first) = nets.first() else {
        return Err(CliError::Config("learn.teacher.samples: must be positive".into()));
    };
    let params = cfg.block_params(teacher.dim, first.n_cap)?;
    let nets = nets.into_iter().map(|n| n.with_dimension(params.d)).collect::<Result<Vec<_>, _>>().map_err(invalid("learn.teacher"))?;
    let reg = registry(cfg, params, cfg.seed)?;
    let sk = Sketcher::new(&reg);
    let sketches = nets
        .iter()
        .map(|n| sk.overall_sketch(n).map(|s| s.values))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid("sketch"))?;
    let ucfg = UnrollConfig { w: teacher.weight(), depth: 2, dl: l.dl.clone() };
    let res = unroll_network(&sketches, &params, &ucfg).map_err(invalid("learn"))?;
    let score = score_unroll(&res, &nets, l.tolerance);
    let row = |metric: String, v: f64| Row::new(cfg.seed, Some(params), metric, v).at(2, teacher.weight());
    let mut rows = Vec::new();
    for m in &score.modules {
        rows.push(row(format!("median_linf:{}", m.module), m.median_linf));
        rows.push(row(format!("recovered:{}", m.module), m.learned.is_some() as u8 as f64));
    }
    rows.push(row("learned_modules".into(), res.modules.len() as f64));
    rows.push(row("spurious_modules".into(), score.spurious as f64));
    rows.push(row("partial".into(), res.partial as u8 as f64));
    for (i, (n, k)) in res.samples_per_step.iter().zip(&res.matrices_per_step).enumerate() {
        rows.push(row(format!("step{i}_samples"), *n as f64));
        rows.push(row(format!("step{i}_matrices"), *k as f64));
    }
    finish(cfg, &rows)
}

/// Dimension comes from the log when it has entries, else from `dim_hint`.
fn open_repo(cfg: &Config, dim_hint: Option<usize>) -> Result<Repository<f64>, CliError> {
    let log = cfg.resolve(cfg.repo.log.as_ref().ok_or_else(|| CliError::Config("repo.log: required".into()))?);
    let nonempty = fs::metadata(&log).map(|m| m.len() > 0).unwrap_or(false);
    match (nonempty, dim_hint) {
        (true, _) => Repository::open_existing(&log).map_err(invalid("repo.log")),
        (false, Some(d)) => Repository::open(&log, d).map_err(invalid("repo.log")),
        (false, None) => Err(CliError::Config(format!("repo.log: {} is missing or empty", log.display()))),
    }
}

fn load_sketch(cfg: &Config, field: &str, p: &Path) -> Result<Sketch<f64>, CliError> {
    let path = cfg.resolve(p);
    if !path.exists() {
        return Err(CliError::Config(format!("{field}: {} does not exist", path.display())));
    }
    read_sketch(&path).map_err(invalid(field))
}

pub fn repo_insert(cfg: &Config) -> Result<(), CliError> {
    if cfg.repo.insert.is_empty() {
        return Err(CliError::Config("repo.insert: nothing to insert".into()));
    }
    let sketches = cfg
        .repo
        .insert
        .iter()
        .map(|item| load_sketch(cfg, "repo.insert.sketch", &item.sketch))
        .collect::<Result<Vec<_>, _>>()?;
    let repo = open_repo(cfg, Some(sketches[0].dim()))?;
    let mut rows = Vec::new();
    for (item, s) in cfg.repo.insert.iter().zip(sketches) {
        let seq = repo.insert(item.id.clone(), s, item.tags.clone()).map_err(invalid("repo.insert"))?;
        rows.push(Row::new(cfg.seed, None, format!("inserted:{}", item.id), seq as f64));
    }
    rows.push(Row::new(cfg.seed, None, "entries", repo.len() as f64));
    finish(cfg, &rows)
}

pub fn repo_query(cfg: &Config) -> Result<(), CliError> {
    let probe_path = cfg.repo.probe.as_ref().ok_or_else(|| CliError::Config("repo.probe: required".into()))?;
    let probe = load_sketch(cfg, "repo.probe", probe_path)?;
    let repo = open_repo(cfg, None)?;
    let snap = repo.snapshot();
    let mut rows = Vec::new();
    let hits = if cfg.repo.lsh {
        if !(1..=64).contains(&cfg.repo.hyperplanes) {
            return Err(CliError::Config("repo.hyperplanes: must lie in 1..=64".into()));
        }
        let idx = LshIndex::build(snap, cfg.repo.hyperplanes, cfg.seed);
        let q = idx.query(&probe, cfg.repo.k, cfg.repo.radius).map_err(invalid("repo.probe"))?;
        rows.push(Row::new(cfg.seed, None, "candidates", q.candidates as f64));
        rows.push(Row::new(cfg.seed, None, "recall", q.recall));
        q.hits
    } else {
        snap.query_similar(&probe, cfg.repo.k).map_err(invalid("repo.probe"))?
    };
    let mut w = csv::Writer::from_path(out_dir(cfg)?.join("hits.csv"))?;
    w.write_record(["rank", "id", "seq", "score"])?;
    for (i, h) in hits.iter().enumerate() {
        w.write_record([(i + 1).to_string(), h.id.clone(), h.seq.to_string(), format!("{:.12e}", h.score)])?;
    }
    w.flush()?;
    rows.push(Row::new(cfg.seed, None, "hits", hits.len() as f64));
    finish(cfg, &rows)
}

pub fn repo_cluster(cfg: &Config) -> Result<(), CliError> {
    let repo = open_repo(cfg, None)?;
    let snap = repo.snapshot();
    let entries: Vec<_> = snap.entries().iter().map(|e| &**e).collect();
    let c = cluster(&entries, cfg.repo.clusters, cfg.repo.iterations, cfg.seed).map_err(invalid("repo.clusters"))?;
    let mut w = csv::Writer::from_path(out_dir(cfg)?.join("clusters.csv"))?;
    w.write_record(["id", "cluster"])?;
    for (e, a) in entries.iter().zip(&c.assignments) {
        w.write_record([e.id.clone(), a.to_string()])?;
    }
    w.flush()?;
    let rows = [
        Row::new(cfg.seed, None, "entries", entries.len() as f64),
        Row::new(cfg.seed, None, "iterations", c.iterations as f64),
    ];
    finish(cfg, &rows)
}
