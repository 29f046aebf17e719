//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! `cargo test -p recsketch --test acceptance -- 3 5` runs only criteria 3
//! and 5. The process exits 0 unless `ACCEPTANCE_STRICT=1` is set, so the
//! rest of the workspace suite still runs when a criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use recsketch::block_random::{
    ceil_log2, decode_signs, encode_signs, fit_delta_law, measure_noise_profile, BlockParams, BlockRandomMatrix, ExprTemplate,
    MatrixMode, NoiseConfig, NoiseMode, SeedKey,
};
use recsketch::dict_learning::{
    learn_dictionary, match_permutation, plant_samples, score_unroll, teacher_networks, unroll_network, DLConfig, LearnedDictionary,
    PlantConfig, PlantedSample, TeacherConfig, UnrollConfig,
};
use recsketch::network_model::{build_network, ModularNetwork, NetworkSpec, ObjectPath, PathStep};
use recsketch::recovery::{sketch_similarity, Recoverer, RecoveryOptions};
use recsketch::rng::stream;
use recsketch::sketcher::{erase_to_prefix, MatrixRegistry, Sketch, Sketcher, SLOT_ATTR, SLOT_COUNT};

type Net = ModularNetwork<f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Nonnegative unit vector on `k` random coordinates of [0, span).
fn random_attrs(rng: &mut impl Rng, span: usize, k: usize) -> Vec<(usize, f64)> {
    let raw: Vec<(usize, f64)> = sample(rng, span, k).into_iter().map(|i| (i, rng.random_range(0.1..1.0))).collect();
    let n = raw.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    raw.into_iter().map(|(i, v)| (i, v / n)).collect()
}

/// (name, module, weight, attributes)
type Child<'a> = (&'a str, &'a str, f64, Vec<(usize, f64)>);

/// Output with the given children.
fn flat(d: usize, children: &[Child<'_>]) -> Net {
    let mut spec = NetworkSpec::new(d).output_module("out").object("root", "out", vec![]);
    for (name, module, w, attrs) in children {
        if !spec.modules.iter().any(|m| m.name == *module) {
            spec = spec.module(module);
        }
        spec = spec.object(name, module, attrs.clone()).edge("root", name, *w);
    }
    build_network(&spec).expect("valid fixture")
}

/// Registry fitted to the network's N at target dimension `d`, and the
/// network padded to the rounded dimension.
fn fitted(net: Net, d: usize, seed: u64, mode: MatrixMode) -> (Net, MatrixRegistry<f64>) {
    let p = BlockParams::fitted(d, net.n_cap, 1.0).unwrap();
    let reg = MatrixRegistry::new(seed, p, mode).unwrap();
    (net.with_dimension(p.d).unwrap(), reg)
}

fn overall(reg: &MatrixRegistry<f64>, net: &Net) -> Sketch<f64> {
    Sketcher::new(reg).overall_sketch(net).unwrap()
}

fn dense(net: &Net, name: &str) -> Vec<f64> {
    net.by_name(name).unwrap().attributes.clone()
}

// 1
fn enc_dec() -> Outcome {
    let mut checked = 0usize;
    for d in [8usize, 64, 1024] {
        let len = ceil_log2(d) + 3;
        for j in 1..=d {
            for bm in [1i8, -1] {
                for bs in [1i8, -1] {
                    let z = encode_signs(j, bm, bs, d, len).unwrap();
                    let neg: Vec<i8> = z.iter().map(|v| -v).collect();
                    if decode_signs(&z, d).unwrap() != (j, bm) || decode_signs(&neg, d).unwrap() != (j, bm) {
                        return outcome(false, format!("mismatch at d={d}, j={j}, b_m={bm}, b_s={bs}"));
                    }
                    checked += 2;
                }
            }
        }
    }
    outcome(true, format!("{checked} codewords decoded exactly"))
}

// 2
fn calibration() -> Outcome {
    let dims = [512usize, 1024, 2048, 4096, 8192];
    let cfg = NoiseConfig { trials: 200, ..Default::default() };
    let mut iso = Vec::new();
    let mut alphas = Vec::new();
    for &d in &dims {
        let p = BlockParams::isometric(d, 64).unwrap();
        let prof = measure_noise_profile::<f64>(&ExprTemplate::plain(), NoiseMode::Isometry, p, &cfg).unwrap();
        iso.push((p, prof.delta_iso));
        let t = measure_noise_profile::<f64>(&ExprTemplate::transparent(), NoiseMode::Isometry, p, &cfg).unwrap();
        alphas.push(t.alpha_iso);
    }
    let fit = fit_delta_law(&iso).unwrap();
    let alpha_ok = alphas.iter().all(|a| (0.45..=0.55).contains(a));
    let exp_ok = (-0.6..=-0.4).contains(&fit.exponent);
    outcome(
        exp_ok && alpha_ok,
        format!(
            "δ exponent {:.3} (c = {:.3}); transparent α_I ∈ [{:.4}, {:.4}]",
            fit.exponent,
            fit.c,
            alphas.iter().cloned().fold(f64::INFINITY, f64::min),
            alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        ),
    )
}

const CANON: [f64; 5] = [0.6, 0.0, 0.8, 0.0, 0.0];

fn leaf_net(d: usize) -> Net {
    let attrs = CANON.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
    flat(d, &[("leaf", "leaf", 1.0, attrs)])
}

/// ℓ∞ error of unique recovery over the canonical attribute coordinates.
fn leaf_errors(d: usize, seeds: u64, d_prime_frac: Option<f64>) -> Vec<f64> {
    (0..seeds)
        .map(|seed| {
            let (net, reg) = fitted(leaf_net(d), d, seed, MatrixMode::BlockRandom);
            let mut s = overall(&reg, &net);
            if let Some(f) = d_prime_frac {
                s = erase_to_prefix(&s, (f * s.dim() as f64) as usize).unwrap();
            }
            let opts = RecoveryOptions { coords: Some((0..CANON.len()).collect()), ..Default::default() };
            let r = Recoverer::with_options(&reg, opts).unique(&s, &"leaf".into(), 2, 1.0).unwrap();
            r.linf_error(&dense(&net, "leaf"))
        })
        .collect()
}

// 3
fn attribute_recovery() -> Outcome {
    let full = median(leaf_errors(2048, 100, None));
    let quarter = median(leaf_errors(512, 100, None));
    let ratio = quarter / full;
    outcome(
        full <= 0.1 && ratio <= 2.0 * 1.5,
        format!("median ℓ∞ {full:.4} at d≈2048 (≤ 0.1); d/4 median {quarter:.4}, ratio {ratio:.2} (≤ 3.0)"),
    )
}

// 4
fn path_recovery() -> Outcome {
    let d = 4096;
    let support_a = [(0usize, 0.6), (1, 0.8)];
    let support_b = [(2usize, 0.8), (3, 0.6)];
    let mut wrong = Vec::new();
    let mut right = Vec::new();
    let mut params = None;
    for seed in 0..100u64 {
        let net = flat(d, &[("a", "cat", 0.5, support_a.to_vec()), ("b", "cat", 0.5, support_b.to_vec())]);
        let (net, reg) = fitted(net, d, seed, MatrixMode::BlockRandom);
        params = Some(*reg.params());
        let s = overall(&reg, &net);
        let opts = RecoveryOptions { coords: Some(vec![0, 1, 2, 3]), ..Default::default() };
        let r = Recoverer::with_options(&reg, opts);
        for (pos, own, other) in [(1usize, "a", &support_b[..]), (2, "b", &support_a[..])] {
            let path = ObjectPath { steps: vec![PathStep { position: pos, module: "cat".into() }] };
            let rep = r.by_path(&s, &path, 0.5).unwrap();
            let est = rep.dense();
            wrong.push(other.iter().map(|(i, _)| est[*i].abs()).fold(0.0, f64::max));
            let truth = dense(&net, own);
            right.push([0, 1, 2, 3].iter().filter(|i| truth[**i] != 0.0).map(|&i| (est[i] - truth[i]).abs()).fold(0.0, f64::max));
        }
    }
    let p = params.unwrap();
    let cfg = NoiseConfig { trials: 200, seed: 4, ..Default::default() };
    let delta = measure_noise_profile::<f64>(&ExprTemplate::plain(), NoiseMode::Isometry, p, &cfg).unwrap().delta_iso;
    let w = median(wrong);
    outcome(
        w <= 3.0 * delta,
        format!("median wrong-path signal {w:.4} vs 3δ = {:.4} (δ = {delta:.4}, d = {}); own-support median error {:.4}", 3.0 * delta, p.d, median(right)),
    )
}

/// Five slots of weight 1/5: `count` of module cat, the rest of module dog.
fn count_net(d: usize, count: usize, rng: &mut impl Rng) -> Net {
    let names: Vec<String> = (0..5).map(|k| format!("o{k}")).collect();
    let kids: Vec<Child<'_>> =
        names.iter().enumerate().map(|(k, n)| (n.as_str(), if k < count { "cat" } else { "dog" }, 0.2, random_attrs(rng, 8, 3))).collect();
    flat(d, &kids)
}

/// (all exact, worst |f̂ − count|) over counts {0,1,2,3,5} × `seeds`.
fn frequency_run(d: usize, seeds: u64, d_prime_frac: Option<f64>) -> (bool, f64, usize) {
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for count in [0usize, 1, 2, 3, 5] {
        for seed in 0..seeds {
            let mut rng = stream(seed, "freq", &[count as u64]);
            let (net, reg) = fitted(count_net(d, count, &mut rng), d, seed, MatrixMode::BlockRandom);
            let mut s = overall(&reg, &net);
            if let Some(f) = d_prime_frac {
                s = erase_to_prefix(&s, (f * s.dim() as f64) as usize).unwrap();
            }
            let rep = Recoverer::new(&reg).frequency(&s, &"cat".into(), 2, 0.2).unwrap();
            let (v, rounded) = rep.scalar().unwrap();
            worst = worst.max((v - count as f64).abs());
            misses += (rounded != count as i64) as usize;
        }
    }
    (misses == 0, worst, misses)
}

// 5
fn frequency() -> Outcome {
    let (ok, worst, misses) = frequency_run(8192, 50, None);
    outcome(ok, format!("{misses} rounding misses over 250 sketches; worst |f̂ − f| = {worst:.4}"))
}

// 6
fn similarity() -> Outcome {
    let d = 2048;
    let mut disjoint = Vec::new();
    let mut shared = Vec::new();
    for seed in 0..100u64 {
        let mut rng = stream(seed, "sim", &[]);
        let x = random_attrs(&mut rng, 8, 3);
        let a = flat(d, &[("p", "a1", 0.9, x.clone()), ("q", "a2", 0.1, random_attrs(&mut rng, 8, 3))]);
        let a2 = flat(d, &[("p", "a1", 0.9, x), ("q", "a3", 0.1, random_attrs(&mut rng, 8, 3))]);
        let b = flat(d, &[("p", "b1", 0.9, random_attrs(&mut rng, 8, 3)), ("q", "b2", 0.1, random_attrs(&mut rng, 8, 3))]);
        let (a, reg) = fitted(a, d, seed, MatrixMode::BlockRandom);
        let a2 = a2.with_dimension(reg.dim()).unwrap();
        let b = b.with_dimension(reg.dim()).unwrap();
        let (sa, sa2, sb) = (overall(&reg, &a), overall(&reg, &a2), overall(&reg, &b));
        disjoint.push(sketch_similarity(&sa, &sb).unwrap());
        shared.push(sketch_similarity(&sa, &sa2).unwrap());
    }
    let small = disjoint.iter().filter(|v| v.abs() <= 0.1).count();
    let p99 = quantile(disjoint.iter().map(|v| v.abs()).collect(), 0.99);
    let above = shared.iter().filter(|v| **v > p99).count();
    outcome(
        small >= 95 && above >= 90,
        format!("disjoint |dot| ≤ 0.1 in {small}/100; shared > disjoint p99 ({p99:.2e}) in {above}/100 (median shared {:.2e})", median(shared.clone())),
    )
}

// 7
fn contraction() -> Outcome {
    let d = 1024;
    let mut results = Vec::new();
    for eps in [0.1f64, 0.5] {
        let theta = 2.0 * (eps / 2.0).asin();
        let mut worst: f64 = 0.0;
        let mut ok = 0;
        for seed in 0..100u64 {
            let mut rng = stream(seed, "contract", &[]);
            let build = |perturb: bool, rng: &mut rand_chacha::ChaCha8Rng| {
                let mut spec = NetworkSpec::new(d).output_module("out").object("root", "out", vec![]);
                for m in ["a", "b", "c", "e"] {
                    spec = spec.module(m);
                }
                let attrs = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let phi: f64 = rng.random_range(0.1..1.4);
                    let (x0, x1) = (phi.cos(), phi.sin());
                    if perturb {
                        // Rotate towards the orthogonal support {2, 3}: ‖x − x̄‖ = ε.
                        vec![(0, x0 * theta.cos()), (1, x1 * theta.cos()), (2, x0 * theta.sin()), (3, x1 * theta.sin())]
                    } else {
                        vec![(0, x0), (1, x1)]
                    }
                };
                for (k, m) in ["a", "b"].iter().enumerate() {
                    let name = format!("p{k}");
                    spec = spec.object(&name, m, attrs(rng)).edge("root", &name, 0.5);
                    for (l, c) in ["c", "e"].iter().enumerate() {
                        let child = format!("c{k}{l}");
                        spec = spec.object(&child, c, attrs(rng)).edge(&name, &child, 0.5);
                    }
                }
                build_network(&spec).unwrap()
            };
            let mut rng2 = rng.clone();
            let base = build(false, &mut rng);
            let pert = build(true, &mut rng2);
            let (base, reg) = fitted(base, d, seed, MatrixMode::BlockRandom);
            let pert = pert.with_dimension(reg.dim()).unwrap();
            let (s, sb) = (overall(&reg, &base), overall(&reg, &pert));
            let dist = s.values.iter().zip(&sb.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(dist);
            ok += (dist <= eps / 2.0) as usize;
        }
        results.push((eps, ok, worst));
    }
    let pass = results.iter().all(|(_, ok, _)| *ok == 100);
    let detail = results.iter().map(|(e, ok, w)| format!("ε={e}: {ok}/100, max ‖s−s̄‖ {w:.4}")).collect::<Vec<_>>().join("; ");
    outcome(pass, detail)
}

// 8
fn erasure() -> Outcome {
    let full = median(leaf_errors(2048, 100, None));
    let half = median(leaf_errors(2048, 100, Some(0.5)));
    let ratio = half / full;
    let (ok, worst, misses) = frequency_run(8192, 50, Some(0.5));
    outcome(
        ratio <= 1.8 && ok,
        format!("median ℓ∞ {full:.4} → {half:.4} at d′ = d/2 (×{ratio:.2}, ≤ 1.8); frequency misses {misses}, worst |f̂ − f| {worst:.4}"),
    )
}

struct PlantRun {
    samples: Vec<PlantedSample<f64>>,
    truth: Vec<BlockRandomMatrix<f64>>,
}

fn plant(p: BlockParams, seed: u64) -> PlantRun {
    let truth: Vec<_> = (0..2).map(|i| BlockRandomMatrix::sample(p, SeedKey::new(seed, format!("m{i}"))).unwrap()).collect();
    let refs: Vec<_> = truth.iter().collect();
    let cfg = PlantConfig { samples: 200, dominant: 0.9, residual_mass: 0.05, residual_terms: 10 };
    PlantRun { samples: plant_samples(&refs, &cfg, seed), truth }
}

/// (false columns, dominant columns missed, worst dominant coefficient error).
fn score_plant(run: &PlantRun, dict: &LearnedDictionary<f64>) -> (usize, usize, f64) {
    let refs: Vec<_> = run.truth.iter().collect();
    let m = match_permutation(dict, &refs);
    let mut missed = 0;
    let mut worst: f64 = 0.0;
    for (k, s) in run.samples.iter().enumerate() {
        let (t, j, x) = s.dominant;
        let li = m.mapping.iter().position(|v| *v == Some(t));
        match li.filter(|&li| m.columns.iter().any(|c| c.learned_matrix == li && c.column == j && c.close && c.mismatched == 0 && c.extra_blocks == 0)) {
            Some(li) => worst = worst.max((dict.coefficient(k, li, j) - x).abs()),
            None => missed += 1,
        }
    }
    (m.false_columns() + m.ambiguous.len(), missed, worst)
}

type TruthView = (BTreeSet<(usize, usize)>, Vec<BTreeMap<(usize, usize), f64>>);

/// Learned columns and coefficients relabelled by the planted matrices.
fn truth_view(run: &PlantRun, dict: &LearnedDictionary<f64>) -> TruthView {
    let refs: Vec<_> = run.truth.iter().collect();
    let m = match_permutation(dict, &refs);
    let label = |li: usize| m.mapping[li];
    let cols = dict.columns.keys().filter_map(|&(li, j)| label(li).map(|t| (t, j))).collect();
    let coefs = dict
        .coefficients
        .iter()
        .map(|c| c.iter().filter_map(|(&(li, j), &v)| label(li).map(|t| ((t, j), v))).collect())
        .collect();
    (cols, coefs)
}

// 9
fn dictionary_learning() -> Outcome {
    let rejected = BlockParams::new(18, 1.0, 1440, 2).is_err();
    let p = BlockParams::new(48, 1.0, 1440, 2).unwrap();
    let cfg = DLConfig::default();
    let eps2 = cfg.eps(2);
    let spike_mass = (p.d as f64).sqrt();
    let (mut false_cols, mut missed, mut worst) = (0, 0, 0.0f64);
    let (mut spike_changes, mut spike_worst, mut spike_shift, mut dropped) = (0, 0.0f64, 0.0f64, 0usize);
    for seed in 0..20u64 {
        let run = plant(p, seed);
        let ys: Vec<Vec<f64>> = run.samples.iter().map(|s| s.y.clone()).collect();
        let dict = learn_dictionary(&ys, &p, &cfg).unwrap();
        let (f, m, w) = score_plant(&run, &dict);
        false_cols += f;
        missed += m;
        worst = worst.max(w);

        // One block per sample takes ℓ1 mass √d.
        let mut rng = stream(seed, "spike", &[]);
        let spiked: Vec<Vec<f64>> = ys
            .iter()
            .map(|y| {
                let mut y = y.clone();
                let blk = rng.random_range(0..p.blocks());
                for v in &mut y[blk * p.b..(blk + 1) * p.b] {
                    *v += spike_mass / p.b as f64 * if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
                y
            })
            .collect();
        let sd = learn_dictionary(&spiked, &p, &cfg).unwrap();
        let (sf, sm, sw) = score_plant(&run, &sd);
        let (cols, coefs) = truth_view(&run, &dict);
        let (scols, scoefs) = truth_view(&run, &sd);
        let coef_shift = coefs
            .iter()
            .zip(&scoefs)
            .flat_map(|(a, b)| a.keys().chain(b.keys()).map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs()))
            .fold(0.0, f64::max);
        dropped += dict.columns.iter().map(|(k, c)| c.blocks.len().saturating_sub(sd.columns.get(k).map_or(0, |c2| c2.blocks.len()))).sum::<usize>();
        if !(cols == scols && coef_shift <= eps2 && sf == 0 && sm == 0 && sw <= eps2) {
            spike_changes += 1;
        }
        spike_shift = spike_shift.max(coef_shift);
        spike_worst = spike_worst.max(sw);
    }
    let pass = rejected && false_cols == 0 && missed == 0 && worst <= eps2 && spike_changes == 0;
    outcome(
        pass,
        format!(
            "b=18 rejected: {rejected}; run at b=48: false/ambiguous columns {false_cols}, dominant misses {missed}, worst coefficient error {worst:.4} (ε₂ = {eps2}); spike changed {spike_changes}/20 runs (max coefficient shift {spike_shift:.4}, spiked worst error {spike_worst:.4}, signature blocks dropped {dropped})"
        ),
    )
}

// 10
fn network_learning() -> Outcome {
    let teacher = TeacherConfig { dim: 4096, modules: 2, attr_nonzeros: 3, attr_span: 8, samples: 500 };
    let nets: Vec<Net> = teacher_networks(&teacher, 10).unwrap();
    let p = BlockParams::fitted(teacher.dim, nets[0].n_cap, 1.0).unwrap();
    let nets: Vec<Net> = nets.into_iter().map(|n| n.with_dimension(p.d).unwrap()).collect();
    let reg = MatrixRegistry::new(10, p, MatrixMode::BlockRandom).unwrap();
    let sk = Sketcher::new(&reg);
    let sketches: Vec<Vec<f64>> = nets.iter().map(|n| sk.overall_sketch(n).unwrap().values).collect();
    let res = unroll_network(&sketches, &p, &UnrollConfig { w: teacher.weight(), depth: 2, dl: DLConfig::default() }).unwrap();
    let score = score_unroll(&res, &nets, 0.1);
    let recovered = score.modules.iter().filter(|m| m.learned.is_some()).count();
    let errs = score.modules.iter().map(|m| format!("{}: {:.3}", m.module, m.median_linf)).collect::<Vec<_>>().join(", ");
    outcome(
        recovered == teacher.modules && score.spurious == 0,
        format!(
            "{recovered}/{} modules within ℓ∞ 0.1 ({errs}); spurious {}; learned matrices per step {:?}, live vectors {:?}",
            teacher.modules, score.spurious, res.matrices_per_step, res.samples_per_step
        ),
    )
}

// 11
fn prototypes() -> Outcome {
    // A: orthonormal matrices invert exactly.
    let mut worst_a: f64 = 0.0;
    for seed in 0..5u64 {
        let mut rng = stream(seed, "proto-a", &[]);
        let net = flat(64, &[("x", "m", 1.0, random_attrs(&mut rng, 8, 3))]);
        let (net, reg) = fitted(net, 64, seed, MatrixMode::Orthonormal);
        let s = Sketcher::new(&reg).prototype_a_overall(&net).unwrap();
        let est = reg.module(&"m".into(), SLOT_ATTR).mul_t(&s.values);
        let truth = dense(&net, "x");
        worst_a = worst_a.max(est.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    // B: prototype-B counts against the final sketch's counts.
    let d = 2048;
    let counts = [("a", 2usize), ("b", 1), ("c", 0)];
    let w = 0.25;
    let mut diffs = vec![Vec::new(); counts.len()];
    let mut agree = 0;
    let seeds = 40u64;
    for seed in 0..seeds {
        let mut rng = stream(seed, "proto-b", &[]);
        let mut kids = Vec::new();
        for (m, c) in counts {
            for k in 0..c {
                kids.push((format!("{m}{k}"), m, w, random_attrs(&mut rng, 8, 3)));
            }
        }
        let mut spec = NetworkSpec::new(d).output_module("out").object("root", "out", vec![]);
        for (m, _) in counts {
            spec = spec.module(m);
        }
        for (n, m, w, a) in &kids {
            spec = spec.object(n, m, a.clone()).edge("root", n, *w);
        }
        let (net, reg) = fitted(build_network(&spec).unwrap(), d, seed, MatrixMode::BlockRandom);
        let final_s = overall(&reg, &net);
        let proto_s = Sketcher::new(&reg).prototype_b_overall(&net).unwrap();
        let r = Recoverer::new(&reg);
        let mut all = true;
        for (i, (m, _)) in counts.iter().enumerate() {
            let f_final = r.frequency(&final_s, &(*m).into(), 2, w).unwrap().scalar().unwrap().0;
            // Identity branch of the level-1 tuple, then the count matrix: gain w/4.
            let f_proto = 4.0 / w * reg.module(&(*m).into(), SLOT_COUNT).mul_t_at(&proto_s.values, &[0])[0];
            diffs[i].push(f_proto - f_final);
            all &= f_proto.round() == f_final.round();
        }
        agree += all as usize;
    }
    let mut b_ok = true;
    let mut parts = Vec::new();
    for (i, (m, _)) in counts.iter().enumerate() {
        let n = diffs[i].len() as f64;
        let mean = diffs[i].iter().sum::<f64>() / n;
        let sd = (diffs[i].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let se = sd / n.sqrt();
        b_ok &= mean.abs() <= 3.0 * se;
        parts.push(format!("{m}: mean diff {mean:+.4} (3·SE {:.4})", 3.0 * se));
    }
    outcome(
        worst_a <= 1e-9 && b_ok,
        format!("A: max error {worst_a:.2e} (≤ 1e-9); B vs final: {}; rounded counts agree in {agree}/{seeds} seeds", parts.join(", ")),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome, u64);

fn main() {
    // (number, name, check, time budget in seconds)
    let criteria: [Criterion; 11] = [
        (1, "Enc/Dec exhaustive roundtrip", enc_dec, 5),
        (2, "isometry/desync calibration", calibration, 120),
        (3, "attribute recovery", attribute_recovery, 60),
        (4, "path-disambiguated recovery", path_recovery, 120),
        (5, "frequency recovery", frequency, 120),
        (6, "similarity separation", similarity, 60),
        (7, "attribute-perturbation contraction", contraction, 30),
        (8, "graceful erasure", erasure, 120),
        (9, "dictionary learning plant-and-recover", dictionary_learning, 180),
        (10, "network learnability", network_learning, 300),
        (11, "prototype oracle agreement", prototypes, 30),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (n, name, run, budget) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = o.pass && in_time;
        if !pass {
            failed.push(n);
        }
        println!(
            "[{}] criterion {n:>2} {name}: {} ({:.1}s of {budget}s{})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {}/{ran} criteria passed{}", ran - failed.len(), if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") });
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
