use std::collections::BTreeMap;

use proptest::prelude::*;
use recsketch::block_random::{decode_signs, encode_signs, BlockParams, MatrixMode};
use recsketch::network_model::{
    build_network, generate_synthetic, parse_network, write_network, ModularNetwork, NetworkSpec, SyntheticProfile, WeightScheme,
};
use recsketch::recovery::{Recoverer, RecoveryOptions};
use recsketch::repository::{cluster, Repository, SketchEntry};
use recsketch::sketcher::io::{decode_sketch, encode_sketch};
use recsketch::sketcher::{erase_to_prefix, MatrixRegistry, Sketch, SketchKind, Sketcher};

fn small_registry(seed: u64, mode: MatrixMode) -> MatrixRegistry<f64> {
    MatrixRegistry::new(seed, BlockParams::fitted(256, 8, 1.0).unwrap(), mode).unwrap()
}

fn overall(reg: &MatrixRegistry<f64>, values: Vec<f64>) -> Sketch<f64> {
    let mut s = Sketch::new(values, SketchKind::Overall, 1);
    s.fingerprint = reg.fingerprint();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enc_dec_roundtrip(d in 2usize..5000, jf in 0.0f64..1.0, bm in prop::bool::ANY, bs in prop::bool::ANY, flip in prop::bool::ANY, pad in 0usize..6) {
        let j = 1 + ((d - 1) as f64 * jf) as usize;
        let (bm, bs) = (if bm { 1 } else { -1 }, if bs { 1 } else { -1 });
        let t = recsketch::block_random::ceil_log2(d);
        let mut z = encode_signs(j, bm, bs, d, t + 3 + pad).unwrap();
        if flip {
            z.iter_mut().for_each(|v| *v = -*v);
        }
        prop_assert_eq!(decode_signs(&z, d).unwrap(), (j, bm));
    }

    #[test]
    fn erase_composes(vals in prop::collection::vec(-1.0f64..1.0, 1..64), a in 1usize..64, b in 1usize..64) {
        let s = Sketch::new(vals.clone(), SketchKind::Overall, 1);
        let (a, b) = (a.min(vals.len()), b.min(vals.len()));
        let ab = erase_to_prefix(&erase_to_prefix(&s, a).unwrap(), b).unwrap();
        prop_assert_eq!(ab, erase_to_prefix(&s, a.min(b)).unwrap());
    }

    #[test]
    fn sketch_file_roundtrip(vals in prop::collection::vec(-1e3f64..1e3, 1..200), depth in 1u32..9, sig in prop::bool::ANY, fp in any::<u64>(), cut in 0.0f64..1.0) {
        let mut s = Sketch::new(vals, SketchKind::Object, depth);
        s.signature = sig;
        s.fingerprint = fp;
        let s = erase_to_prefix(&s, 1 + ((s.dim() - 1) as f64 * cut) as usize).unwrap();
        prop_assert_eq!(decode_sketch::<f64>(&encode_sketch(&s)).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn recovery_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, x in prop::collection::vec(-1.0f64..1.0, 288), y in prop::collection::vec(-1.0f64..1.0, 288)) {
        let reg = small_registry(seed, MatrixMode::BlockRandom);
        let opts = RecoveryOptions { coords: Some(vec![0, 5, 17]), ..Default::default() };
        let r = Recoverer::with_options(&reg, opts);
        let m = "leaf".into();
        let est = |v: Vec<f64>| r.unique(&overall(&reg, v), &m, 2, 0.5).unwrap().vector().unwrap().to_vec();
        let combined: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let (ex, ey, ec) = (est(x), est(y), est(combined));
        for k in 0..3 {
            prop_assert!((ec[k] - (a * ex[k] + ey[k])).abs() < 1e-9 * (1.0 + ec[k].abs()));
        }
    }

    #[test]
    fn identity_tuples_are_weighted_sums(
        vals in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 288), 1..4),
        raw in prop::collection::vec(0.0f64..1.0, 4),
        level in 1u32..6,
    ) {
        let reg = small_registry(1, MatrixMode::Identity);
        let sk = Sketcher::new(&reg);
        let total: f64 = raw.iter().take(vals.len()).sum::<f64>().max(1.0);
        let w: Vec<f64> = raw.iter().take(vals.len()).map(|v| v / total).collect();
        let ss: Vec<Sketch<f64>> = vals.iter().map(|v| Sketch::new(v.clone(), SketchKind::Object, 2)).collect();
        let refs: Vec<&Sketch<f64>> = ss.iter().collect();
        let t = sk.tuple_sketch(&refs, &w, level).unwrap();
        for i in 0..288 {
            let want: f64 = vals.iter().zip(&w).map(|(v, wi)| wi * v[i]).sum();
            prop_assert!((t.values[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_effective_weights(ws in prop::collection::vec(0.01f64..1.0, 1..6)) {
        let mut spec = NetworkSpec::new(4).output_module("out").object("root", "out", vec![]);
        let mut parent = "root".to_string();
        for (k, w) in ws.iter().enumerate() {
            let name = format!("o{k}");
            spec = spec.module(&format!("m{k}")).object(&name, &format!("m{k}"), vec![(k % 4, 1.0)]).edge(&parent, &name, *w);
            parent = name;
        }
        let net: ModularNetwork<f64> = build_network(&spec).unwrap();
        let leaf = net.by_name(&parent).unwrap();
        let paths = net.paths_to(leaf.id);
        prop_assert_eq!(paths.len(), 1);
        let product: f64 = ws.iter().product();
        prop_assert!((paths[0].1 - product).abs() < 1e-15);
        let ids = net.resolve_path(&paths[0].0).unwrap();
        prop_assert!((net.effective_weight(&ids).unwrap() - product).abs() < 1e-15);
        prop_assert_eq!(leaf.depth as usize, ws.len() + 1);
    }

    #[test]
    fn synthetic_networks_are_valid_and_roundtrip(
        seed in any::<u64>(),
        depth in 2u32..4,
        fan_in in 1usize..4,
        extra in 0usize..3,
        nz in 1usize..4,
        dirichlet in prop::bool::ANY,
    ) {
        let profile = SyntheticProfile {
            n_modules: (depth as usize - 1) + extra,
            depth,
            fan_in,
            weights: if dirichlet { WeightScheme::Dirichlet } else { WeightScheme::Uniform },
            attr_nonzeros: nz,
            attr_span: 6,
            dim: 16,
            n_multiplier: 3,
        };
        let net: ModularNetwork<f64> = generate_synthetic(&profile, seed).unwrap();
        prop_assert_eq!(net.max_depth(), depth);
        for o in &net.objects {
            let sum: f64 = o.inputs.iter().map(|(_, w)| w).sum();
            prop_assert!(sum <= 1.0 + 1e-9);
            let norm: f64 = o.attributes.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
            prop_assert!(o.attributes.iter().all(|v| *v >= 0.0));
        }
        let back: ModularNetwork<f64> = parse_network(&write_network(&net), None).unwrap();
        prop_assert_eq!(back.objects.len(), net.objects.len());
        for (a, b) in back.objects.iter().zip(&net.objects) {
            prop_assert_eq!(&a.name, &b.name);
            prop_assert_eq!(a.depth, b.depth);
            for (x, y) in a.attributes.iter().zip(&b.attributes) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            for ((c1, w1), (c2, w2)) in a.inputs.iter().zip(&b.inputs) {
                prop_assert_eq!(c1, c2);
                prop_assert!((w1 - w2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_is_exact_top_k(vals in prop::collection::vec(prop::collection::vec(-2i32..3, 3), 0..25), probe in prop::collection::vec(-2i32..3, 3), k in 0usize..30) {
        let repo = Repository::<f64>::in_memory(3);
        for (i, v) in vals.iter().enumerate() {
            let s = Sketch::new(v.iter().map(|x| *x as f64).collect(), SketchKind::Overall, 1);
            repo.insert(format!("e{i}"), s, BTreeMap::new()).unwrap();
        }
        let p = Sketch::new(probe.iter().map(|x| *x as f64).collect(), SketchKind::Overall, 1);
        let hits = repo.query_similar(&p, k).unwrap();
        let mut want: Vec<(i32, usize)> = vals.iter().enumerate().map(|(i, v)| (v.iter().zip(&probe).map(|(a, b)| a * b).sum(), i)).collect();
        want.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        want.truncate(k);
        let got: Vec<(i32, usize)> = hits.iter().map(|h| (h.score as i32, h.seq as usize)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn clustering_ignores_entry_order(vals in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 3..20), k in 1usize..3, seed in any::<u64>(), rot in 0usize..20) {
        let es: Vec<SketchEntry<f64>> = vals
            .iter()
            .enumerate()
            .map(|(i, v)| SketchEntry { id: format!("e{i:02}"), sketch: Sketch::new(v.clone(), SketchKind::Overall, 1), tags: BTreeMap::new(), seq: i as u64 })
            .collect();
        let a: Vec<&SketchEntry<f64>> = es.iter().collect();
        let mut b = a.clone();
        b.rotate_left(rot % es.len());
        b.reverse();
        let ca = cluster(&a, k, 25, seed).unwrap();
        let cb = cluster(&b, k, 25, seed).unwrap();
        let by_id = |es: &[&SketchEntry<f64>], asg: &[usize]| es.iter().zip(asg).map(|(e, c)| (e.id.clone(), *c)).collect::<BTreeMap<_, _>>();
        prop_assert_eq!(by_id(&a, &ca.assignments), by_id(&b, &cb.assignments));
        prop_assert_eq!(ca.centroids, cb.centroids);
    }
}
