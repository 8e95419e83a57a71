//! Property checks across module boundaries.

use mgids::attack::{apply_attack, AttackMode, AttackSpec, DosLatch};
use mgids::dataset::{
    denormalize, downsample, fit_norm_stats, normalize, stratified_indices, SampleTable, SplitSpec,
};
use mgids::distill::{kd_targets, soften, KDConfig};
use mgids::eval::compute_metrics;
use mgids::gbdt::{
    argmax_class, one_hot, train, FeatureMatrix, GbdtParams, Node, Objective, TrainData,
};
use mgids::sim::{run_scenario, sharing, simulate, steady_state, SimConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn short_sim() -> SimConfig {
    SimConfig {
        t_end: 0.2,
        ..SimConfig::default()
    }
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Noisy blobs: class `c` is centred at `c` along every feature.
fn blobs(n: usize, d: usize, k: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let c = i % k;
            let row = (0..d)
                .map(|_| c as f64 + rng.gen_range(-0.8..0.8))
                .collect();
            (row, c)
        })
        .unzip()
}

fn fit(params: &GbdtParams, x: &[Vec<f64>], y: &[usize]) -> mgids::gbdt::TrainOutput {
    let fm = FeatureMatrix::from_rows(x);
    let t = one_hot(y, params.n_outputs().max(2)).unwrap();
    let targets: Vec<f64> = if params.objective == Objective::Binary {
        y.iter().map(|&c| c as f64).collect()
    } else {
        t
    };
    let names = (0..fm.n_features()).map(|f| format!("x{f}")).collect();
    train(
        params,
        names,
        TrainData {
            x: &fm,
            targets: &targets,
        },
        None,
    )
    .unwrap()
}

#[test]
fn consensus_signals_agree_without_attack() {
    let run = simulate(&SimConfig::default(), &AttackSpec::normal()).unwrap();
    let tail = &run.xi_spread[run.xi_spread.len() - 100..];
    assert!(tail.iter().all(|&s| s < 1e-4), "{tail:?}");
}

#[test]
fn simulation_is_byte_deterministic() {
    let cfg = short_sim();
    let spec = AttackSpec::new(AttackMode::Sinusoid, 0.1);
    let bytes = |t: SampleTable| {
        let mut out = Vec::new();
        t.write_csv_to(&mut out).unwrap();
        out
    };
    let a = bytes(run_scenario(&cfg, &spec).unwrap());
    let b = bytes(run_scenario(&cfg, &spec).unwrap());
    assert_eq!(a, b);
}

#[test]
fn frequency_column_tracks_omega() {
    let mut cfg = short_sim();
    cfg.noise = mgids::sim::NoiseConfig::silent();
    let run = simulate(&cfg, &AttackSpec::normal()).unwrap();
    let t = &run.table;
    let last = t.row(t.n_rows() - 1);
    let f1 = t.require_column("f_DG1").unwrap();
    // the last row is logged before the final plant step, so allow one step of drift
    let want = run.final_states[0].omega / std::f64::consts::TAU;
    assert!((last[f1] - want).abs() < 1e-6, "{} vs {want}", last[f1]);
}

#[test]
fn downsampling_keeps_every_attack_row() {
    let cfg = short_sim();
    let tables: Vec<SampleTable> = [AttackSpec::normal(), AttackSpec::new(AttackMode::Ramp, 0.1)]
        .iter()
        .map(|s| run_scenario(&cfg, s).unwrap())
        .collect();
    let merged = mgids::dataset::merge(&tables).unwrap();
    let attacks = |t: &SampleTable| t.labels_bin().unwrap().iter().filter(|&&y| y == 1).count();
    for seed in 0..5 {
        let ds = downsample(&merged, 0.1, 5e-3, seed).unwrap();
        assert_eq!(attacks(&ds), attacks(&merged));
        assert!(ds.n_rows() < merged.n_rows());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_balance_holds(offsets in prop::collection::vec(-0.02f64..0.02, 10), t in 0.0f64..1.0) {
        let cfg = SimConfig::default();
        let mut states = steady_state(&cfg, 0.0).unwrap();
        for (s, o) in states.iter_mut().zip(&offsets) {
            s.xi = *o;
            s.zeta = *o * 0.1;
        }
        let sh = sharing(&states, &cfg, t).unwrap();
        let total: f64 = sh.p_ss.iter().sum();
        let load = cfg.plant.p_load.at(t);
        prop_assert!((total - load).abs() <= 1e-9 * load.abs());
    }

    #[test]
    fn attacks_are_identity_before_onset(
        mode_ix in 0usize..7,
        onset in 0.1f64..0.9,
        frac in 0.0f64..1.0,
        xi in -1.0f64..1.0,
        zeta in -1.0f64..1.0,
    ) {
        let spec = AttackSpec::new(AttackMode::ALL[mode_ix], onset);
        let t = onset * frac * 0.999_999;
        let (a, b) = apply_attack(&spec, xi, zeta, t, &mut DosLatch::default());
        prop_assert_eq!(a.to_bits(), xi.to_bits());
        prop_assert_eq!(b.to_bits(), zeta.to_bits());
    }

    #[test]
    fn dos_output_stays_frozen(xs in prop::collection::vec(-1.0f64..1.0, 2..50)) {
        let spec = AttackSpec::new(AttackMode::DoS, 0.5);
        let mut latch = DosLatch::default();
        let mut first = None;
        for (k, &xi) in xs.iter().enumerate() {
            let t = 0.5 + k as f64 * 1e-3;
            let (a, _) = apply_attack(&spec, xi, 0.0, t, &mut latch);
            prop_assert_eq!(a, *first.get_or_insert(a));
        }
    }

    #[test]
    fn stealth_deviations_are_proportional(seed in 0u64..1000, tau in 0.0f64..5.0, xi in -1.0f64..1.0) {
        let mut spec = AttackSpec::new(AttackMode::Stealth, 0.2);
        spec.params.stealth_seed = seed;
        let (f, g) = apply_attack(&spec, 0.0, 0.0, 0.2 + tau, &mut DosLatch::default());
        prop_assert_eq!(g, spec.params.alpha_s * f);
        // with a non-zero base the subtraction rounds, so compare to one ulp of xi
        let (a, b) = apply_attack(&spec, xi, 0.0, 0.2 + tau, &mut DosLatch::default());
        prop_assert!((b - spec.params.alpha_s * (a - xi)).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn normalization_inverts(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..60)) {
        let cols = vec!["time".into(), "V1".into(), "P_DG1".into(), "f_DG1".into()];
        let data: Vec<f64> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| std::iter::once(i as f64).chain(r.iter().copied()))
            .collect();
        let table = SampleTable::from_rows(cols, data).unwrap();
        let stats = fit_norm_stats(&table, 7).unwrap();
        let back = denormalize(&normalize(&table, &stats).unwrap(), &stats).unwrap();
        for (x, y) in table.data().iter().zip(back.data()) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn split_is_a_partition(labels in prop::collection::vec(0usize..4, 40..300)) {
        let mut labels = labels;
        // every class needs a few rows to be splittable
        for c in 0..4 {
            labels.extend([c; 3]);
        }
        let [tr, va, te] = stratified_indices(&labels, &SplitSpec::default()).unwrap();
        let mut all: Vec<usize> = tr.iter().chain(&va).chain(&te).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for c in 0..4 {
            let n = labels.iter().filter(|&&y| y == c).count() as f64;
            let in_tr = tr.iter().filter(|&&i| labels[i] == c).count() as f64;
            prop_assert!((in_tr / n - 0.70).abs() < 0.35);
        }
    }

    #[test]
    fn kd_targets_are_distributions(
        logits in prop::collection::vec(-20.0f64..20.0, 7),
        label in 0usize..7,
        alpha in 0.0f64..1.0,
        beta in 0.0f64..1.0,
        temperature in 0.1f64..10.0,
    ) {
        prop_assume!(alpha + beta > 1e-6);
        let cfg = KDConfig { alpha, beta, temperature, ..KDConfig::default() };
        let q = kd_targets(&one_hot(&[label], 7).unwrap(), &logits, &cfg).unwrap();
        prop_assert!(q.iter().all(|&p| p >= 0.0));
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn higher_temperature_never_lowers_entropy(
        logits in prop::collection::vec(-10.0f64..10.0, 2..8),
        t1 in 0.2f64..5.0,
        dt in 0.0f64..5.0,
    ) {
        let spread = logits.iter().cloned().fold(f64::MIN, f64::max)
            - logits.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-6);
        let h1 = entropy(&soften(&logits, t1));
        let h2 = entropy(&soften(&logits, t1 + dt));
        prop_assert!(h2 >= h1 - 1e-12, "{} < {}", h2, h1);
    }

    #[test]
    fn confusion_matrix_is_consistent(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..200)) {
        let (pred, truth): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let m = compute_metrics(&pred, &truth, 5).unwrap();
        let trace: usize = (0..5).map(|c| m.confusion[c][c]).sum();
        prop_assert_eq!(m.accuracy, trace as f64 / truth.len() as f64);
        for c in 0..5 {
            prop_assert_eq!(m.confusion[c].iter().sum::<usize>(), m.support[c]);
        }
    }

    #[test]
    fn weighted_f1_matches_macro_on_balanced_support(pred in prop::collection::vec(0usize..3, 30)) {
        let truth: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let m = compute_metrics(&pred, &truth, 3).unwrap();
        prop_assert!((m.weighted_f1 - m.macro_f1).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trees_respect_structure_and_probabilities_normalize(
        seed in 0u64..1000,
        leaves in 2usize..16,
        k in 2usize..5,
        binary in any::<bool>(),
    ) {
        let k = if binary { 2 } else { k };
        let (x, y) = blobs(150, 3, k, seed);
        let mut p = if binary { GbdtParams::binary() } else { GbdtParams::multiclass(k) };
        p.num_leaves = leaves;
        p.num_iterations = 8;
        p.min_samples_leaf = 5;
        p.seed = seed;
        let out = fit(&p, &x, &y);
        let m = &out.model;
        prop_assert_eq!(m.trees.len(), out.log.len() * p.n_outputs());
        for t in &m.trees {
            prop_assert!(t.n_leaves() <= leaves);
            for n in &t.nodes {
                if let Node::Internal { gain, .. } = n {
                    prop_assert!(*gain >= 0.0);
                }
            }
        }
        for row in x.iter().take(40) {
            let pr = m.predict_proba(row).unwrap();
            prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(pr.iter().all(|&q| q > 0.0 && q < 1.0));
            prop_assert!(argmax_class(&pr) < k);
        }
    }
}

#[test]
fn training_does_not_depend_on_thread_count() {
    let (x, y) = blobs(600, 5, 4, 1);
    let mut p = GbdtParams::multiclass(4);
    p.num_iterations = 10;
    p.bagging_freq = 1;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| fit(&p, &x, &y).model.to_text())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
}

#[test]
fn student_file_respects_its_caps() {
    let (x, y) = blobs(400, 4, 7, 5);
    let cfg = KDConfig::default();
    let out = fit(&cfg.student_params, &x, &y);
    let text = out.model.to_text();
    let back = mgids::gbdt::BoostedModel::from_text(&text).unwrap();
    assert!(back.n_iterations() <= cfg.student_params.num_iterations);
    assert!(back
        .trees
        .iter()
        .all(|t| t.n_leaves() <= cfg.student_params.num_leaves));
}
