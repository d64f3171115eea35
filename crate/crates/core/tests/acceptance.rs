//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then asserts.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use budget_dag::bank::FnBank;
use budget_dag::cost::{edge_cost, EdgeEnd};
use budget_dag::dag::{build_full_dag, build_union_dag, NodeId, Transition};
use budget_dag::data::{LabeledExample, SensorSpec, SensorSuite};
use budget_dag::filter_tree::{learn, BaseLearner, CslInstance};
use budget_dag::graph_reduce::{graph_reduce_train, GraphReduceConfig, PolicyView};
use budget_dag::harness::persist::ModelFile;
use budget_dag::harness::sweep::{full_feature_error, prepare, run_sweep_prepared, Prepared, SweepOutput};
use budget_dag::harness::ExperimentConfig;
use budget_dag::logistic::{LogisticConfig, WeightedLogistic, WeightedSample};
use budget_dag::poly::PolyMap;
use budget_dag::select::{exhaustive_best, greedy_select_with, marginal_gain_check, GreedyOptions, LookupOracle};
use budget_dag::subset::SensorSubset;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "criterion {id} [{name}]: {} -- {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn suite_with_costs(costs: &[f64]) -> SensorSuite {
    let specs = costs
        .iter()
        .enumerate()
        .map(|(i, &cost)| SensorSpec {
            id: i,
            name: format!("s{i}"),
            columns: vec![i],
            cost,
        })
        .collect();
    SensorSuite::new(specs, costs.len()).unwrap()
}

// Costs on a 1/8 grid keep every partial sum exact in f64, so exact equality
// tests the bookkeeping rather than rounding.
fn dyadic_cost(r: &mut impl Rng) -> f64 {
    r.gen_range(0..=6) as f64 / 8.0
}

#[test]
fn c1_graph_reduce_matches_dynamic_programming() {
    let start = Instant::now();
    let m = 3;
    let n = 50;
    let mut r = rng(101);
    let subsets = SensorSubset::enumerate_all(m);
    let mut worst_gap = 0.0f64;
    let mut mismatches = 0;
    let trials = 20;
    for _ in 0..trials {
        let costs: Vec<f64> = (0..m).map(|_| dyadic_cost(&mut r)).collect();
        let suite = suite_with_costs(&costs);
        // correctness of each subset's classifier on each example, frozen
        let correct: Vec<HashMap<SensorSubset, bool>> = (0..n)
            .map(|_| subsets.iter().map(|s| (s.clone(), r.gen_bool(0.5))).collect())
            .collect();
        let examples: Vec<LabeledExample> = (0..n)
            .map(|i| LabeledExample::new(vec![i as f64, r.gen(), r.gen()], 1 + (i % 2)))
            .collect();
        let by_key: HashMap<u64, usize> =
            examples.iter().enumerate().map(|(i, e)| (e.features[0].to_bits(), i)).collect();
        let labels: Vec<usize> = examples.iter().map(|e| e.label).collect();
        let table = correct.clone();
        let bank = FnBank(move |s: &SensorSubset, x: &[f64]| {
            let i = *by_key.get(&x[0].to_bits())?;
            let right = table[i][s];
            Some(if right { labels[i] } else { 3 - labels[i] })
        });
        let cfg = GraphReduceConfig {
            learner: BaseLearner::Memorize,
            view: PolicyView::Full,
        };
        let (model, _) =
            graph_reduce_train(&examples, build_full_dag(m).unwrap(), bank, &suite, &cfg).unwrap();
        for (i, e) in examples.iter().enumerate() {
            let best = subsets
                .iter()
                .map(|s| f64::from(u8::from(!correct[i][s])) + suite.subset_cost(s))
                .fold(f64::INFINITY, f64::min);
            let got = model.infer(&e.features).unwrap().loss(e.label);
            if got != best {
                mismatches += 1;
                worst_gap = worst_gap.max(got - best);
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && elapsed < Duration::from_secs(10);
    report(
        1,
        "DP-oracle equivalence",
        ok,
        format!(
            "{trials} instances x {n} examples, {mismatches} mismatches (max gap {worst_gap}), {elapsed:.2?}"
        ),
    );
    assert!(ok);
}

#[test]
fn c2_filter_tree_zero_regret() {
    let start = Instant::now();
    let n = 1000;
    let mut r = rng(202);
    let mut inputs = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    while inputs.len() < n {
        let x: [f64; 2] = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        if x[0].abs() < 0.05 || x[1].abs() < 0.05 {
            continue;
        }
        // best action from the quadrant; cost grows with Hamming distance so
        // every tournament comparison is decided by one coordinate's sign
        let best = 2 * usize::from(x[0] > 0.0) + usize::from(x[1] > 0.0);
        let base: f64 = r.gen_range(0.1..1.0);
        let step: f64 = r.gen_range(0.5..2.0);
        let w: Vec<f64> = (0..4)
            .map(|a: usize| base + step * f64::from((a ^ best).count_ones()))
            .collect();
        inputs.push(x.to_vec());
        costs.push(w);
    }
    let inst = CslInstance::new(inputs, costs).unwrap();
    let tree = learn(
        &inst,
        &BaseLearner::Logistic {
            degree: 1,
            homogeneous: true,
            config: LogisticConfig::default(),
        },
    )
    .unwrap();
    let realized = tree.realized_cost(&inst).unwrap();
    let floor = inst.min_total_cost();
    let elapsed = start.elapsed();
    let ok = realized <= 1.01 * floor && elapsed < Duration::from_secs(30);
    report(
        2,
        "filter-tree zero regret",
        ok,
        format!(
            "realized {realized:.4} vs minimum {floor:.4} (ratio {:.5}), {elapsed:.2?}",
            realized / floor
        ),
    );
    assert!(ok);
}

#[test]
fn c3_reward_is_submodular() {
    let mut r = rng(303);
    let mut triples = 0u64;
    let mut violations = 0u64;
    for _ in 0..1000 {
        let n = r.gen_range(1..=20);
        let t = r.gen_range(2..=5);
        let density: f64 = r.gen_range(0.05..0.95);
        let rows: Vec<Vec<bool>> = (0..n)
            .map(|_| (0..t).map(|_| r.gen_bool(density)).collect())
            .collect();
        for mask in 0u32..(1 << t) {
            let s: Vec<usize> = (0..t).filter(|j| mask >> j & 1 == 1).collect();
            for a in (0..t).filter(|a| mask >> a & 1 == 0) {
                for b in (0..t).filter(|&b| b != a && mask >> b & 1 == 0) {
                    triples += 1;
                    if !marginal_gain_check(&rows, &s, a, b) {
                        violations += 1;
                    }
                }
            }
        }
    }
    let ok = violations == 0 && triples > 0;
    report(
        3,
        "submodularity",
        ok,
        format!("{triples} (S, a, b) triples over 1000 matrices, {violations} violations"),
    );
    assert!(ok);
}

#[test]
fn c4_greedy_within_one_minus_inverse_e() {
    let start = Instant::now();
    let (m, slots, budget) = (6, 2, 3);
    let bound = 1.0 - (-1.0f64).exp();
    let mut r = rng(404);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let n = r.gen_range(5..=40);
        // example i is classified correctly by any subset holding one of its
        // sensors: correctness is nested under inclusion
        let sets: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..m).filter(|_| r.gen_bool(0.2)).collect())
            .collect();
        let oracle = LookupOracle::tabulate(m, n, |i, s| sets[i].iter().any(|&j| s.contains(j)));
        let greedy = greedy_select_with(&oracle, m, slots, budget, GreedyOptions::default())
            .unwrap()
            .reward;
        let opt = exhaustive_best(&oracle, m, slots, budget).unwrap();
        if greedy < bound * opt {
            violations += 1;
        }
        if opt > 0.0 {
            worst = worst.min(greedy / opt);
        }
    }
    let elapsed = start.elapsed();
    let ok = violations == 0 && elapsed < Duration::from_secs(60);
    report(
        4,
        "greedy approximation",
        ok,
        format!("100 instances, {violations} below (1-1/e)*OPT, worst ratio {worst:.4}, {elapsed:.2?}"),
    );
    assert!(ok);
}

struct PimaRun {
    cfg: ExperimentConfig,
    prep: Prepared,
    out: SweepOutput,
    full_error: f64,
    elapsed: Duration,
}

fn pima_config(out_dir: &Path) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pima.toml");
    let mut cfg = ExperimentConfig::load(&path).unwrap();
    cfg.output_dir = out_dir.to_path_buf();
    cfg
}

fn pima() -> &'static PimaRun {
    static RUN: OnceLock<PimaRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("budget-dag-acceptance-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let cfg = pima_config(&dir);
        let start = Instant::now();
        let prep = prepare(&cfg).unwrap();
        let out = run_sweep_prepared(&cfg, &prep).unwrap();
        let elapsed = start.elapsed();
        let full_error = full_feature_error(&prep).unwrap();
        PimaRun {
            cfg,
            prep,
            out,
            full_error,
            elapsed,
        }
    })
}

#[test]
fn c5_pima_budget_curve_endpoints() {
    let run = pima();
    let zero = run.out.curve.row(0.0).expect("delta 0 in grid");
    let three = run.out.curve.row(3.0).expect("delta 3 in grid");
    let checks = [
        zero.test_error <= run.full_error + 0.02,
        zero.avg_sensors >= three.avg_sensors,
        three.avg_sensors <= 0.05,
        run.elapsed < Duration::from_secs(600),
        run.out.failures.is_empty(),
    ];
    let ok = checks.iter().all(|&c| c);
    report(
        5,
        "pima budget curve",
        ok,
        format!(
            "delta=0: error {:.4} (full-feature {:.4}), sensors {:.3}; delta=3: sensors {:.3}; {} rows in {:.2?}",
            zero.test_error,
            run.full_error,
            zero.avg_sensors,
            three.avg_sensors,
            run.out.curve.rows.len(),
            run.elapsed
        ),
    );
    assert!(ok, "{checks:?}");
}

#[test]
fn c6_accounting_and_reproducibility() {
    let run = pima();
    let mut row_breaks = Vec::new();
    let mut max_ulps = 0u64;
    for row in &run.out.curve.rows {
        let sum = row.test_error + row.avg_cost;
        if row.avg_loss != sum {
            row_breaks.push(row.delta);
            max_ulps = max_ulps.max(row.avg_loss.to_bits().abs_diff(sum.to_bits()));
        }
    }
    let mut path_breaks = 0;
    let mut checked = 0;
    for path in &run.out.model_paths {
        let m = ModelFile::load(path).unwrap();
        for e in &run.prep.experiment.test {
            let t = m.model.infer(&e.features).unwrap();
            checked += 1;
            if t.acquisition_cost != m.model.suite().subset_cost(&t.final_sensors) {
                path_breaks += 1;
            }
        }
    }
    let snapshot = |paths: &[PathBuf]| -> Vec<Vec<u8>> {
        paths.iter().map(|p| std::fs::read(p).unwrap()).collect()
    };
    let mut files = vec![run.out.curve_path.clone()];
    files.extend(run.out.model_paths.iter().cloned());
    let before = snapshot(&files);
    let rerun_prep = prepare(&run.cfg).unwrap();
    let rerun = run_sweep_prepared(&run.cfg, &rerun_prep).unwrap();
    let mut files2 = vec![rerun.curve_path.clone()];
    files2.extend(rerun.model_paths.iter().cloned());
    let identical = files == files2 && before == snapshot(&files2);
    let ok = row_breaks.is_empty() && path_breaks == 0 && identical;
    report(
        6,
        "accounting invariants",
        ok,
        format!(
            "avg loss != test error + avg cost at {} of {} rows (max {max_ulps} ulp); {path_breaks}/{checked} paths with cost != sensor cost; rerun byte-identical: {identical} ({} files)",
            row_breaks.len(),
            run.out.curve.rows.len(),
            files.len()
        ),
    );
    assert!(ok);
}

#[test]
fn c7_gradient_matches_central_differences() {
    let mut r = rng(707);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = r.gen_range(1..=4);
        let degree = r.gen_range(1..=3);
        let n = r.gen_range(5..=40);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| r.gen_range(-1.5..1.5)).collect())
            .collect();
        let samples: Vec<WeightedSample> = xs
            .iter()
            .map(|x| WeightedSample {
                x,
                positive: r.gen_bool(0.5),
                importance: r.gen_range(0.0..3.0),
            })
            .collect();
        let poly = PolyMap::dense(degree, d).unwrap().with_homogeneous(r.gen_bool(0.5));
        let lambda = r.gen_range(0.0..0.5);
        let obj = WeightedLogistic::new(&samples, &poly, lambda).unwrap();
        let w: Vec<f64> = (0..obj.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (_, g) = obj.value_and_gradient(&w);
        let h = 1e-5;
        let numeric: Vec<f64> = (0..w.len())
            .map(|k| {
                let mut up = w.clone();
                let mut down = w.clone();
                up[k] += h;
                down[k] -= h;
                (obj.value(&up) - obj.value(&down)) / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(
            numeric.iter().map(|a| a * a).sum::<f64>().sqrt(),
        );
        let rel = if scale == 0.0 { diff } else { diff / scale };
        worst = worst.max(rel);
    }
    let ok = worst <= 1e-5;
    report(
        7,
        "gradient check",
        ok,
        format!("50 instances, worst relative error {worst:.3e}"),
    );
    assert!(ok);
}

#[test]
fn c8_union_dag_accumulates_union_cost() {
    let mut r = rng(808);
    let mut paths = 0;
    let mut walks = 0;
    let mut breaks = 0;
    for _ in 0..200 {
        let m = r.gen_range(2..=7);
        let t = r.gen_range(1..=3);
        let mut units: Vec<SensorSubset> = Vec::new();
        while units.len() < t {
            let s = SensorSubset::from_ids(m, (0..m).filter(|_| r.gen_bool(0.5)));
            if !s.is_empty() && !units.contains(&s) {
                units.push(s);
            }
        }
        let costs: Vec<f64> = (0..m).map(|_| dyadic_cost(&mut r)).collect();
        let suite = suite_with_costs(&costs);
        let dag = build_union_dag(&units).unwrap();
        let bank = FnBank(|_: &SensorSubset, _: &[f64]| Some(1));
        let ex = LabeledExample::new(vec![0.0; m], 1);

        // every root-to-node path, by enumeration
        let mut stack = vec![(dag.root(), 0.0)];
        while let Some((node, acc)) = stack.pop() {
            paths += 1;
            if acc != suite.subset_cost(&dag.node(node).sensors) {
                breaks += 1;
            }
            for tr in dag.transitions(node) {
                if let Transition::Acquire { to, .. } = *tr {
                    let c = edge_cost(
                        &ex,
                        &dag.node(node).sensors,
                        EdgeEnd::Subset(&dag.node(to).sensors),
                        &bank,
                        &suite,
                    )
                    .unwrap();
                    stack.push((to, acc + c));
                }
            }
        }
        // random walks ending in classify
        for _ in 0..10 {
            walks += 1;
            let mut node: NodeId = dag.root();
            let mut acc = 0.0;
            let mut acquired = SensorSubset::empty(m);
            loop {
                let trs = dag.transitions(node);
                match trs[r.gen_range(0..trs.len())] {
                    Transition::Classify => break,
                    Transition::Acquire { unit, to } => {
                        acquired = acquired.union(&units[unit]);
                        acc += suite.subset_cost(&dag.node(to).sensors.difference(&dag.node(node).sensors));
                        node = to;
                    }
                }
            }
            if acc != suite.subset_cost(&acquired) || acquired != dag.node(node).sensors {
                breaks += 1;
            }
        }
    }
    let ok = breaks == 0;
    report(
        8,
        "union-DAG cost accounting",
        ok,
        format!("{paths} enumerated paths, {walks} random walks, {breaks} mismatches"),
    );
    assert!(ok);
}
