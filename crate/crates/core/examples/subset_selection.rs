//! Greedy selection of sensor subsets, then a union DAG over them.
//!
//! Twelve sensors is too many for the exhaustive lattice. Three of them carry
//! signal for different parts of the data; the rest are noise. Greedy coverage
//! picks subsets whose classifiers are right on complementary examples.
//! The second half checks greedy against brute force on a frozen oracle.
//!
//! cargo run --release --example subset_selection

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use budget_dag::bank::BankConfig;
use budget_dag::dag::build_union_dag;
use budget_dag::data::{LabeledExample, SensorSuite};
use budget_dag::logistic::LogisticConfig;
use budget_dag::select::{exhaustive_best, greedy_select, greedy_select_with, GreedyOptions, LookupOracle, SelectConfig};

const M: usize = 12;

fn sample(r: &mut ChaCha8Rng, n: usize) -> Vec<LabeledExample> {
    (0..n)
        .map(|_| {
            let label = r.gen_range(1..=2);
            let sign = if label == 2 { 1.0 } else { -1.0 };
            let regime = r.gen_range(0..3);
            let x = (0..M)
                .map(|j| if j == regime * 4 { sign + r.gen_range(-0.5..0.5) } else { r.gen_range(-1.0..1.0) })
                .collect();
            LabeledExample::new(x, label)
        })
        .collect()
}

fn main() -> budget_dag::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let train = sample(&mut r, 400);
    let val = sample(&mut r, 200);
    let suite = SensorSuite::per_column(M, 1.0)?;
    let config = SelectConfig {
        slots: 3,
        budget_units: 3,
        bank: BankConfig { degree: 1, homogeneous: true, logistic: LogisticConfig { lambda: 0.1, ..Default::default() } },
        options: GreedyOptions::default(),
    };
    let sel = greedy_select(&train, &val, &suite, 2, &config)?;
    for (j, s) in sel.subsets.iter().enumerate() {
        println!("slot {j}: {s}");
    }
    println!("reward after each step: {:.3?}", sel.history);
    let dag = build_union_dag(&sel.nonempty())?;
    println!("union DAG: {} nodes over {} super-sensors", dag.len(), dag.num_units());

    // frozen coverage oracle: greedy against the exhaustive optimum
    let sets: Vec<Vec<usize>> = (0..30).map(|_| (0..6).filter(|_| r.gen_bool(0.25)).collect()).collect();
    let oracle = LookupOracle::tabulate(6, sets.len(), |i, s| sets[i].iter().any(|&j| s.contains(j)));
    let greedy = greedy_select_with(&oracle, 6, 2, 3, GreedyOptions::default())?;
    let best = exhaustive_best(&oracle, 6, 2, 3)?;
    println!("frozen oracle: greedy {:.3}, optimum {best:.3}, bound {:.3}", greedy.reward, (1.0 - (-1.0f64).exp()) * best);
    Ok(())
}
