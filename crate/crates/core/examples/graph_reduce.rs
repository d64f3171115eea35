//! Training acquisition policies end to end on synthetic data.
//!
//! Three sensors: a free one that separates the data except near zero, a
//! paid one that resolves the rest, and one that is pure noise. Quadratic
//! policies learn to buy the second sensor only when the first reads small. As the cost multiplier
//! grows the learned policies buy fewer sensors and error rises towards the
//! prior.
//!
//! cargo run --release --example graph_reduce

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use budget_dag::bank::{train_bank, BankConfig};
use budget_dag::dag::build_full_dag;
use budget_dag::data::{LabeledExample, SensorSpec, SensorSuite};
use budget_dag::filter_tree::BaseLearner;
use budget_dag::harness::sweep::scale_costs;
use budget_dag::graph_reduce::{graph_reduce_train, GraphReduceConfig, PolicyView};
use budget_dag::logistic::LogisticConfig;

fn sample(r: &mut ChaCha8Rng, n: usize) -> Vec<LabeledExample> {
    (0..n)
        .map(|_| {
            let label = r.gen_range(1..=2);
            let sign = if label == 2 { 1.0 } else { -1.0 };
            // the coarse reading is unreliable near zero
            let coarse = sign * r.gen_range(0.0..1.0) + r.gen_range(-0.3..0.3);
            let fine = sign + r.gen_range(-0.4..0.4);
            LabeledExample::new(vec![coarse, fine, r.gen_range(-1.0..1.0)], label)
        })
        .collect()
}

fn main() -> budget_dag::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(17);
    let train = sample(&mut r, 600);
    let test = sample(&mut r, 600);
    let base = SensorSuite::new(
        [("coarse", 0.0), ("fine", 1.0), ("noise", 1.0)]
            .iter()
            .enumerate()
            .map(|(id, &(name, cost))| SensorSpec { id, name: name.into(), columns: vec![id], cost })
            .collect(),
        3,
    )?;
    let dag = build_full_dag(3)?;
    let logistic = LogisticConfig { lambda: 0.1, ..Default::default() };
    let bank = train_bank(&train, &dag, &base, 2, &BankConfig { degree: 1, homogeneous: true, logistic })?;
    let config = GraphReduceConfig {
        learner: BaseLearner::Logistic { degree: 2, homogeneous: false, config: logistic },
        view: PolicyView::Acquired,
    };

    println!("{:>6} {:>8} {:>8} {:>8}", "delta", "sensors", "cost", "error");
    for delta in [0.0, 0.02, 0.05, 0.1, 0.2, 0.5] {
        let suite = scale_costs(&base, delta)?;
        let (model, report) = graph_reduce_train(&train, dag.clone(), bank.clone(), &suite, &config)?;
        let risk = model.empirical_risk(&test)?;
        println!("{delta:>6} {:>8.3} {:>8.4} {:>8.4}", risk.avg_sensors, risk.avg_cost, risk.avg_error);
        if delta == 0.05 {
            println!("        rounds: {:?}", report.rounds.iter().map(|r| r.iter().map(|n| n.0).collect::<Vec<_>>()).collect::<Vec<_>>());
            let t = model.infer(&test[0].features)?;
            let path: Vec<String> = t.states.iter().map(|&s| model.dag().node(s).sensors.to_string()).collect();
            println!("        first test example: {} -> classify as {}", path.join(" -> "), t.prediction);
        }
    }
    Ok(())
}
