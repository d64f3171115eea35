//! Cost-sensitive classification with a filter tree: four actions whose costs
//! depend on the quadrant of a 2-D input. The tree of logistic classifiers
//! recovers the cheapest action almost everywhere.
//!
//! cargo run --release --example filter_tree

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use budget_dag::filter_tree::{learn, BaseLearner, CslInstance, NodeModel};
use budget_dag::logistic::LogisticConfig;

fn instance(r: &mut ChaCha8Rng, n: usize) -> budget_dag::Result<CslInstance> {
    let mut inputs = Vec::new();
    let mut costs = Vec::new();
    for _ in 0..n {
        let x = vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let best = 2 * usize::from(x[0] > 0.0) + usize::from(x[1] > 0.0);
        costs.push((0..4).map(|a: usize| 0.5 + f64::from((a ^ best).count_ones())).collect());
        inputs.push(x);
    }
    CslInstance::new(inputs, costs)
}

fn main() -> budget_dag::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let train = instance(&mut r, 800)?;
    let test = instance(&mut r, 400)?;
    let learner = BaseLearner::Logistic { degree: 1, homogeneous: true, config: LogisticConfig::default() };
    let tree = learn(&train, &learner)?;

    for (i, node) in tree.nodes().iter().enumerate() {
        let kind = match &node.model {
            NodeModel::Linear(m) => format!("logistic, weights {:.2?}", m.weights),
            other => format!("{other:?}"),
        };
        println!("node {i}: {:?} vs {:?}: {kind}", node.left, node.right);
    }
    for (name, inst) in [("train", &train), ("test", &test)] {
        let got = tree.realized_cost(inst)?;
        let best = inst.min_total_cost();
        println!("{name}: cost {got:.2}, best possible {best:.2}, regret {:.4} per example", (got - best) / inst.len() as f64);
    }
    Ok(())
}
