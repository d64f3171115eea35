//! Acquisition DAGs: the exhaustive lattice over three sensors, and the union
//! DAG over overlapping sensor subsets, with the price of each edge.
//!
//! cargo run --example build_dag

use budget_dag::dag::{build_full_dag, build_union_dag, AcquisitionDag, Transition};
use budget_dag::data::{SensorSpec, SensorSuite};
use budget_dag::subset::SensorSubset;

fn show(dag: &AcquisitionDag, suite: &SensorSuite) {
    println!(
        "{:?} DAG: {} nodes, {} acquisition edges, {} classify edges",
        dag.kind(),
        dag.len(),
        dag.num_acquisition_edges(),
        dag.num_classify_edges()
    );
    for id in dag.node_ids() {
        let node = dag.node(id);
        let moves: Vec<String> = node
            .transitions
            .iter()
            .filter_map(|t| match *t {
                Transition::Classify => None,
                Transition::Acquire { to, .. } => {
                    let next = &dag.node(to).sensors;
                    let price = suite.subset_cost(&next.difference(&node.sensors));
                    Some(format!("{next} (+{price})"))
                }
            })
            .collect();
        println!("  {:>2} units {:<8} sensors {:<8} -> {}", id.0, node.units.to_string(), node.sensors.to_string(), moves.join(", "));
    }
}

fn main() -> budget_dag::Result<()> {
    let suite = SensorSuite::new(
        ["cheap", "medium", "pricey"]
            .iter()
            .zip([1.0, 2.0, 4.0])
            .enumerate()
            .map(|(id, (name, cost))| SensorSpec { id, name: name.to_string(), columns: vec![id], cost })
            .collect(),
        3,
    )?;
    show(&build_full_dag(3)?, &suite);

    // super-sensors {0,1} and {1,2} share sensor 1, which is only paid for once
    let units = [SensorSubset::from_ids(3, [0, 1]), SensorSubset::from_ids(3, [1, 2])];
    println!();
    show(&build_union_dag(&units)?, &suite);
    Ok(())
}
