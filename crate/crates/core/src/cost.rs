//! Step-wise edge costs and the per-example cost table.

use crate::bank::SubsetClassifier;
use crate::dag::{AcquisitionDag, EdgeId, NodeId, Transition};
use crate::data::{LabeledExample, SensorSuite};
use crate::error::{Error, Result};
use crate::subset::SensorSubset;

/// Where an edge ends: a larger subset, or the stop-and-classify sink.
#[derive(Clone, Copy, Debug)]
pub enum EdgeEnd<'a> {
    Subset(&'a SensorSubset),
    Classify,
}

/// Cost of one edge for one example: the price of the newly acquired raw
/// sensors, or the 0/1 error of classifying with `from`.
pub fn edge_cost(
    example: &LabeledExample,
    from: &SensorSubset,
    to: EdgeEnd<'_>,
    bank: &dyn SubsetClassifier,
    suite: &SensorSuite,
) -> Result<f64> {
    match to {
        EdgeEnd::Subset(to) => {
            if !from.is_subset(to) {
                return Err(Error::InvalidStructure(format!(
                    "{from} -> {to} is not an acquisition edge"
                )));
            }
            Ok(suite.subset_cost(&to.difference(from)))
        }
        EdgeEnd::Classify => Ok(classify_error(example, from, bank)?),
    }
}

fn classify_error(example: &LabeledExample, with: &SensorSubset, bank: &dyn SubsetClassifier) -> Result<f64> {
    let predicted = bank.predict(with, &example.features)?;
    Ok(if predicted == example.label { 0.0 } else { 1.0 })
}

/// Loss of classifying with a fixed subset: 0/1 error plus the subset's sensor cost.
pub fn subset_loss(
    example: &LabeledExample,
    subset: &SensorSubset,
    bank: &dyn SubsetClassifier,
    suite: &SensorSuite,
) -> Result<f64> {
    Ok(classify_error(example, subset, bank)? + suite.subset_cost(subset))
}

/// Cost of every DAG edge for every training example, stored edge-major.
///
/// Training only ever adds non-negative cost-to-go onto acquisition edges.
#[derive(Clone, Debug, PartialEq)]
pub struct CostTable {
    num_examples: usize,
    values: Vec<f64>,
    updates: Vec<u32>,
}

impl CostTable {
    pub fn initialize(
        dag: &AcquisitionDag,
        examples: &[LabeledExample],
        bank: &dyn SubsetClassifier,
        suite: &SensorSuite,
    ) -> Result<Self> {
        let n = examples.len();
        let mut values = Vec::with_capacity(dag.num_edges() * n);
        for e in 0..dag.num_edges() {
            let (from, tr) = dag.edge(EdgeId(e));
            let from_set = &dag.node(from).sensors;
            match tr {
                Transition::Classify => {
                    for ex in examples {
                        values.push(classify_error(ex, from_set, bank)?);
                    }
                }
                Transition::Acquire { to, .. } => {
                    // identical for every example
                    let c = suite.subset_cost(&dag.node(to).sensors.difference(from_set));
                    values.extend(std::iter::repeat_n(c, n));
                }
            }
        }
        Ok(CostTable {
            num_examples: n,
            values,
            updates: vec![0; dag.num_edges()],
        })
    }

    pub fn num_examples(&self) -> usize {
        self.num_examples
    }

    pub fn get(&self, example: usize, edge: EdgeId) -> f64 {
        self.values[edge.0 * self.num_examples + example]
    }

    pub fn edge_costs(&self, edge: EdgeId) -> &[f64] {
        &self.values[edge.0 * self.num_examples..(edge.0 + 1) * self.num_examples]
    }

    /// Cost vectors over the node's actions, one per example.
    pub fn action_costs(&self, dag: &AcquisitionDag, node: NodeId) -> Vec<Vec<f64>> {
        let edges: Vec<EdgeId> = dag.out_edges(node).collect();
        (0..self.num_examples)
            .map(|i| edges.iter().map(|&e| self.get(i, e)).collect())
            .collect()
    }

    /// Adds per-example cost-to-go onto an edge.
    pub fn accumulate(&mut self, edge: EdgeId, cost_to_go: &[f64]) {
        debug_assert_eq!(cost_to_go.len(), self.num_examples);
        let n = self.num_examples;
        for (v, c) in self.values[edge.0 * n..(edge.0 + 1) * n].iter_mut().zip(cost_to_go) {
            debug_assert!(*c >= 0.0);
            *v += c;
        }
        self.updates[edge.0] += 1;
    }

    /// How many times cost-to-go was accumulated onto each edge.
    pub fn update_counts(&self) -> &[u32] {
        &self.updates
    }
}
