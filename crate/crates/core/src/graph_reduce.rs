//! Leaf-to-root policy training on the acquisition DAG, path inference and
//! empirical risk.
//!
//! Training repeatedly picks the nodes whose children are all leaves, turns
//! each into a cost-sensitive problem over its outgoing edges, fits a filter
//! tree, and adds the cost of the chosen action back onto every edge entering
//! the node. Once a node's outgoing edges are gone it is a leaf itself, so the
//! reduction climbs the DAG one cardinality level per round.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bank::{ClassifierBank, SubsetClassifier};
use crate::cost::CostTable;
use crate::dag::{AcquisitionDag, NodeId, Transition};
use crate::data::{LabeledExample, SensorSuite};
use crate::error::{Error, Result};
use crate::filter_tree::{learn, BaseLearner, CslInstance, FilterTree};
use crate::subset::SensorSubset;

/// Which features a node policy may look at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyView {
    /// Only columns of sensors acquired at the node.
    #[default]
    Acquired,
    /// The full measurement vector. Only meaningful for oracle experiments.
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphReduceConfig {
    pub learner: BaseLearner,
    pub view: PolicyView,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyModel<B = ClassifierBank> {
    dag: AcquisitionDag,
    suite: SensorSuite,
    bank: B,
    view: PolicyView,
    policies: Vec<FilterTree>,
}

/// The path one example takes through the DAG.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTrace {
    /// Nodes visited in order, starting at the root; the sink is implicit after the last.
    pub states: Vec<NodeId>,
    pub actions: Vec<Transition>,
    /// Edge cost of each acquisition step.
    pub step_costs: Vec<f64>,
    pub acquisition_cost: f64,
    pub final_sensors: SensorSubset,
    pub prediction: usize,
}

impl PathTrace {
    /// Path risk: acquisition steps then the classify edge, summed in path order.
    pub fn loss(&self, label: usize) -> f64 {
        let err = if self.prediction == label { 0.0 } else { 1.0 };
        self.step_costs.iter().sum::<f64>() + err
    }

    /// Visited states counting the stop-and-classify sink.
    pub fn visited(&self) -> usize {
        self.states.len() + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskSummary {
    pub avg_loss: f64,
    pub avg_error: f64,
    pub avg_cost: f64,
    pub avg_sensors: f64,
}

/// Bookkeeping from a training run.
#[derive(Clone, Debug)]
pub struct TrainingReport {
    /// Edge costs after all cost-to-go propagation.
    pub costs: CostTable,
    /// Nodes reduced in each round, in processing order.
    pub rounds: Vec<Vec<NodeId>>,
}

pub fn graph_reduce_train<B: SubsetClassifier>(
    train: &[LabeledExample],
    dag: AcquisitionDag,
    bank: B,
    suite: &SensorSuite,
    config: &GraphReduceConfig,
) -> Result<(PolicyModel<B>, TrainingReport)> {
    if train.is_empty() {
        return Err(Error::Degenerate("empty training set".into()));
    }
    dag.validate()?;
    if dag.num_sensors() != suite.len() {
        return Err(Error::Config(format!(
            "DAG covers {} sensors but the suite has {}",
            dag.num_sensors(),
            suite.len()
        )));
    }
    let mut costs = CostTable::initialize(&dag, train, &bank, suite)?;
    let views: Vec<Vec<usize>> = dag
        .nodes()
        .iter()
        .map(|n| view_columns(config.view, &n.sensors, suite))
        .collect();

    let mut remaining: Vec<usize> = dag.nodes().iter().map(|n| n.transitions.len()).collect();
    let mut edges_left: usize = remaining.iter().sum();
    let mut policies: Vec<Option<FilterTree>> = vec![None; dag.len()];
    let mut rounds = Vec::new();

    while edges_left > 0 {
        // (1) nodes whose every child is a leaf
        let mut ready: Vec<NodeId> = dag
            .node_ids()
            .filter(|&j| remaining[j.0] > 0)
            .filter(|&j| {
                dag.transitions(j).iter().all(|t| match *t {
                    Transition::Classify => true,
                    Transition::Acquire { to, .. } => remaining[to.0] == 0,
                })
            })
            .collect();
        if ready.is_empty() {
            return Err(Error::InvalidStructure("no node has only leaf children".into()));
        }
        ready.sort_by(|a, b| {
            let (na, nb) = (dag.node(*a), dag.node(*b));
            nb.units
                .len()
                .cmp(&na.units.len())
                .then(na.units.low_mask().cmp(&nb.units.low_mask()))
        });

        // (2)-(3) per-node cost-sensitive problems, independent within a round
        let fitted = ready
            .par_iter()
            .map(|&j| -> Result<(FilterTree, Vec<f64>)> {
                let w = costs.action_costs(&dag, j);
                let k = dag.transitions(j).len();
                let inputs: Vec<Vec<f64>> = train
                    .iter()
                    .map(|e| views[j.0].iter().map(|&c| e.features[c]).collect())
                    .collect();
                let tree = if k == 1 {
                    FilterTree::constant(1, 0)
                } else {
                    let inst = CslInstance::new(inputs.clone(), w.clone())?;
                    learn(&inst, &config.learner)?
                };
                let to_go = inputs
                    .iter()
                    .zip(&w)
                    .map(|(x, wi)| Ok(wi[tree.predict(x)?]))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((tree, to_go))
            })
            .collect::<Result<Vec<_>>>()?;

        // (4)-(6) after the round barrier: push cost-to-go upstream, drop out-edges
        for (&j, (tree, to_go)) in ready.iter().zip(fitted) {
            for &e in dag.incoming(j) {
                costs.accumulate(e, &to_go);
            }
            edges_left -= remaining[j.0];
            remaining[j.0] = 0;
            policies[j.0] = Some(tree);
        }
        rounds.push(ready);
    }

    let policies = policies
        .into_iter()
        .map(|p| p.expect("every node with out-edges is reduced"))
        .collect();
    Ok((
        PolicyModel {
            dag,
            suite: suite.clone(),
            bank,
            view: config.view,
            policies,
        },
        TrainingReport { costs, rounds },
    ))
}

fn view_columns(view: PolicyView, sensors: &SensorSubset, suite: &SensorSuite) -> Vec<usize> {
    match view {
        PolicyView::Acquired => suite.columns_of(sensors),
        PolicyView::Full => (0..suite.num_columns()).collect(),
    }
}

impl<B: SubsetClassifier> PolicyModel<B> {
    /// Assembles a model from already trained parts.
    pub fn from_parts(
        dag: AcquisitionDag,
        suite: SensorSuite,
        bank: B,
        view: PolicyView,
        policies: Vec<FilterTree>,
    ) -> Result<Self> {
        dag.validate()?;
        if policies.len() != dag.len() {
            return Err(Error::InvalidStructure(format!(
                "{} policies for {} nodes",
                policies.len(),
                dag.len()
            )));
        }
        for (j, p) in policies.iter().enumerate() {
            if p.num_actions() != dag.transitions(NodeId(j)).len() {
                return Err(Error::InvalidStructure(format!(
                    "policy {j} chooses among {} actions, node has {}",
                    p.num_actions(),
                    dag.transitions(NodeId(j)).len()
                )));
            }
        }
        Ok(PolicyModel {
            dag,
            suite,
            bank,
            view,
            policies,
        })
    }

    pub fn dag(&self) -> &AcquisitionDag {
        &self.dag
    }

    pub fn suite(&self) -> &SensorSuite {
        &self.suite
    }

    pub fn bank(&self) -> &B {
        &self.bank
    }

    pub fn view(&self) -> PolicyView {
        self.view
    }

    pub fn policy(&self, node: NodeId) -> &FilterTree {
        &self.policies[node.0]
    }

    pub fn policies(&self) -> &[FilterTree] {
        &self.policies
    }

    /// Walks the DAG from the empty subset until a policy stops to classify.
    pub fn infer(&self, x: &[f64]) -> Result<PathTrace> {
        if x.len() != self.suite.num_columns() {
            return Err(Error::DimensionMismatch {
                expected: self.suite.num_columns(),
                got: x.len(),
            });
        }
        let mut node = self.dag.root();
        let mut trace = PathTrace {
            states: vec![node],
            actions: Vec::new(),
            step_costs: Vec::new(),
            acquisition_cost: 0.0,
            final_sensors: self.dag.node(node).sensors.clone(),
            prediction: 0,
        };
        loop {
            let here = self.dag.node(node);
            let view: Vec<f64> = view_columns(self.view, &here.sensors, &self.suite)
                .iter()
                .map(|&c| x[c])
                .collect();
            let action = self.policies[node.0].predict(&view)?;
            let tr = here.transitions[action];
            trace.actions.push(tr);
            match tr {
                Transition::Classify => {
                    trace.prediction = self.bank.predict(&here.sensors, x)?;
                    trace.final_sensors = here.sensors.clone();
                    return Ok(trace);
                }
                Transition::Acquire { to, .. } => {
                    let added = self.dag.node(to).sensors.difference(&here.sensors);
                    let c = self.suite.subset_cost(&added);
                    trace.step_costs.push(c);
                    trace.acquisition_cost += c;
                    trace.states.push(to);
                    node = to;
                }
            }
        }
    }

    /// Sample averages of path loss, error, acquisition cost and raw sensors acquired.
    pub fn empirical_risk(&self, data: &[LabeledExample]) -> Result<RiskSummary> {
        if data.is_empty() {
            return Err(Error::Degenerate("empirical risk of an empty sample".into()));
        }
        let traces = data
            .par_iter()
            .map(|e| self.infer(&e.features))
            .collect::<Result<Vec<_>>>()?;
        Ok(summarize(data, &traces))
    }
}

/// Aggregates traces; sums run in example order so results are reproducible.
pub fn summarize(data: &[LabeledExample], traces: &[PathTrace]) -> RiskSummary {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut errors = 0usize;
    let mut cost = 0.0;
    let mut sensors = 0usize;
    for (e, t) in data.iter().zip(traces) {
        loss += t.loss(e.label);
        errors += usize::from(t.prediction != e.label);
        cost += t.acquisition_cost;
        sensors += t.final_sensors.len();
    }
    RiskSummary {
        avg_loss: loss / n,
        avg_error: errors as f64 / n,
        avg_cost: cost / n,
        avg_sensors: sensors as f64 / n,
    }
}
