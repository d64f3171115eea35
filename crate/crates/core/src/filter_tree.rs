//! Cost-sensitive multiclass learning by filter tree.
//!
//! The k actions are leaves of a fixed single-elimination bracket. Each
//! internal node holds a binary classifier deciding which of its two
//! sub-bracket winners goes through. Nodes are trained bottom-up: on example
//! `i`, the node sees the winners `a_L`, `a_R` of its already trained
//! subtrees, is asked to pick the cheaper one, and the example is weighted by
//! `|w[a_L] - w[a_R]|`. Examples on which both sides cost the same carry no
//! weight and are skipped.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logistic::{train_weighted_binary, BinaryModel, LogisticConfig, WeightedSample};
use crate::poly::PolyMap;

/// Inputs paired with per-action cost vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CslInstance {
    inputs: Vec<Vec<f64>>,
    costs: Vec<Vec<f64>>,
    num_actions: usize,
}

impl CslInstance {
    pub fn new(inputs: Vec<Vec<f64>>, costs: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != costs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: costs.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::Degenerate("cost-sensitive instance has no examples".into()));
        }
        let k = costs[0].len();
        if k == 0 {
            return Err(Error::EmptyActions);
        }
        let dim = inputs[0].len();
        for (x, w) in inputs.iter().zip(&costs) {
            if w.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: w.len(),
                });
            }
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if w.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(Error::Degenerate(format!(
                    "cost vector {w:?} has a negative or non-finite entry"
                )));
            }
        }
        Ok(CslInstance {
            inputs,
            costs,
            num_actions: k,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn costs(&self) -> &[Vec<f64>] {
        &self.costs
    }

    /// `Σ_i min_a w_i[a]`.
    pub fn min_total_cost(&self) -> f64 {
        self.costs
            .iter()
            .map(|w| w.iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }
}

/// Binary learner used at each filter-tree node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BaseLearner {
    Logistic {
        degree: usize,
        homogeneous: bool,
        config: LogisticConfig,
    },
    /// Exact lookup on training inputs: a zero-regret learner for oracle checks.
    Memorize,
}

impl Default for BaseLearner {
    fn default() -> Self {
        BaseLearner::Logistic {
            degree: 3,
            homogeneous: true,
            config: LogisticConfig::default(),
        }
    }
}

/// Lookup-table binary classifier keyed by the exact bit pattern of the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LookupModel {
    /// Sorted by key; value is `true` when the left side wins.
    entries: Vec<(Vec<u64>, bool)>,
    fallback_left: bool,
}

impl LookupModel {
    fn fit(samples: &[WeightedSample<'_>]) -> Self {
        let mut votes: HashMap<Vec<u64>, f64> = HashMap::new();
        let mut total = 0.0;
        for s in samples.iter().filter(|s| s.importance > 0.0) {
            let signed = if s.positive { s.importance } else { -s.importance };
            *votes.entry(key(s.x)).or_insert(0.0) += signed;
            total += signed;
        }
        let mut entries: Vec<(Vec<u64>, bool)> =
            votes.into_iter().map(|(k, v)| (k, v >= 0.0)).collect();
        entries.sort();
        LookupModel {
            entries,
            fallback_left: total >= 0.0,
        }
    }

    fn decide(&self, x: &[f64]) -> bool {
        let k = key(x);
        match self.entries.binary_search_by(|(e, _)| e.cmp(&k)) {
            Ok(i) => self.entries[i].1,
            Err(_) => self.fallback_left,
        }
    }
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeModel {
    /// No example distinguished the two sides.
    Constant { left: bool },
    Linear(BinaryModel),
    Lookup(LookupModel),
}

impl NodeModel {
    /// `true` when the left sub-bracket's winner goes through. Score zero goes left.
    fn left_wins(&self, x: &[f64]) -> Result<bool> {
        match self {
            NodeModel::Constant { left } => Ok(*left),
            NodeModel::Linear(m) => m.decide(x),
            NodeModel::Lookup(m) => Ok(m.decide(x)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    Leaf(usize),
    Node(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub left: Slot,
    pub right: Slot,
    pub model: NodeModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterTree {
    num_actions: usize,
    nodes: Vec<TreeNode>,
    root: Slot,
}

/// Pairs of slots played in each round; an odd slot out advances on a bye.
fn bracket(num_actions: usize) -> (Vec<Vec<(Slot, Slot)>>, Slot) {
    let mut current: Vec<Slot> = (0..num_actions).map(Slot::Leaf).collect();
    let mut rounds = Vec::new();
    let mut next_id = 0;
    while current.len() > 1 {
        let mut round = Vec::new();
        let mut next = Vec::new();
        for pair in current.chunks(2) {
            if let [l, r] = *pair {
                round.push((l, r));
                next.push(Slot::Node(next_id));
                next_id += 1;
            } else {
                next.push(pair[0]);
            }
        }
        rounds.push(round);
        current = next;
    }
    (rounds, current[0])
}

/// Trains a filter tree on a cost-sensitive instance.
pub fn learn(instance: &CslInstance, learner: &BaseLearner) -> Result<FilterTree> {
    let k = instance.num_actions();
    let n = instance.len();
    let (rounds, root) = bracket(k);
    let dim = instance.inputs[0].len();
    let poly = match learner {
        BaseLearner::Logistic {
            degree,
            homogeneous,
            ..
        } => Some(PolyMap::dense(*degree, dim)?.with_homogeneous(*homogeneous)),
        BaseLearner::Memorize => None,
    };

    let mut nodes: Vec<TreeNode> = Vec::new();
    // winners[slot] for every example, for slots that are internal nodes
    let mut node_winners: Vec<Vec<usize>> = Vec::new();
    let winners_of = |slot: Slot, node_winners: &[Vec<usize>], i: usize| match slot {
        Slot::Leaf(a) => a,
        Slot::Node(j) => node_winners[j][i],
    };

    for round in rounds {
        let trained = round
            .par_iter()
            .map(|&(l, r)| -> Result<(NodeModel, Vec<usize>)> {
                let mut samples = Vec::with_capacity(n);
                let mut sides = Vec::with_capacity(n);
                for i in 0..n {
                    let (al, ar) = (
                        winners_of(l, &node_winners, i),
                        winners_of(r, &node_winners, i),
                    );
                    sides.push((al, ar));
                    let (wl, wr) = (instance.costs[i][al], instance.costs[i][ar]);
                    samples.push(WeightedSample {
                        x: &instance.inputs[i],
                        positive: wl < wr,
                        importance: (wl - wr).abs(),
                    });
                }
                let model = if samples.iter().all(|s| s.importance == 0.0) {
                    NodeModel::Constant { left: true }
                } else {
                    match learner {
                        BaseLearner::Logistic { config, .. } => NodeModel::Linear(
                            train_weighted_binary(&samples, poly.as_ref().unwrap(), config)?,
                        ),
                        BaseLearner::Memorize => NodeModel::Lookup(LookupModel::fit(&samples)),
                    }
                };
                let winners = sides
                    .iter()
                    .zip(&instance.inputs)
                    .map(|(&(al, ar), x)| Ok(if model.left_wins(x)? { al } else { ar }))
                    .collect::<Result<Vec<_>>>()?;
                Ok((model, winners))
            })
            .collect::<Result<Vec<_>>>()?;
        for ((left, right), (model, winners)) in round.into_iter().zip(trained) {
            nodes.push(TreeNode { left, right, model });
            node_winners.push(winners);
        }
    }

    Ok(FilterTree {
        num_actions: k,
        nodes,
        root,
    })
}

impl FilterTree {
    /// A tree that always answers `action`.
    pub fn constant(num_actions: usize, action: usize) -> Self {
        assert!(action < num_actions);
        if num_actions == 1 {
            return FilterTree {
                num_actions,
                nodes: Vec::new(),
                root: Slot::Leaf(0),
            };
        }
        let (rounds, root) = bracket(num_actions);
        let mut nodes = Vec::new();
        // route every match toward the bracket position holding `action`
        let mut contains: Vec<(usize, usize)> = Vec::new();
        let span = |s: Slot, contains: &[(usize, usize)]| match s {
            Slot::Leaf(a) => (a, a),
            Slot::Node(j) => contains[j],
        };
        for round in rounds {
            for (l, r) in round {
                let (ll, lh) = span(l, &contains);
                let (rl, rh) = span(r, &contains);
                let left = !(rl..=rh).contains(&action);
                nodes.push(TreeNode {
                    left: l,
                    right: r,
                    model: NodeModel::Constant { left },
                });
                contains.push((ll.min(rl), lh.max(rh)));
            }
        }
        FilterTree {
            num_actions,
            nodes,
            root,
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Tournament winner for `x`.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.play(self.root, x)
    }

    fn play(&self, slot: Slot, x: &[f64]) -> Result<usize> {
        match slot {
            Slot::Leaf(a) => Ok(a),
            Slot::Node(j) => {
                let node = &self.nodes[j];
                let l = self.play(node.left, x)?;
                let r = self.play(node.right, x)?;
                Ok(if node.model.left_wins(x)? { l } else { r })
            }
        }
    }

    /// `Σ_i w_i[predict(x_i)]` over the instance.
    pub fn realized_cost(&self, instance: &CslInstance) -> Result<f64> {
        instance
            .inputs
            .iter()
            .zip(&instance.costs)
            .map(|(x, w)| Ok(w[self.predict(x)?]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_learner() -> BaseLearner {
        BaseLearner::Logistic {
            degree: 1,
            homogeneous: true,
            config: LogisticConfig::default(),
        }
    }

    #[test]
    fn bracket_shapes() {
        let (rounds, root) = bracket(3);
        assert_eq!(rounds.len(), 2);
        assert_eq!(rounds[0], vec![(Slot::Leaf(0), Slot::Leaf(1))]);
        assert_eq!(rounds[1], vec![(Slot::Node(0), Slot::Leaf(2))]);
        assert_eq!(root, Slot::Node(1));
        let (rounds, root) = bracket(1);
        assert!(rounds.is_empty());
        assert_eq!(root, Slot::Leaf(0));
        let (rounds, _) = bracket(5);
        assert_eq!(rounds.iter().map(Vec::len).sum::<usize>(), 4);
    }

    #[test]
    fn single_action_is_constant() {
        let inst = CslInstance::new(vec![vec![0.3], vec![-1.0]], vec![vec![2.0], vec![0.5]]).unwrap();
        let tree = learn(&inst, &linear_learner()).unwrap();
        assert!(tree.nodes().is_empty());
        assert_eq!(tree.predict(&[100.0]).unwrap(), 0);
    }

    #[test]
    fn empty_actions_rejected() {
        assert!(matches!(
            CslInstance::new(vec![vec![0.0]], vec![vec![]]),
            Err(Error::EmptyActions)
        ));
        assert!(CslInstance::new(vec![], vec![]).is_err());
        assert!(CslInstance::new(vec![vec![0.0]], vec![vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn two_actions_follow_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut inputs = Vec::new();
        let mut costs = Vec::new();
        for _ in 0..500 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            inputs.push(vec![x]);
            costs.push(if x > 0.0 { vec![0.0, 1.0] } else { vec![1.0, 0.0] });
        }
        let inst = CslInstance::new(inputs.clone(), costs.clone()).unwrap();
        let tree = learn(&inst, &linear_learner()).unwrap();
        assert_eq!(tree.nodes().len(), 1);
        let correct = inputs
            .iter()
            .zip(&costs)
            .filter(|(x, w)| w[tree.predict(x).unwrap()] == 0.0)
            .count();
        assert!(correct as f64 / 500.0 >= 0.99);
        let regret = (tree.realized_cost(&inst).unwrap() - inst.min_total_cost()) / 500.0;
        assert!(regret <= 0.01);
    }

    #[test]
    fn sign_node_picks_action_by_side() {
        let head = BinaryModel {
            weights: vec![0.0, -1.0],
            poly: PolyMap::dense(1, 1).unwrap(),
            objective: 0.0,
            iterations: 0,
        };
        let tree = FilterTree {
            num_actions: 2,
            nodes: vec![TreeNode {
                left: Slot::Leaf(0),
                right: Slot::Leaf(1),
                model: NodeModel::Linear(head),
            }],
            root: Slot::Node(0),
        };
        assert_eq!(tree.predict(&[2.0]).unwrap(), 1);
        assert_eq!(tree.predict(&[-2.0]).unwrap(), 0);
        // zero score goes left
        assert_eq!(tree.predict(&[0.0]).unwrap(), 0);
    }

    #[test]
    fn identical_costs_are_a_tie() {
        let inputs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let costs = vec![vec![0.7; 4]; 20];
        let inst = CslInstance::new(inputs, costs).unwrap();
        let tree = learn(&inst, &linear_learner()).unwrap();
        assert!(tree
            .nodes()
            .iter()
            .all(|n| n.model == NodeModel::Constant { left: true }));
        assert_eq!(tree.predict(&[5.0]).unwrap(), 0);
        assert_eq!(tree.realized_cost(&inst).unwrap(), inst.min_total_cost());
    }

    #[test]
    fn memorizing_learner_has_zero_regret() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 1..=6 {
            let inputs: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.gen(), rng.gen()]).collect();
            let costs: Vec<Vec<f64>> = (0..60)
                .map(|_| (0..k).map(|_| rng.gen_range(0..8) as f64 * 0.25).collect())
                .collect();
            let inst = CslInstance::new(inputs, costs).unwrap();
            let tree = learn(&inst, &BaseLearner::Memorize).unwrap();
            assert_eq!(tree.realized_cost(&inst).unwrap(), inst.min_total_cost());
        }
    }

    #[test]
    fn constant_tree_routes_to_action() {
        for k in 1..=7 {
            for a in 0..k {
                assert_eq!(FilterTree::constant(k, a).predict(&[]).unwrap(), a);
            }
        }
    }
}
