//! Greedy selection of sensor subsets for the many-sensor regime.
//!
//! Each of `t` slots holds a sensor subset with its own classifier. The reward
//! of a collection is the fraction of examples that at least one slot's
//! classifier gets right, a max-coverage objective. Starting from empty slots,
//! the greedy loop repeatedly adds the single (slot, sensor) pair with the
//! highest resulting reward until the total slot size reaches the budget.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::bank::{train_subset_classifier, BankConfig, MulticlassModel};
use crate::data::{LabeledExample, SensorSuite};
use crate::error::{Error, Result};
use crate::subset::SensorSubset;

/// Which evaluation examples a subset's classifier gets right.
pub trait RewardOracle: Sync {
    fn num_examples(&self) -> usize;
    fn correct(&self, subset: &SensorSubset) -> Result<Arc<Vec<bool>>>;
}

type Scored = (Arc<MulticlassModel>, Arc<Vec<bool>>);

/// Trains a classifier per subset on one split and scores it on another. Cached by subset.
pub struct LearnedOracle<'a> {
    train: &'a [LabeledExample],
    eval: &'a [LabeledExample],
    suite: &'a SensorSuite,
    num_classes: usize,
    config: BankConfig,
    cache: Mutex<HashMap<SensorSubset, Scored>>,
}

impl<'a> LearnedOracle<'a> {
    pub fn new(
        train: &'a [LabeledExample],
        eval: &'a [LabeledExample],
        suite: &'a SensorSuite,
        num_classes: usize,
        config: BankConfig,
    ) -> Self {
        LearnedOracle {
            train,
            eval,
            suite,
            num_classes,
            config,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn entry(&self, subset: &SensorSubset) -> Result<(Arc<MulticlassModel>, Arc<Vec<bool>>)> {
        if let Some(hit) = self.cache.lock().unwrap().get(subset) {
            return Ok(hit.clone());
        }
        let model =
            train_subset_classifier(self.train, subset, self.suite, self.num_classes, &self.config)?;
        let correct = self
            .eval
            .iter()
            .map(|e| Ok(model.predict(&e.features)? == e.label))
            .collect::<Result<Vec<_>>>()?;
        let value = (Arc::new(model), Arc::new(correct));
        self.cache
            .lock()
            .unwrap()
            .insert(subset.clone(), value.clone());
        Ok(value)
    }

    pub fn classifier(&self, subset: &SensorSubset) -> Result<Arc<MulticlassModel>> {
        Ok(self.entry(subset)?.0)
    }

    pub fn cached_subsets(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

impl RewardOracle for LearnedOracle<'_> {
    fn num_examples(&self) -> usize {
        self.eval.len()
    }

    fn correct(&self, subset: &SensorSubset) -> Result<Arc<Vec<bool>>> {
        Ok(self.entry(subset)?.1)
    }
}

/// Frozen per-subset correctness table.
pub struct LookupOracle {
    num_examples: usize,
    table: HashMap<SensorSubset, Arc<Vec<bool>>>,
}

impl LookupOracle {
    pub fn new(num_examples: usize, table: HashMap<SensorSubset, Vec<bool>>) -> Self {
        LookupOracle {
            num_examples,
            table: table.into_iter().map(|(k, v)| (k, Arc::new(v))).collect(),
        }
    }

    /// Tabulates `rule(example, subset)` over every subset of `num_sensors` sensors.
    pub fn tabulate(
        num_sensors: usize,
        num_examples: usize,
        rule: impl Fn(usize, &SensorSubset) -> bool,
    ) -> Self {
        let table = SensorSubset::enumerate_all(num_sensors)
            .into_iter()
            .map(|s| {
                let v = (0..num_examples).map(|i| rule(i, &s)).collect();
                (s, v)
            })
            .collect();
        Self::new(num_examples, table)
    }
}

impl RewardOracle for LookupOracle {
    fn num_examples(&self) -> usize {
        self.num_examples
    }

    fn correct(&self, subset: &SensorSubset) -> Result<Arc<Vec<bool>>> {
        self.table
            .get(subset)
            .cloned()
            .ok_or_else(|| Error::MissingClassifier(subset.to_string()))
    }
}

/// Examples covered by at least one column. No columns covers nothing.
pub fn covered_count(columns: &[&[bool]]) -> usize {
    let Some(first) = columns.first() else {
        return 0;
    };
    (0..first.len())
        .filter(|&i| columns.iter().any(|c| c[i]))
        .count()
}

/// Reward of a set of correctness columns: fraction of examples covered.
pub fn coverage_reward(columns: &[&[bool]]) -> f64 {
    match columns.first() {
        None => 0.0,
        Some(&[]) => 0.0,
        Some(c) => covered_count(columns) as f64 / c.len() as f64,
    }
}

/// Diminishing-returns check on a frozen reward matrix (`rewards[i][j]`: subset `j`
/// right on example `i`): `G(S+a) - G(S) >= G(S+a+b) - G(S+b)`.
pub fn marginal_gain_check(rewards: &[Vec<bool>], s: &[usize], a: usize, b: usize) -> bool {
    let count = |set: &[usize]| -> i64 {
        rewards
            .iter()
            .filter(|row| set.iter().any(|&j| row[j]))
            .count() as i64
    };
    let with = |extra: &[usize]| -> Vec<usize> { s.iter().chain(extra).copied().collect() };
    let left = count(&with(&[a])) - count(s);
    let right = count(&with(&[a, b])) - count(&with(&[b]));
    left >= right
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Stop as soon as no candidate raises the reward. When unset the loop
    /// spends the whole budget, accepting zero-gain additions.
    pub stop_when_flat: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            stop_when_flat: true,
        }
    }
}

/// Selected subsets with their per-example correctness on the evaluation split.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetCollection {
    pub subsets: Vec<SensorSubset>,
    /// `correct[j][i]`: subset `j` is right on example `i`.
    pub correct: Vec<Vec<bool>>,
    pub reward: f64,
    /// Reward after each committed step, starting from the empty collection.
    pub history: Vec<f64>,
}

impl SubsetCollection {
    pub fn total_size(&self) -> usize {
        self.subsets.iter().map(SensorSubset::len).sum()
    }

    /// Non-empty subsets, in slot order.
    pub fn nonempty(&self) -> Vec<SensorSubset> {
        self.subsets.iter().filter(|s| !s.is_empty()).cloned().collect()
    }

    /// Reward matrix as rows of examples.
    pub fn reward_rows(&self) -> Vec<Vec<bool>> {
        let n = self.correct.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| self.correct.iter().map(|c| c[i]).collect())
            .collect()
    }
}

/// Reward of a collection of subsets under the oracle; empty slots contribute nothing.
pub fn reward_g(subsets: &[SensorSubset], oracle: &dyn RewardOracle) -> Result<f64> {
    let cols = subsets
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| oracle.correct(s))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[bool]> = cols.iter().map(|c| c.as_slice()).collect();
    Ok(coverage_reward(&refs))
}

/// Reward of trained classifiers on an evaluation sample.
pub fn reward_of_classifiers(
    classifiers: &[&MulticlassModel],
    eval: &[LabeledExample],
) -> Result<f64> {
    let cols = classifiers
        .iter()
        .map(|m| {
            eval.iter()
                .map(|e| Ok(m.predict(&e.features)? == e.label))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[bool]> = cols.iter().map(Vec::as_slice).collect();
    Ok(coverage_reward(&refs))
}

/// Greedy (slot, sensor) additions under a total-size budget.
pub fn greedy_select_with(
    oracle: &dyn RewardOracle,
    num_sensors: usize,
    slots: usize,
    budget_units: usize,
    options: GreedyOptions,
) -> Result<SubsetCollection> {
    if slots == 0 {
        return Err(Error::Config("need at least one subset slot".into()));
    }
    if budget_units == 0 {
        return Err(Error::Config("budget must allow at least one sensor".into()));
    }
    let cap = slots * num_sensors;
    let budget = if budget_units > cap {
        log::warn!("budget of {budget_units} sensors exceeds {slots} x {num_sensors}; clipped to {cap}");
        cap
    } else {
        budget_units
    };

    let mut subsets = vec![SensorSubset::empty(num_sensors); slots];
    let mut current = reward_g(&subsets, oracle)?;
    let mut history = vec![current];
    let mut used = 0;

    while used < budget {
        let candidates: Vec<(usize, usize)> = (0..slots)
            .flat_map(|i| (0..num_sensors).map(move |j| (i, j)))
            .filter(|&(i, j)| !subsets[i].contains(j))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let scores = candidates
            .par_iter()
            .map(|&(i, j)| {
                let mut trial = subsets.clone();
                trial[i].insert(j);
                reward_g(&trial, oracle)
            })
            .collect::<Result<Vec<f64>>>()?;
        // first maximum in (slot, sensor) order
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = c;
            }
        }
        if options.stop_when_flat && scores[best] <= current {
            break;
        }
        let (i, j) = candidates[best];
        subsets[i].insert(j);
        current = scores[best];
        history.push(current);
        used += 1;
    }

    let correct = subsets
        .iter()
        .map(|s| {
            if s.is_empty() {
                Ok(vec![false; oracle.num_examples()])
            } else {
                oracle.correct(s).map(|c| c.as_ref().clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubsetCollection {
        subsets,
        correct,
        reward: current,
        history,
    })
}

/// Slot count, budget and learner settings for [`greedy_select`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectConfig {
    pub slots: usize,
    pub budget_units: usize,
    pub bank: BankConfig,
    pub options: GreedyOptions,
}

/// Greedy selection with classifiers trained on `train` and rewards measured on `val`.
pub fn greedy_select(
    train: &[LabeledExample],
    val: &[LabeledExample],
    suite: &SensorSuite,
    num_classes: usize,
    config: &SelectConfig,
) -> Result<SubsetCollection> {
    if train.is_empty() || val.is_empty() {
        return Err(Error::Degenerate("subset selection needs train and validation data".into()));
    }
    let oracle = LearnedOracle::new(train, val, suite, num_classes, config.bank);
    greedy_select_with(&oracle, suite.len(), config.slots, config.budget_units, config.options)
}

/// Best reward over every allocation of at most `budget_units` sensors to `slots`
/// slots, by exhaustive enumeration.
pub fn exhaustive_best(
    oracle: &dyn RewardOracle,
    num_sensors: usize,
    slots: usize,
    budget_units: usize,
) -> Result<f64> {
    let all = SensorSubset::enumerate_all(num_sensors);
    let mut best = 0.0f64;
    let mut chosen: Vec<SensorSubset> = Vec::with_capacity(slots);
    fn recurse(
        all: &[SensorSubset],
        oracle: &dyn RewardOracle,
        slots: usize,
        left: usize,
        start: usize,
        chosen: &mut Vec<SensorSubset>,
        best: &mut f64,
    ) -> Result<()> {
        *best = best.max(reward_g(chosen, oracle)?);
        if chosen.len() == slots {
            return Ok(());
        }
        // slots are interchangeable, so enumerate non-decreasing subset indices
        for (k, s) in all.iter().enumerate().skip(start) {
            if s.is_empty() || s.len() > left {
                continue;
            }
            chosen.push(s.clone());
            recurse(all, oracle, slots, left - s.len(), k, chosen, best)?;
            chosen.pop();
        }
        Ok(())
    }
    recurse(&all, oracle, slots, budget_units, 0, &mut chosen, &mut best)?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(bits: &[u8]) -> Vec<bool> {
        bits.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn reward_examples() {
        let seven = col(&[1, 1, 1, 1, 1, 1, 1, 0, 0, 0]);
        assert_eq!(coverage_reward(&[&seven]), 0.7);
        let a = col(&[1, 1, 0, 0]);
        let b = col(&[0, 0, 1, 1]);
        assert_eq!(coverage_reward(&[&a, &b]), 1.0);
        assert_eq!(coverage_reward(&[&a, &a]), coverage_reward(&[&a]));
        assert_eq!(coverage_reward(&[]), 0.0);
    }

    #[test]
    fn marginal_gain_edge_cases() {
        // rows are examples, columns subsets
        let rows = vec![
            col(&[1, 1, 0]),
            col(&[1, 0, 1]),
            col(&[0, 0, 1]),
            col(&[0, 0, 0]),
        ];
        // column 1 is covered by column 0: both gains zero
        assert!(marginal_gain_check(&rows, &[0], 1, 2));
        // empty S: left gain is column 0's accuracy
        assert!(marginal_gain_check(&rows, &[], 0, 2));
    }

    #[test]
    fn lookup_oracle_missing_subset() {
        let o = LookupOracle::new(3, HashMap::new());
        assert!(o.correct(&SensorSubset::from_ids(2, [0])).is_err());
    }

    #[test]
    fn greedy_first_pick_is_perfect_sensor() {
        // sensor 2 alone classifies everything; others half
        let oracle = LookupOracle::tabulate(4, 8, |i, s| s.contains(2) || (s.contains(0) && i % 2 == 0));
        let out = greedy_select_with(&oracle, 4, 2, 2, GreedyOptions::default()).unwrap();
        assert_eq!(out.subsets[0], SensorSubset::from_ids(4, [2]));
        assert_eq!(out.reward, 1.0);
        // nothing improves past 1.0
        assert_eq!(out.total_size(), 1);
    }

    #[test]
    fn budget_clipped_and_saturates() {
        let oracle = LookupOracle::tabulate(3, 5, |i, s| s.len() > i % 3);
        let out = greedy_select_with(
            &oracle,
            3,
            2,
            100,
            GreedyOptions {
                stop_when_flat: false,
            },
        )
        .unwrap();
        assert!(out.subsets.iter().all(|s| s.len() == 3));
        assert_eq!(out.total_size(), 6);
        assert_eq!(out.reward, 1.0);
    }

    #[test]
    fn greedy_history_non_decreasing() {
        let oracle = LookupOracle::tabulate(5, 12, |i, s| {
            s.iter().any(|m| (i * 7 + m * 3) % 5 == 0)
        });
        let out = greedy_select_with(
            &oracle,
            5,
            3,
            6,
            GreedyOptions {
                stop_when_flat: false,
            },
        )
        .unwrap();
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(out.total_size() <= 6);
    }

    #[test]
    fn zero_slots_rejected() {
        let oracle = LookupOracle::tabulate(2, 2, |_, _| true);
        assert!(greedy_select_with(&oracle, 2, 0, 1, GreedyOptions::default()).is_err());
        assert!(greedy_select_with(&oracle, 2, 1, 0, GreedyOptions::default()).is_err());
    }
}
