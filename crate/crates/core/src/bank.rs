//! The classifier bank: one multiclass predictor per sensor subset.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dag::AcquisitionDag;
use crate::data::{LabeledExample, SensorSuite};
use crate::error::{Error, Result};
use crate::logistic::{train_weighted_binary, BinaryModel, LogisticConfig, WeightedSample};
use crate::poly::PolyMap;
use crate::subset::SensorSubset;

/// Anything that can classify an example using only the sensors of a subset.
pub trait SubsetClassifier: Sync {
    fn predict(&self, sensors: &SensorSubset, x: &[f64]) -> Result<usize>;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankConfig {
    pub degree: usize,
    pub homogeneous: bool,
    pub logistic: LogisticConfig,
}

impl Default for BankConfig {
    fn default() -> Self {
        BankConfig {
            degree: 3,
            homogeneous: true,
            logistic: LogisticConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MulticlassModel {
    Constant {
        label: usize,
    },
    /// Two classes: the head votes for `classes[0]` on a non-negative score.
    Binary {
        classes: [usize; 2],
        head: BinaryModel,
    },
    /// One head per class; highest score wins, ties go to the lower label.
    OneVsRest {
        classes: Vec<usize>,
        heads: Vec<BinaryModel>,
    },
}

impl MulticlassModel {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            MulticlassModel::Constant { label } => Ok(*label),
            MulticlassModel::Binary { classes, head } => Ok(if head.decide(x)? {
                classes[0]
            } else {
                classes[1]
            }),
            MulticlassModel::OneVsRest { classes, heads } => {
                let mut best = (f64::NEG_INFINITY, classes[0]);
                for (&c, h) in classes.iter().zip(heads) {
                    let s = h.score(x)?;
                    if s > best.0 {
                        best = (s, c);
                    }
                }
                Ok(best.1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankEntry {
    pub sensors: SensorSubset,
    pub model: MulticlassModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierBank {
    pub num_classes: usize,
    /// Sorted by subset order.
    entries: Vec<BankEntry>,
}

impl ClassifierBank {
    pub fn from_entries(num_classes: usize, mut entries: Vec<BankEntry>) -> Self {
        entries.sort_by(|a, b| a.sensors.cmp(&b.sensors));
        entries.dedup_by(|a, b| a.sensors == b.sensors);
        ClassifierBank {
            num_classes,
            entries,
        }
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn get(&self, sensors: &SensorSubset) -> Option<&MulticlassModel> {
        self.entries
            .binary_search_by(|e| e.sensors.cmp(sensors))
            .ok()
            .map(|i| &self.entries[i].model)
    }

    pub fn covers(&self, dag: &AcquisitionDag) -> bool {
        dag.nodes().iter().all(|n| self.get(&n.sensors).is_some())
    }
}

impl SubsetClassifier for ClassifierBank {
    fn predict(&self, sensors: &SensorSubset, x: &[f64]) -> Result<usize> {
        self.get(sensors)
            .ok_or_else(|| Error::MissingClassifier(sensors.to_string()))?
            .predict(x)
    }
}

/// Most frequent label; ties go to the lowest label.
pub fn majority_label(train: &[LabeledExample], num_classes: usize) -> usize {
    let counts = class_counts(train, num_classes);
    let mut best = 1;
    for c in 1..=num_classes {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

fn class_counts(train: &[LabeledExample], num_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; num_classes + 1];
    for e in train {
        counts[e.label] += 1;
    }
    counts
}

/// Trains the multiclass predictor for one subset. The empty subset gets the majority label.
pub fn train_subset_classifier(
    train: &[LabeledExample],
    sensors: &SensorSubset,
    suite: &SensorSuite,
    num_classes: usize,
    config: &BankConfig,
) -> Result<MulticlassModel> {
    if train.is_empty() {
        return Err(Error::Degenerate("empty training set".into()));
    }
    if sensors.is_empty() {
        return Ok(MulticlassModel::Constant {
            label: majority_label(train, num_classes),
        });
    }
    let counts = class_counts(train, num_classes);
    let present: Vec<usize> = (1..=num_classes).filter(|&c| counts[c] > 0).collect();
    if present.len() == 1 {
        return Ok(MulticlassModel::Constant { label: present[0] });
    }
    let poly = PolyMap::new(config.degree, suite.columns_of(sensors), suite.num_columns())?
        .with_homogeneous(config.homogeneous);

    let head_for = |class: usize| -> Result<BinaryModel> {
        let samples: Vec<WeightedSample<'_>> = train
            .iter()
            .map(|e| WeightedSample {
                x: &e.features,
                positive: e.label == class,
                importance: 1.0,
            })
            .collect();
        train_weighted_binary(&samples, &poly, &config.logistic)
    };

    if present.len() == 2 {
        return Ok(MulticlassModel::Binary {
            classes: [present[0], present[1]],
            head: head_for(present[0])?,
        });
    }
    let heads = present
        .par_iter()
        .map(|&c| head_for(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(MulticlassModel::OneVsRest {
        classes: present,
        heads,
    })
}

/// Trains a classifier for every distinct raw sensor set in the DAG.
pub fn train_bank(
    train: &[LabeledExample],
    dag: &AcquisitionDag,
    suite: &SensorSuite,
    num_classes: usize,
    config: &BankConfig,
) -> Result<ClassifierBank> {
    train_bank_for(train, &dag.distinct_sensor_sets(), suite, num_classes, config)
}

pub fn train_bank_for(
    train: &[LabeledExample],
    subsets: &[SensorSubset],
    suite: &SensorSuite,
    num_classes: usize,
    config: &BankConfig,
) -> Result<ClassifierBank> {
    if train.is_empty() {
        return Err(Error::Degenerate("empty training set".into()));
    }
    let counts = class_counts(train, num_classes);
    for c in (1..=num_classes).filter(|&c| counts[c] == 0) {
        log::warn!("class {c} has no training examples and will never be predicted");
    }
    let entries = subsets
        .par_iter()
        .map(|s| {
            Ok(BankEntry {
                sensors: s.clone(),
                model: train_subset_classifier(train, s, suite, num_classes, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassifierBank::from_entries(num_classes, entries))
}

/// Classifier bank backed by a closure, for fixtures and oracles.
pub struct FnBank<F>(pub F);

impl<F> SubsetClassifier for FnBank<F>
where
    F: Fn(&SensorSubset, &[f64]) -> Option<usize> + Sync,
{
    fn predict(&self, sensors: &SensorSubset, x: &[f64]) -> Result<usize> {
        (self.0)(sensors, x).ok_or_else(|| Error::MissingClassifier(sensors.to_string()))
    }
}
