//! Sensors, labeled examples and per-column standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::SensorSubset;

/// A group of raw feature columns acquired together at cost `cost`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub id: usize,
    pub name: String,
    pub columns: Vec<usize>,
    pub cost: f64,
}

/// The validated sensor layout of a dataset: ids are `0..M`, column lists are disjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorSuite {
    specs: Vec<SensorSpec>,
    num_columns: usize,
}

impl SensorSuite {
    pub fn new(specs: Vec<SensorSpec>, num_columns: usize) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::Config("at least one sensor is required".into()));
        }
        let mut owner = vec![None; num_columns];
        for (i, spec) in specs.iter().enumerate() {
            if spec.id != i {
                return Err(Error::Config(format!(
                    "sensor '{}' has id {} but sits at position {i}",
                    spec.name, spec.id
                )));
            }
            if !spec.cost.is_finite() || spec.cost < 0.0 {
                return Err(Error::Config(format!(
                    "sensor '{}' has invalid cost {}",
                    spec.name, spec.cost
                )));
            }
            for &c in &spec.columns {
                let slot = owner.get_mut(c).ok_or_else(|| {
                    Error::Config(format!(
                        "sensor '{}' names column {c} but rows have {num_columns} feature columns",
                        spec.name
                    ))
                })?;
                if let Some(other) = slot.replace(i) {
                    return Err(Error::Config(format!(
                        "column {c} belongs to both sensor {other} and sensor {i}"
                    )));
                }
            }
        }
        Ok(SensorSuite { specs, num_columns })
    }

    /// One sensor per column, all with the same cost.
    pub fn per_column(num_columns: usize, cost: f64) -> Result<Self> {
        let specs = (0..num_columns)
            .map(|c| SensorSpec {
                id: c,
                name: format!("f{c}"),
                columns: vec![c],
                cost,
            })
            .collect();
        Self::new(specs, num_columns)
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.num_columns
    }

    pub fn specs(&self) -> &[SensorSpec] {
        &self.specs
    }

    pub fn cost(&self, sensor: usize) -> f64 {
        self.specs[sensor].cost
    }

    /// Sum of costs over the subset, accumulated in ascending id order.
    pub fn subset_cost(&self, subset: &SensorSubset) -> f64 {
        subset.iter().map(|m| self.specs[m].cost).sum()
    }

    /// Raw columns read by the subset, sorted ascending.
    pub fn columns_of(&self, subset: &SensorSubset) -> Vec<usize> {
        let mut cols: Vec<usize> = subset
            .iter()
            .flat_map(|m| self.specs[m].columns.iter().copied())
            .collect();
        cols.sort_unstable();
        cols
    }

    /// Copy of the suite with every sensor priced at `cost`.
    pub fn with_uniform_cost(&self, cost: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.specs {
            s.cost = cost;
        }
        out
    }

    pub fn all(&self) -> SensorSubset {
        SensorSubset::full(self.len())
    }

    pub fn none(&self) -> SensorSubset {
        SensorSubset::empty(self.len())
    }
}

/// A fully measured example. Labels are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl LabeledExample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        LabeledExample { features, label }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>, num_classes: usize) -> Result<Self> {
        let width = examples.first().map(|e| e.features.len()).unwrap_or(0);
        for (i, e) in examples.iter().enumerate() {
            if e.features.len() != width {
                return Err(Error::Schema(format!(
                    "example {i} has {} features, expected {width}",
                    e.features.len()
                )));
            }
            if e.label == 0 || e.label > num_classes {
                return Err(Error::Schema(format!(
                    "example {i} has label {} outside 1..={num_classes}",
                    e.label
                )));
            }
        }
        Ok(Dataset {
            examples,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.examples.first().map(|e| e.features.len()).unwrap_or(0)
    }
}

/// Per-column affine map to zero mean and unit variance, fit on a training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(examples: &[LabeledExample]) -> Self {
        let dim = examples.first().map(|e| e.features.len()).unwrap_or(0);
        let n = examples.len().max(1) as f64;
        let mut means = vec![0.0; dim];
        for e in examples {
            for (m, v) in means.iter_mut().zip(&e.features) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut scales = vec![0.0; dim];
        for e in examples {
            for ((s, v), m) in scales.iter_mut().zip(&e.features).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut scales {
            let sd = (*s / n).sqrt();
            // constant columns pass through centered
            *s = if sd > 1e-12 { sd } else { 1.0 };
        }
        Standardizer { means, scales }
    }

    pub fn identity(dim: usize) -> Self {
        Standardizer {
            means: vec![0.0; dim],
            scales: vec![1.0; dim],
        }
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn transform_all(&self, examples: &[LabeledExample]) -> Result<Vec<LabeledExample>> {
        examples
            .iter()
            .map(|e| Ok(LabeledExample::new(self.transform(&e.features)?, e.label)))
            .collect()
    }
}
