//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! output_dir = "out/pima"
//!
//! [data]
//! train = "pima.csv"        # relative to this file
//! header = true
//! label_column = 8          # default: last column
//!
//! [[sensors]]
//! name = "glucose"
//! columns = [1]             # feature indices, label column removed
//! cost = 1.0                # scaled by each sweep value
//!
//! [model]
//! degree = 3
//!
//! [mode]
//! kind = "full-dag"         # or "subset-select" with slots / budget_units
//!
//! [sweep]
//! points = 20               # or an explicit `deltas = [...]`
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bank::BankConfig;
use crate::data::{SensorSpec, SensorSuite};
use crate::error::{Error, Result};
use crate::filter_tree::BaseLearner;
use crate::graph_reduce::{GraphReduceConfig, PolicyView};
use crate::logistic::LogisticConfig;
use crate::select::GreedyOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub train: PathBuf,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
    /// CSV column holding the 1-based label; defaults to the last column.
    #[serde(default)]
    pub label_column: Option<usize>,
    /// Number of classes; defaults to the largest label seen.
    #[serde(default)]
    pub num_classes: Option<usize>,
    /// Training share of a single-file dataset.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.75
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorGroup {
    pub name: String,
    pub columns: Vec<usize>,
    #[serde(default = "default_cost")]
    pub cost: f64,
}

fn default_cost() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub degree: usize,
    /// Exactly-degree monomials plus bias; `false` uses all degrees up to `degree`.
    pub homogeneous: bool,
    pub lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let l = LogisticConfig::default();
        ModelConfig {
            degree: 3,
            homogeneous: true,
            lambda: l.lambda,
            max_iters: l.max_iters,
            tol: l.tol,
        }
    }
}

impl ModelConfig {
    pub fn logistic(&self) -> LogisticConfig {
        LogisticConfig {
            lambda: self.lambda,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }

    pub fn bank(&self) -> BankConfig {
        BankConfig {
            degree: self.degree,
            homogeneous: self.homogeneous,
            logistic: self.logistic(),
        }
    }

    pub fn graph_reduce(&self) -> GraphReduceConfig {
        GraphReduceConfig {
            learner: BaseLearner::Logistic {
                degree: self.degree,
                homogeneous: self.homogeneous,
                config: self.logistic(),
            },
            view: PolicyView::Acquired,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Mode {
    FullDag,
    SubsetSelect {
        /// Number of greedily selected subsets.
        slots: usize,
        /// Total sensors over all subsets.
        budget_units: usize,
        /// Append a subset holding every sensor after selection.
        #[serde(default = "yes")]
        add_full_subset: bool,
        /// Share of the training split held out to score candidate subsets.
        #[serde(default = "default_validation_fraction")]
        validation_fraction: f64,
        #[serde(default = "yes")]
        stop_when_flat: bool,
    },
}

fn yes() -> bool {
    true
}

fn default_validation_fraction() -> f64 {
    0.25
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::FullDag => "full-dag",
            Mode::SubsetSelect { .. } => "subset-select",
        }
    }

    pub fn greedy_options(&self) -> GreedyOptions {
        match self {
            Mode::SubsetSelect { stop_when_flat, .. } => GreedyOptions {
                stop_when_flat: *stop_when_flat,
            },
            Mode::FullDag => GreedyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Explicit cost multipliers. When absent, `points` log-spaced values in
    /// `(0, M]` plus zero are used, `M` being the number of sensors.
    pub deltas: Option<Vec<f64>>,
    pub points: usize,
    /// Smallest positive value of the default grid, as a fraction of `M`.
    pub min_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            deltas: None,
            points: 20,
            min_fraction: 1e-3,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self, num_sensors: usize) -> Vec<f64> {
        if let Some(d) = &self.deltas {
            return d.clone();
        }
        let top = num_sensors as f64;
        let mut grid = vec![0.0];
        let p = self.points.max(1);
        let span = self.min_fraction.log10();
        for k in 0..p {
            let exponent = if p == 1 {
                0.0
            } else {
                span * (p - 1 - k) as f64 / (p - 1) as f64
            };
            grid.push(top * 10f64.powf(exponent));
        }
        grid
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    /// Sensor groups; empty means one unit-cost sensor per feature column.
    #[serde(default)]
    pub sensors: Vec<SensorGroup>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Concurrent sweep points; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_mode() -> Mode {
    Mode::FullDag
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line values that may also come from the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub degree: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        Self::from_toml_with_overrides(text, base_dir, &Overrides::default())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_overrides(path, &Overrides::default())
    }

    pub fn load_with_overrides(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_with_overrides(&text, &base, overrides)
    }

    /// Parses the file and applies command-line overrides. A value set in both
    /// places keeps the file's value and logs a warning.
    pub fn from_toml_with_overrides(
        text: &str,
        base_dir: &Path,
        overrides: &Overrides,
    ) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let seed_in_file = table.contains_key("seed");
        let output_in_file = table.contains_key("output_dir");
        let workers_in_file = table.contains_key("workers");
        let degree_in_file = table
            .get("model")
            .and_then(|m| m.as_table())
            .is_some_and(|m| m.contains_key("degree"));
        let mut cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();

        fn merge<T: std::fmt::Debug>(name: &str, in_file: bool, flag: Option<T>, slot: &mut T) {
            if let Some(v) = flag {
                if in_file {
                    log::warn!("--{name} {v:?} ignored: the config file sets {name} = {slot:?}");
                } else {
                    *slot = v;
                }
            }
        }
        merge("seed", seed_in_file, overrides.seed, &mut cfg.seed);
        merge(
            "output-dir",
            output_in_file,
            overrides.output_dir.clone(),
            &mut cfg.output_dir,
        );
        merge("workers", workers_in_file, overrides.workers, &mut cfg.workers);
        merge("degree", degree_in_file, overrides.degree, &mut cfg.model.degree);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.degree == 0 {
            return Err(Error::Config("model.degree must be at least 1".into()));
        }
        if !(self.data.train_fraction > 0.0 && self.data.train_fraction < 1.0) && self.data.test.is_none() {
            return Err(Error::Config("data.train_fraction must lie in (0, 1)".into()));
        }
        if let Some(d) = &self.sweep.deltas {
            if d.is_empty() || d.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Config(
                    "sweep.deltas must be a non-empty list of non-negative numbers".into(),
                ));
            }
        }
        if let Mode::SubsetSelect {
            slots,
            budget_units,
            validation_fraction,
            add_full_subset,
            ..
        } = self.mode
        {
            let cap = crate::dag::MAX_UNION_SUBSETS - usize::from(add_full_subset);
            if slots == 0 || slots > cap {
                return Err(Error::Config(format!("mode.slots must be in 1..={cap}")));
            }
            if budget_units == 0 {
                return Err(Error::Config("mode.budget_units must be positive".into()));
            }
            if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
                return Err(Error::Config(
                    "mode.validation_fraction must lie in (0, 1)".into(),
                ));
            }
        }
        for g in &self.sensors {
            if !g.cost.is_finite() || g.cost < 0.0 {
                return Err(Error::Config(format!("sensor '{}' has invalid cost", g.name)));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Sensor suite over `num_columns` feature columns, at the configured base costs.
    pub fn sensor_suite(&self, num_columns: usize) -> Result<SensorSuite> {
        if self.sensors.is_empty() {
            return SensorSuite::per_column(num_columns, 1.0);
        }
        let specs = self
            .sensors
            .iter()
            .enumerate()
            .map(|(id, g)| SensorSpec {
                id,
                name: g.name.clone(),
                columns: g.columns.clone(),
                cost: g.cost,
            })
            .collect();
        SensorSuite::new(specs, num_columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PIMA: &str = r#"
        seed = 3
        [data]
        train = "pima.csv"
        header = true
        [[sensors]]
        name = "cheap"
        columns = [0, 2]
        [[sensors]]
        name = "glucose"
        columns = [1]
        cost = 2.0
    "#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml_str(PIMA, Path::new("/data")).unwrap();
        assert_eq!(cfg.mode, Mode::FullDag);
        assert_eq!(cfg.model.degree, 3);
        assert_eq!(cfg.sensors[1].cost, 2.0);
        assert_eq!(cfg.sensors[0].cost, 1.0);
        assert_eq!(cfg.resolve(&cfg.data.train), PathBuf::from("/data/pima.csv"));
        let suite = cfg.sensor_suite(3).unwrap();
        assert_eq!(suite.len(), 2);
    }

    #[test]
    fn file_wins_over_flags() {
        let o = Overrides {
            seed: Some(99),
            workers: Some(4),
            ..Default::default()
        };
        let cfg = ExperimentConfig::from_toml_with_overrides(PIMA, Path::new("."), &o).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.workers, 4);
    }

    #[test]
    fn default_grid_spans_zero_to_m() {
        let g = SweepConfig::default().grid(3);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert!((g[1] - 0.003).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = PIMA.replace("seed = 3", "seed = 3\n[sweep]\ndeltas = [-1.0]");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad, Path::new(".")),
            Err(Error::Config(_))
        ));
        let unknown = PIMA.replace("seed = 3", "seeds = 3");
        assert!(ExperimentConfig::from_toml_str(&unknown, Path::new(".")).is_err());
        let overlap = PIMA.replace("columns = [1]", "columns = [0]");
        let cfg = ExperimentConfig::from_toml_str(&overlap, Path::new(".")).unwrap();
        assert!(cfg.sensor_suite(3).is_err());
    }

    #[test]
    fn subset_select_mode() {
        let text = PIMA.to_string() + "\n[mode]\nkind = \"subset-select\"\nslots = 7\nbudget_units = 20\n";
        let cfg = ExperimentConfig::from_toml_str(&text, Path::new(".")).unwrap();
        assert!(matches!(
            cfg.mode,
            Mode::SubsetSelect {
                slots: 7,
                budget_units: 20,
                add_full_subset: true,
                ..
            }
        ));
        let too_many = text.replace("slots = 7", "slots = 8");
        assert!(ExperimentConfig::from_toml_str(&too_many, Path::new(".")).is_err());
    }
}
