//! Budget sweeps: one policy per cost multiplier, scored on the test split.
//!
//! Neither the classifier bank nor greedy subset selection looks at sensor
//! costs, so both are computed once and shared by every sweep point; only
//! Graph Reduce is rerun per δ. Sensor `m` costs `δ·c_m` at sweep point δ.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bank::{train_bank, ClassifierBank};
use crate::dag::{build_full_dag, build_union_dag, AcquisitionDag};
use crate::data::{LabeledExample, SensorSpec, SensorSuite};
use crate::error::{Error, Result};
use crate::graph_reduce::{graph_reduce_train, PolicyModel, RiskSummary};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::harness::ingest::{ingest, seeded_split, Experiment, VALIDATION_STREAM};
use crate::harness::persist::{write_atomic, ModelFile};
use crate::select::{greedy_select, SelectConfig, SubsetCollection};
use crate::subset::SensorSubset;

pub const CURVE_HEADER: &str = "delta,avg_sensors,avg_cost,test_error,train_error";

/// Sensor costs multiplied by `delta`.
pub fn scale_costs(suite: &SensorSuite, delta: f64) -> Result<SensorSuite> {
    let specs = suite
        .specs()
        .iter()
        .map(|s| SensorSpec {
            cost: s.cost * delta,
            ..s.clone()
        })
        .collect();
    SensorSuite::new(specs, suite.num_columns())
}

/// Greedy subset selection on a seeded hold-out of the training split.
pub fn select_subsets(cfg: &ExperimentConfig, exp: &Experiment) -> Result<SubsetCollection> {
    let Mode::SubsetSelect {
        slots,
        budget_units,
        validation_fraction,
        ..
    } = cfg.mode
    else {
        return Err(Error::Config("subset selection needs mode.kind = \"subset-select\"".into()));
    };
    let (fit, val) = seeded_split(
        exp.train.clone(),
        1.0 - validation_fraction,
        cfg.seed,
        VALIDATION_STREAM,
    );
    greedy_select(
        &fit,
        &val,
        &exp.suite,
        exp.num_classes,
        &SelectConfig {
            slots,
            budget_units,
            bank: cfg.model.bank(),
            options: cfg.mode.greedy_options(),
        },
    )
}

/// The union DAG's super-sensors: the selected non-empty subsets, deduplicated in
/// slot order, plus the full sensor set when configured.
pub fn union_units(cfg: &ExperimentConfig, selected: &[SensorSubset], num_sensors: usize) -> Vec<SensorSubset> {
    let mut units: Vec<SensorSubset> = Vec::new();
    for s in selected.iter().filter(|s| !s.is_empty()) {
        if !units.contains(s) {
            units.push(s.clone());
        }
    }
    if let Mode::SubsetSelect {
        add_full_subset: true,
        ..
    } = cfg.mode
    {
        let full = SensorSubset::full(num_sensors);
        if !units.contains(&full) {
            units.push(full);
        }
    }
    units
}

/// DAG, bank and selection shared by every sweep point.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub experiment: Experiment,
    pub dag: AcquisitionDag,
    pub bank: ClassifierBank,
    pub selection: Option<SubsetCollection>,
}

impl Prepared {
    pub fn selected_subsets(&self) -> Option<Vec<SensorSubset>> {
        self.selection.as_ref().map(|s| s.subsets.clone())
    }
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    prepare_from(cfg, ingest(cfg)?)
}

pub fn prepare_from(cfg: &ExperimentConfig, experiment: Experiment) -> Result<Prepared> {
    let m = experiment.suite.len();
    let (dag, selection) = match cfg.mode {
        Mode::FullDag => (build_full_dag(m)?, None),
        Mode::SubsetSelect { .. } => {
            let sel = select_subsets(cfg, &experiment)?;
            log::info!(
                "selected {} with reward {}",
                sel.subsets.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                sel.reward
            );
            let units = union_units(cfg, &sel.subsets, m);
            if units.is_empty() {
                return Err(Error::Training("subset selection chose no sensors".into()));
            }
            (build_union_dag(&units)?, Some(sel))
        }
    };
    let bank = train_bank(
        &experiment.train,
        &dag,
        &experiment.suite,
        experiment.num_classes,
        &cfg.model.bank(),
    )?;
    Ok(Prepared {
        experiment,
        dag,
        bank,
        selection,
    })
}

/// A trained policy with its train and test risk.
#[derive(Clone, Debug)]
pub struct TrainedPoint {
    pub delta: f64,
    pub model: PolicyModel,
    pub train: RiskSummary,
    pub test: RiskSummary,
}

pub fn train_point(cfg: &ExperimentConfig, prep: &Prepared, delta: f64) -> Result<TrainedPoint> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Config(format!("cost multiplier {delta} is not a non-negative number")));
    }
    let suite = scale_costs(&prep.experiment.suite, delta)?;
    let (model, _) = graph_reduce_train(
        &prep.experiment.train,
        prep.dag.clone(),
        prep.bank.clone(),
        &suite,
        &cfg.model.graph_reduce(),
    )?;
    let train = model.empirical_risk(&prep.experiment.train)?;
    let test = model.empirical_risk(&prep.experiment.test)?;
    Ok(TrainedPoint {
        delta,
        model,
        train,
        test,
    })
}

pub fn model_file(cfg: &ExperimentConfig, prep: &Prepared, point: &TrainedPoint) -> ModelFile {
    ModelFile::new(
        cfg.clone(),
        point.delta,
        prep.experiment.num_classes,
        prep.selected_subsets(),
        prep.experiment.standardizer.clone(),
        point.model.clone(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub delta: f64,
    pub avg_sensors: f64,
    pub avg_cost: f64,
    pub test_error: f64,
    pub train_error: f64,
    /// Average test path loss; not written to the CSV.
    pub avg_loss: f64,
}

/// One row per sweep point that trained successfully, in grid order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BudgetCurve {
    pub rows: Vec<CurveRow>,
}

impl BudgetCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.delta, r.avg_sensors, r.avg_cost, r.test_error, r.train_error
            );
        }
        out
    }

    pub fn row(&self, delta: f64) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.delta == delta)
    }
}

pub fn model_path(out_dir: &Path, index: usize) -> PathBuf {
    out_dir.join("models").join(format!("delta_{index:02}.json"))
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub curve: BudgetCurve,
    pub curve_path: PathBuf,
    pub model_paths: Vec<PathBuf>,
    /// Grid points that failed, with their diagnostics.
    pub failures: Vec<(f64, String)>,
}

/// Runs every grid point and writes `curve.csv` plus one model file per point
/// into the output directory.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let prep = prepare(cfg)?;
    run_sweep_prepared(cfg, &prep)
}

pub fn run_sweep_prepared(cfg: &ExperimentConfig, prep: &Prepared) -> Result<SweepOutput> {
    let grid = cfg.sweep.grid(prep.experiment.suite.len());
    let out_dir = cfg.output_path();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<(CurveRow, PathBuf)>> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(k, &delta)| {
                let point = train_point(cfg, prep, delta)?;
                let path = model_path(&out_dir, k);
                model_file(cfg, prep, &point).save(&path)?;
                Ok((
                    CurveRow {
                        delta,
                        avg_sensors: point.test.avg_sensors,
                        avg_cost: point.test.avg_cost,
                        test_error: point.test.avg_error,
                        train_error: point.train.avg_error,
                        avg_loss: point.test.avg_loss,
                    },
                    path,
                ))
            })
            .collect()
    });
    let mut curve = BudgetCurve::default();
    let mut model_paths = Vec::new();
    let mut failures = Vec::new();
    for (delta, r) in grid.iter().zip(results) {
        match r {
            Ok((row, path)) => {
                curve.rows.push(row);
                model_paths.push(path);
            }
            Err(e) => {
                log::error!("sweep point delta={delta} skipped: {e}");
                failures.push((*delta, e.to_string()));
            }
        }
    }
    if curve.rows.is_empty() {
        return Err(Error::Training(format!(
            "every sweep point failed; first: {}",
            failures.first().map_or("", |f| f.1.as_str())
        )));
    }
    let curve_path = out_dir.join("curve.csv");
    write_atomic(&curve_path, curve.to_csv().as_bytes())?;
    Ok(SweepOutput {
        curve,
        curve_path,
        model_paths,
        failures,
    })
}

/// Test error of the classifier that always sees every sensor.
pub fn full_feature_error(prep: &Prepared) -> Result<f64> {
    use crate::bank::SubsetClassifier;
    let all = prep.experiment.suite.all();
    let test: &[LabeledExample] = &prep.experiment.test;
    let mut wrong = 0usize;
    for e in test {
        wrong += usize::from(prep.bank.predict(&all, &e.features)? != e.label);
    }
    Ok(wrong as f64 / test.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_header() {
        let c = BudgetCurve {
            rows: vec![CurveRow {
                delta: 0.5,
                avg_sensors: 1.25,
                avg_cost: 0.625,
                test_error: 0.1,
                train_error: 0.05,
                avg_loss: 0.725,
            }],
        };
        assert_eq!(c.to_csv(), format!("{CURVE_HEADER}\n0.5,1.25,0.625,0.1,0.05\n"));
    }

    #[test]
    fn scaling_multiplies_every_cost() {
        let suite = SensorSuite::new(
            vec![
                SensorSpec { id: 0, name: "a".into(), columns: vec![0], cost: 2.0 },
                SensorSpec { id: 1, name: "b".into(), columns: vec![1], cost: 0.5 },
            ],
            2,
        )
        .unwrap();
        let s = scale_costs(&suite, 3.0).unwrap();
        assert_eq!((s.cost(0), s.cost(1)), (6.0, 1.5));
        assert!(scale_costs(&suite, -1.0).is_err());
    }
}
