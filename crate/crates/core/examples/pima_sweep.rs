//! Budget sweep on the pima data: prints the curve next to the full-feature
//! classifier's test error.
//!
//! cargo run --release --example pima_sweep [-- path/to/config.toml]

use std::path::PathBuf;

use budget_dag::harness::sweep::{full_feature_error, prepare, run_sweep_prepared};
use budget_dag::harness::ExperimentConfig;

fn main() -> budget_dag::Result<()> {
    env_logger::init();
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/pima.toml")));
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.output_dir = std::env::temp_dir().join("budget-dag-pima");
    let prep = prepare(&cfg)?;
    println!(
        "{} train / {} test rows, full-feature test error {:.4}",
        prep.experiment.train.len(),
        prep.experiment.test.len(),
        full_feature_error(&prep)?
    );
    let out = run_sweep_prepared(&cfg, &prep)?;
    println!("{:>10} {:>8} {:>8} {:>8} {:>8}", "delta", "sensors", "cost", "test", "train");
    for r in &out.curve.rows {
        println!(
            "{:>10.4} {:>8.3} {:>8.4} {:>8.4} {:>8.4}",
            r.delta, r.avg_sensors, r.avg_cost, r.test_error, r.train_error
        );
    }
    println!("curve written to {}", out.curve_path.display());
    Ok(())
}
