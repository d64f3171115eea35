//! Saving a trained model, loading it back and scoring raw rows with it.
//!
//! cargo run --release --example persistence

use budget_dag::harness::persist::ModelFile;
use budget_dag::harness::sweep::{model_file, prepare, train_point};
use budget_dag::harness::ExperimentConfig;

fn main() -> budget_dag::Result<()> {
    let dir = std::env::temp_dir().join("budget-dag-persistence");
    std::fs::create_dir_all(&dir).map_err(|e| budget_dag::Error::Io { path: dir.clone(), source: e })?;
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        seed = 1
        [data]
        train = "pima.csv"
        header = true
        [[sensors]]
        name = "weight-age-etc"
        columns = [0, 2, 3, 5, 6, 7]
        [[sensors]]
        name = "glucose"
        columns = [1]
        [[sensors]]
        name = "insulin"
        columns = [4]
        [model]
        degree = 2
        lambda = 10.0
        "#,
        std::path::Path::new(data),
    )?;
    let prep = prepare(&cfg)?;
    let point = train_point(&cfg, &prep, 0.05)?;
    let path = dir.join("pima-0.05.json");
    model_file(&cfg, &prep, &point).save(&path)?;
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0));

    let loaded = ModelFile::load(&path)?;
    println!("format {} v{}, trained at delta {}", loaded.magic, loaded.format_version, loaded.delta);
    // a raw pima row: pregnancies, glucose, pressure, skin, insulin, bmi, pedigree, age
    let row = [2.0, 148.0, 72.0, 35.0, 0.0, 33.6, 0.627, 50.0];
    let t = loaded.infer_raw(&row)?;
    let names: Vec<&str> = t.final_sensors.iter().map(|i| loaded.model.suite().specs()[i].name.as_str()).collect();
    println!("row {row:?}: bought {names:?} for {}, predicted class {}", t.acquisition_cost, t.prediction);
    Ok(())
}
