use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use budget_dag::bank::SubsetClassifier;
use budget_dag::dag::Transition;
use budget_dag::harness::persist::ModelFile;
use budget_dag::harness::sweep::{self, model_file, prepare, train_point};
use budget_dag::harness::{ExperimentConfig, Overrides};
use budget_dag::{Error, Result};

/// Learn and evaluate adaptive sensor-acquisition policies.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Log more (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Polynomial degree for classifiers and policies.
    #[arg(long)]
    degree: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::load_with_overrides(
            &self.config,
            &Overrides {
                seed: self.seed,
                output_dir: self.output_dir.clone(),
                workers: self.workers,
                degree: self.degree,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Greedily choose sensor subsets and write them to subsets.json.
    SelectSubsets(Common),
    /// Train one policy at a single cost multiplier.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Model file to write; defaults to <output_dir>/model.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a saved model on the config's test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Write one CSV line per test example with its path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Train and score a policy for every sweep value; writes curve.csv.
    Sweep(Common),
    /// Summarize a saved model.
    InspectModel {
        #[arg(long)]
        model: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::SelectSubsets(common) => {
            let cfg = common.load()?;
            let exp = budget_dag::harness::ingest(&cfg)?;
            let sel = sweep::select_subsets(&cfg, &exp)?;
            let names: Vec<Vec<&str>> = sel
                .subsets
                .iter()
                .map(|s| s.iter().map(|i| exp.suite.specs()[i].name.as_str()).collect())
                .collect();
            let json = serde_json::json!({
                "subsets": sel.subsets.iter().map(|s| s.iter().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "sensor_names": names,
                "reward": sel.reward,
                "history": sel.history,
            });
            let path = cfg.output_path().join("subsets.json");
            write_text(&path, &serde_json::to_string_pretty(&json).expect("plain json"))?;
            for (j, s) in sel.subsets.iter().enumerate() {
                println!("subset {j}: {s}");
            }
            println!("reward {}", sel.reward);
            println!("wrote {}", path.display());
        }
        Command::Train { common, delta, out } => {
            let cfg = common.load()?;
            let prep = prepare(&cfg)?;
            let point = train_point(&cfg, &prep, delta)?;
            let path = out.unwrap_or_else(|| cfg.output_path().join("model.json"));
            model_file(&cfg, &prep, &point).save(&path)?;
            println!(
                "delta {delta}: test error {}, avg sensors {}, avg cost {}",
                point.test.avg_error, point.test.avg_sensors, point.test.avg_cost
            );
            println!("wrote {}", path.display());
        }
        Command::Evaluate {
            common,
            model,
            trace,
        } => {
            let cfg = common.load()?;
            let m = ModelFile::load_for(&model, &cfg)?;
            let exp = budget_dag::harness::ingest(&cfg)?;
            let mut traces = Vec::with_capacity(exp.raw_test.len());
            for e in &exp.raw_test {
                traces.push(m.infer_raw(&e.features)?);
            }
            let risk = budget_dag::graph_reduce::summarize(&exp.raw_test, &traces);
            if let Some(path) = trace {
                let mut out = String::from("example,label,prediction,cost,sensors,path\n");
                for (i, (e, t)) in exp.raw_test.iter().zip(&traces).enumerate() {
                    let path: Vec<String> = t
                        .states
                        .iter()
                        .map(|&s| m.model.dag().node(s).sensors.to_string())
                        .collect();
                    out += &format!(
                        "{i},{},{},{},{},\"{}\"\n",
                        e.label,
                        t.prediction,
                        t.acquisition_cost,
                        t.final_sensors.len(),
                        path.join(" -> ")
                    );
                }
                write_text(&path, &out)?;
            }
            println!("test error  {}", risk.avg_error);
            println!("avg cost    {}", risk.avg_cost);
            println!("avg sensors {}", risk.avg_sensors);
            println!("avg loss    {}", risk.avg_loss);
        }
        Command::Sweep(common) => {
            let cfg = common.load()?;
            let out = sweep::run_sweep(&cfg)?;
            print!("{}", out.curve.to_csv());
            for (d, e) in &out.failures {
                eprintln!("delta {d} failed: {e}");
            }
            println!("wrote {}", out.curve_path.display());
        }
        Command::InspectModel { model } => {
            let m = ModelFile::load(&model)?;
            inspect(&m, &mut std::io::stdout().lock())
                .map_err(|e| Error::Training(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.into(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn inspect(m: &ModelFile, w: &mut impl Write) -> std::io::Result<()> {
    let model = &m.model;
    let dag = model.dag();
    writeln!(w, "format      {} v{}", m.magic, m.format_version)?;
    writeln!(w, "mode        {}", m.config.mode.name())?;
    writeln!(w, "delta       {}", m.delta)?;
    writeln!(w, "classes     {}", m.num_classes)?;
    writeln!(w, "view        {:?}", model.view())?;
    if let Some(sel) = &m.selected_subsets {
        let s: Vec<String> = sel.iter().map(ToString::to_string).collect();
        writeln!(w, "selected    {}", s.join(" "))?;
    }
    writeln!(w, "sensors")?;
    for s in model.suite().specs() {
        writeln!(w, "  {} {:<16} cost {} columns {:?}", s.id, s.name, s.cost, s.columns)?;
    }
    writeln!(
        w,
        "dag         {:?}, {} nodes, {} edges, {} classifiers",
        dag.kind(),
        dag.len(),
        dag.num_edges(),
        model.bank().entries().len()
    )?;
    let origin = vec![0.0; model.suite().num_columns()];
    for id in dag.node_ids() {
        let node = dag.node(id);
        let actions: Vec<String> = node
            .transitions
            .iter()
            .map(|t| match t {
                Transition::Classify => "classify".to_string(),
                Transition::Acquire { to, .. } => format!("-> {}", dag.node(*to).sensors),
            })
            .collect();
        let prior = model.bank().predict(&node.sensors, &origin).unwrap_or(0);
        writeln!(
            w,
            "  node {:>3} {:<12} {} tree nodes; actions [{}]; class at mean input {}",
            id.0,
            node.sensors.to_string(),
            model.policy(id).nodes().len(),
            actions.join(", "),
            prior
        )?;
    }
    Ok(())
}
