//! `mgids`: simulate attack scenarios, build the dataset, train and distill
//! detectors, and evaluate them, all from one TOML config.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or contract violation,
//! 3 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mgids::attack::AttackMode;
use mgids::dataset::{class_names, normalize, NormStats, SampleTable};
use mgids::pipeline::{self, ModelKind, PathsConfig, PipelineConfig};
use mgids::Error;

#[derive(Parser, Debug)]
#[command(
    name = "mgids",
    version,
    about = "Microgrid secondary-control attack simulator and GBDT intrusion detectors"
)]
struct Cli {
    /// Pipeline configuration file (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Root output directory; overrides every path in the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed; overrides every seed in the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run scenarios and write one CSV per mode.
    Simulate {
        /// Attack mode to simulate (Normal, Additive, Ramp, SlowRamp, Sinusoid, Stealth, DoS).
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        scenario: Option<String>,
        /// Simulate every configured scenario.
        #[arg(long)]
        all: bool,
    },
    /// Merge, downsample, split and normalize the scenario CSVs.
    Dataset,
    /// Train the binary or multiclass detector.
    Train(Objective),
    /// Distill the multiclass teacher into the student.
    Distill,
    /// Score every trained model on the test split and write reports.
    Eval,
    /// Retrain without each feature group and report the macro-F1 drop.
    Ablate,
    /// Measure teacher and student latency and file size.
    Bench,
    /// Classify CSV rows one at a time.
    Predict {
        /// Model to use: binary, multiclass or student.
        #[arg(long, default_value = "multiclass")]
        model: String,
        /// CSV with the dataset column layout.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Apply the stored normalization before predicting (for raw
        /// scenario CSVs).
        #[arg(long)]
        raw: bool,
        /// Print at most this many rows.
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Objective {
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    multiclass: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Diverged { .. } | Error::NonFinite(_) => 3,
        Error::UnknownMode(_) => 1,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.paths = PathsConfig::under(out);
    }
    if let Some(seed) = cli.seed {
        cfg.apply_seed(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn model_kind(name: &str) -> Result<ModelKind, Error> {
    match name {
        "binary" => Ok(ModelKind::Binary),
        "multiclass" => Ok(ModelKind::Multiclass),
        "student" => Ok(ModelKind::Student),
        _ => Err(Error::Config(format!(
            "unknown model `{name}`; expected binary, multiclass or student"
        ))),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate { scenario, .. } => {
            let specs = match scenario {
                Some(name) => vec![cfg.scenario(AttackMode::from_str(name)?)?.clone()],
                None => cfg.scenarios.clone(),
            };
            for ((path, table), spec) in
                pipeline::simulate_to_disk(&cfg, &specs)?.iter().zip(&specs)
            {
                let attack_rows = table.labels_bin()?.iter().filter(|&&y| y == 1).count();
                println!(
                    "{}: {} rows, {} attack rows from t = {} s on DG {:?} -> {}",
                    spec.mode,
                    table.n_rows(),
                    attack_rows,
                    spec.onset,
                    spec.targets,
                    path.display()
                );
            }
        }
        Command::Dataset => {
            let scenarios = pipeline::load_scenarios(&cfg)?;
            let bundle = pipeline::build_dataset(&cfg.dataset, &scenarios)?;
            pipeline::write_dataset(&cfg.paths, &bundle)?;
            print!("{}", bundle.summary.to_text());
            println!("wrote {}", cfg.paths.dataset_dir.display());
        }
        Command::Train(obj) => {
            let kind = if obj.binary {
                ModelKind::Binary
            } else {
                ModelKind::Multiclass
            };
            let (tr, va, _) = pipeline::load_splits(&cfg.paths)?;
            let out = pipeline::train_stage(&cfg, kind, &tr, &va)?;
            let last = out.log.last();
            println!(
                "{}: {} iterations run, best iteration {}, valid loss {:.6}",
                kind.name(),
                out.log.len(),
                out.model.best_iteration,
                last.and_then(|e| e.valid_loss).unwrap_or(f64::NAN)
            );
            println!("wrote {}", cfg.paths.model(kind).display());
        }
        Command::Distill => {
            let teacher = pipeline::load_model(&cfg.paths, ModelKind::Multiclass)?;
            let (tr, va, _) = pipeline::load_splits(&cfg.paths)?;
            let out = pipeline::distill_stage(&cfg, &teacher, &tr, &va)?;
            print!("{}", out.report.to_kv());
            println!("wrote {}", cfg.paths.model(ModelKind::Student).display());
        }
        Command::Eval => {
            let (_, _, te) = pipeline::load_splits(&cfg.paths)?;
            let teacher = pipeline::load_model(&cfg.paths, ModelKind::Multiclass)?;
            for kind in [ModelKind::Binary, ModelKind::Multiclass, ModelKind::Student] {
                if kind != ModelKind::Multiclass && !cfg.paths.model(kind).exists() {
                    println!(
                        "{}: skipped, run `{}` to produce it",
                        kind.name(),
                        kind.producer()
                    );
                    continue;
                }
                let model = pipeline::load_model(&cfg.paths, kind)?;
                let m = pipeline::eval_model(&cfg.paths, kind, &model, &te)?;
                println!(
                    "{}: accuracy {:.4}, macro F1 {:.4}, weighted F1 {:.4} on {} rows",
                    kind.name(),
                    m.accuracy,
                    m.macro_f1,
                    m.weighted_f1,
                    m.n_samples
                );
                if kind == ModelKind::Student {
                    let traj = pipeline::trajectory_stage(&cfg, &teacher, &model, &te)?;
                    println!(
                        "teacher/student trajectory agreement {:.2}%",
                        traj.agreement_pct
                    );
                }
            }
            let demo = pipeline::demo_stage(&cfg, &teacher, &te)?;
            let names = class_names();
            for d in &demo {
                println!(
                    "demo row {:>6}: predicted {:<9} truth {:<9} {}",
                    d.row,
                    names[d.predicted],
                    names[d.truth],
                    if d.matched() { "match" } else { "MISS" }
                );
            }
            let hits = demo.iter().filter(|d| d.matched()).count();
            println!("demo: {hits}/{} matched", demo.len());
            println!("reports in {}", cfg.paths.report_dir().display());
        }
        Command::Ablate => {
            let (tr, va, te) = pipeline::load_splits(&cfg.paths)?;
            for r in pipeline::ablation_stage(&cfg, &tr, &va, &te)? {
                println!(
                    "removed {:<4} macro F1 {:.5}  drop {:+.3}%",
                    r.removed,
                    r.macro_f1,
                    100.0 * r.drop
                );
            }
        }
        Command::Bench => {
            let (_, _, te) = pipeline::load_splits(&cfg.paths)?;
            let res = pipeline::bench_stage(&cfg, &te)?;
            print!("{}", res.to_kv());
        }
        Command::Predict {
            model,
            input,
            raw,
            limit,
        } => {
            let kind = model_kind(model)?;
            let m = pipeline::load_model(&cfg.paths, kind)?;
            let mut table = SampleTable::read_csv(input)?;
            if *raw {
                let p = cfg.paths.norm_stats();
                if !p.exists() {
                    return Err(Error::MissingArtifact {
                        path: p,
                        command: "dataset".into(),
                    });
                }
                table = normalize(&table, &NormStats::read_csv(&p)?)?;
            }
            let feat = table.feature_indices();
            let names: Vec<String> = match kind {
                ModelKind::Binary => vec!["Normal".into(), "Attack".into()],
                _ => class_names().into_iter().map(String::from).collect(),
            };
            println!("row,predicted,probability");
            let n = limit.unwrap_or(usize::MAX).min(table.n_rows());
            for i in 0..n {
                let r = table.row(i);
                let x: Vec<f64> = feat.iter().map(|&c| r[c]).collect();
                let p = m.predict_proba(&x)?;
                let c = mgids::gbdt::argmax_class(&p);
                println!("{i},{},{:.6}", names[c], p[c]);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
