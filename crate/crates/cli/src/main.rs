use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use furnace_core::commands::{self as cmd, RunConfig, SEED_ENV};
use furnace_core::models::ModelKind;

#[derive(Parser)]
#[command(name = "furnace", version, about = "Furnace temperature forecasting and PCI control")]
struct Cli {
    /// key=value run configuration; unset keys take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the plant and every random draw (overrides `seed` only
    /// when the config file has none).
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic plant and write a minute-level sensor CSV.
    Generate {
        #[arg(long)]
        minutes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clip, impute and discretize a sensor CSV.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sidecar: PathBuf,
    },
    /// Rank channels by boosted-tree importance and pick model features.
    SelectFeatures {
        #[arg(long = "in")]
        input: PathBuf,
        /// Directory for the importance CSVs and features.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a forecaster.
    Train {
        #[arg(long)]
        model: ModelKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sidecar: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Compare checkpoints on the test split; the first is the reference.
    Evaluate {
        #[arg(long, num_args = 1.., required = true)]
        checkpoints: Vec<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        /// Directory for evaluation.json and evaluation.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan PCI for the five steps after the end of a discretized series.
    Optimize {
        #[arg(long, alias = "checkpoint-mall")]
        checkpoint: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the receding-horizon controller against the synthetic plant.
    ClosedLoop {
        /// Run configuration describing the plant; defaults to --config.
        #[arg(long)]
        plant_config: Option<PathBuf>,
        #[arg(long, alias = "checkpoints")]
        checkpoint: PathBuf,
        #[arg(long)]
        minutes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Every step end to end into one directory.
    Pipeline {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>, seed: u64) -> furnace_core::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p, seed),
        None => RunConfig::parse("", seed),
    }
}

fn run(cli: Cli) -> furnace_core::Result<String> {
    let cfg = load_config(cli.config.as_ref(), cli.seed)?;
    Ok(match cli.command {
        Command::Generate { minutes, out } => {
            let n = cmd::cmd_generate(&cfg, minutes.unwrap_or(cfg.minutes), &out)?;
            format!("wrote {n} rows to {}", out.display())
        }
        Command::Preprocess { input, out, sidecar } => {
            let s = cmd::cmd_preprocess(&cfg, &input, &out, &sidecar)?;
            format!("wrote {} steps of {} features to {}", s.steps(), s.n_features(), out.display())
        }
        Command::SelectFeatures { input, out } => {
            let f = cmd::cmd_select_features(&cfg, &input, &out)?;
            format!("selected {} model features into {}", f.len(), out.display())
        }
        Command::Train { model, input, sidecar, features, checkpoint } => {
            let (_, o) = cmd::cmd_train(&cfg, model, &input, &sidecar, &features, &checkpoint)?;
            format!(
                "trained {model} for {} epochs (best {}), checkpoint {}",
                o.curve.len(),
                o.best_epoch,
                checkpoint.display()
            )
        }
        Command::Evaluate { checkpoints, input, out } => {
            std::fs::create_dir_all(&out).map_err(|e| furnace_core::Error::io(&out, e))?;
            let c = cmd::cmd_evaluate(
                &cfg,
                &checkpoints,
                &input,
                &out.join("evaluation.json"),
                &out.join("evaluation.csv"),
            )?;
            let parts: Vec<String> = c
                .reports
                .iter()
                .map(|r| format!("{}={:.3}", r.model, r.rmse_celsius))
                .collect();
            format!("test rmse (C): {}", parts.join(" "))
        }
        Command::Optimize { checkpoint, input, iterations, out } => {
            let iters = iterations.unwrap_or(cfg.optim.iterations);
            let (_, s) = cmd::cmd_optimize(&cfg, &checkpoint, &input, iters, &out)?;
            format!(
                "loss {:.6} -> {:.6} (iteration {}), pci t/h {:?}",
                s.initial_loss, s.best_loss, s.best_iteration, s.pci_tph
            )
        }
        Command::ClosedLoop { plant_config, checkpoint, minutes, out } => {
            let cfg = match plant_config {
                Some(p) => RunConfig::load(p, cli.seed)?,
                None => cfg,
            };
            let r = cmd::cmd_closed_loop(&cfg, &checkpoint, minutes.unwrap_or(cfg.loop_minutes), &out)?;
            format!(
                "mean |T-target| controlled {:.3} vs uncontrolled {:.3}; in band {:.1}%",
                r.controlled.mean_abs, r.uncontrolled.mean_abs, r.controlled.pct_in_band
            )
        }
        Command::Pipeline { out } => {
            let o = cmd::cmd_pipeline(&cfg, &out)?;
            format!("pipeline wrote {} files to {}", o.files.len(), out.display())
        }
    })
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: kind=usage message={}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: kind={} message={}", e.kind(), one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
