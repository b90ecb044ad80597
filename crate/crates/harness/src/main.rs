use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use harvest_core::Result;
use harvest_harness::output::Manifest;
use harvest_harness::{bench_report, embedbench, evaluate, exit_code, generate, report, train, Config};

/// Selective harvesting experiments.
#[derive(Parser)]
#[command(name = "harvest", version)]
struct Cli {
    /// TOML configuration file; every field has a default.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override one field, e.g. `--set train.epochs=20`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Output directory (overrides `output`).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Write instances as edge and target lists.
    Generate,
    /// Train NAC offline and write a checkpoint with its training log.
    Train,
    /// Run an agent on repeated instances and aggregate the curves.
    Evaluate,
    /// Score the embeddings along optimal traversals of the benchmark grid.
    Embedbench,
    /// Re-aggregate the per-run CSVs of an earlier evaluate or embedbench run.
    Report,
    /// Print the resolved configuration.
    Config,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(out) = cli.out {
        cfg.output = out;
    }
    match cli.verb {
        Verb::Generate => {
            let plan = generate(&cfg)?;
            println!("wrote {} instances to {}", plan.len(), cfg.output.join("instances").display());
        }
        Verb::Train => {
            let outcome = train(&cfg)?;
            let last = outcome.log.last().map_or(0.0, |l| l.mean_targets_found);
            println!("trained {} epochs, final mean targets found {last:.2}", outcome.log.len());
        }
        Verb::Evaluate => {
            let ev = evaluate(&cfg)?;
            let last = ev.aggregate.last().expect("at least one step");
            println!(
                "{}: {} repetitions ({} failed), targets found at step {}: {:.2} +- {:.2}",
                cfg.experiment.agent,
                ev.repetitions.len(),
                ev.manifest.failures,
                last.step,
                last.targets_found_mean,
                last.targets_found_std
            );
        }
        Verb::Embedbench => {
            let runs = embedbench(&cfg)?;
            println!("{} traversals written to {}", runs.len(), cfg.output.display());
        }
        Verb::Report => {
            if Manifest::read(&cfg.output)?.verb == "embedbench" {
                let rows = bench_report(&cfg.output)?;
                println!("{} summary rows", rows.len());
            } else {
                let rows = report(&cfg.output)?;
                println!("{} aggregate rows", rows.len());
            }
        }
        Verb::Config => print!("{}", cfg.to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
