use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seqtune_cli::{cmd_compare, cmd_diststudy, cmd_tune, Algorithm, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "seqtune",
    version,
    about = "Random search and sequential random search experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory, overriding the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Rs,
    Sqrs,
}

#[derive(Subcommand)]
enum Command {
    /// Fit loss distributions to bootstrap errors and rank them by CvM.
    Diststudy(Common),
    /// Tune with random search or SQRS.
    Tune {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        algorithm: AlgorithmArg,
    },
    /// Paired RS / SQRS comparison over replications.
    Compare(Common),
}

fn setup(common: &Common) -> Result<(ExperimentConfig, RunOptions)> {
    let cfg = ExperimentConfig::load(&common.config)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build_global()
        .context("configuring the worker pool")?;
    Ok((
        cfg,
        RunOptions {
            out: common.out.clone(),
            jobs: common.jobs,
        },
    ))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Diststudy(common) => {
            let (cfg, opts) = setup(&common)?;
            let s = cmd_diststudy(&cfg, &opts)?;
            println!("rank family median_cvm fits");
            for (i, (family, cvm, fits)) in s.ranking.iter().enumerate() {
                println!("{:>4} {family:<10} {cvm:.6} {fits}", i + 1);
            }
            if s.failures > 0 {
                println!(
                    "{} (config, family) fits failed; see dist_failures.csv",
                    s.failures
                );
            }
            println!("wrote {}", s.out_dir.display());
        }
        Command::Tune { common, algorithm } => {
            let (cfg, opts) = setup(&common)?;
            let algorithm = match algorithm {
                AlgorithmArg::Rs => Algorithm::Rs,
                AlgorithmArg::Sqrs => Algorithm::Sqrs,
            };
            let s = cmd_tune(&cfg, algorithm, &opts)?;
            let values: Vec<String> = s
                .best
                .values
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!("winner: config {} ({})", s.best.id, values.join(", "));
            println!(
                "mean loss: {} over {} partitions",
                s.mean_loss, s.partitions_evaluated
            );
            println!("fits: {}", s.fits);
        }
        Command::Compare(common) => {
            let (cfg, opts) = setup(&common)?;
            let aggs = cmd_compare(&cfg, &opts)?;
            println!("setting task_kind replications identical median_eval_ratio");
            for a in aggs {
                println!(
                    "{} {} {} {:.3} {:.3}",
                    a.setting,
                    a.task.as_str(),
                    a.replications,
                    a.identical_proportion,
                    a.median_eval_ratio
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
