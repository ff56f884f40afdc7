use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;
use pcs_cli::experiment::output_dir;
use pcs_cli::{load_config, run_experiment, Mode, EXIT_CONFIG, EXIT_RUN};

/// Pauli check sandwiching on an emulated multi-region noisy QPU.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Overrides the config's mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,

    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory; defaults to a timestamped directory under the
    /// output root.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Simulation worker threads.
    #[arg(long)]
    workers: Option<usize>,

    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    overwrite: bool,

    /// Root for timestamped output directories.
    #[arg(long, env = "PCS_OUTPUT_ROOT", default_value = "runs")]
    output_root: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let mut exp = match load_config(&args.config) {
        Ok(exp) => exp,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(mode) = args.mode {
        exp.config.mode = mode;
    }
    if let Some(workers) = args.workers {
        if workers == 0 {
            eprintln!("--workers must be ≥ 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        exp.config.workers = Some(workers);
    }
    if let Some(seed) = args.seed {
        exp.config.seed = seed;
        // the layout shuffle depends on the seed
        let base = args.config.parent().map(PathBuf::from);
        exp = match pcs_cli::config::resolve(exp.config, base.as_deref()) {
            Ok(exp) => exp,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        };
    }

    let explicit = args.out.clone().or_else(|| exp.config.output_dir.clone());
    let out = match output_dir(explicit.as_deref(), &args.output_root, exp.payload.label(), args.overwrite) {
        Ok(dir) => dir,
        Err(e) => {
            eprintln!("{e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    match run_experiment(&exp, &out) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            println!("\nartifacts written to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(EXIT_RUN)
        }
    }
}
