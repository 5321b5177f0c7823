use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use cellsp::experiments::{run_experiment, Experiment, ExperimentConfig};

/// Signal processing experiments on random cell complexes.
#[derive(Parser, Debug)]
#[command(name = "cellsp", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_sides: Option<usize>,
    #[arg(long)]
    max_candidates: Option<usize>,
    /// Order of the lower (irrotational) filter.
    #[arg(long)]
    order_lower: Option<usize>,
    /// Order of the upper (solenoidal) filter.
    #[arg(long)]
    order_upper: Option<usize>,
    /// Include the joint single-filter design (`--joint=false` to skip it).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    joint: Option<bool>,
    /// Merge numerically equal eigenvalues before fitting filter masks.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    dedup_spectrum: Option<bool>,
    /// Any other config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn config_from(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::read(cli.experiment, path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::defaults(cli.experiment),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects key=value, got {kv:?}"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = cli.max_sides {
        cfg.max_sides = v;
    }
    if let Some(v) = cli.max_candidates {
        cfg.max_candidates = v;
    }
    if let Some(v) = cli.order_lower {
        cfg.order_lower = v;
    }
    if let Some(v) = cli.order_upper {
        cfg.order_upper = v;
    }
    if let Some(v) = cli.joint {
        cfg.joint = v;
    }
    if let Some(v) = cli.dedup_spectrum {
        cfg.dedup_spectrum = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config_from(&cli).and_then(|cfg| Ok(run_experiment(&cfg)?));
    match result {
        Ok(summary) => {
            println!(
                "{}: {} -> {}",
                summary.experiment,
                summary.message,
                summary.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
