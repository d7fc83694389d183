//! `veilkit` — run and tabulate veiled-face recognition experiments.

mod commands;
mod failure;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Parser)]
#[command(name = "veilkit", version, about = "Veiled-face recognition experiments on VPF-CSV features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate one pipeline and write its report.
    Run(RunArgs),
    /// Cross-validate a grid of layers, PCA levels and classifiers.
    Sweep(SweepArgs),
    /// Check a VPF-CSV file and print its shape and class histograms.
    Validate(ValidateArgs),
    /// Write a synthetic pair of FC6/FC7 files.
    Synth(SynthArgs),
    /// Fit PCA on a whole file and write the projected features.
    Reduce(ReduceArgs),
}

/// Options shared by `run` and `sweep`.
#[derive(Args, Clone)]
struct CommonArgs {
    /// identity, gender, age or smile.
    #[arg(long)]
    task: String,
    /// FC6 features (VPF-CSV).
    #[arg(long)]
    fc6: Option<std::path::PathBuf>,
    /// FC7 features (VPF-CSV).
    #[arg(long)]
    fc7: Option<std::path::PathBuf>,
    /// Where PCA is fitted: fold (training rows only) or global.
    #[arg(long = "pca-scope", default_value = "fold")]
    pca_scope: String,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Classifier hyperparameter override, KEY=VALUE; repeatable. Prefix
    /// the key with a family (knn, nb, rf, mlp) to scope it, e.g. rf.trees=50.
    #[arg(long = "clf-opt", value_name = "KEY=VALUE")]
    clf_opt: Vec<String>,
    /// Fold without regard to class labels.
    #[arg(long)]
    unstratified: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// none, min, max or mean. Merging needs both --fc6 and --fc7.
    #[arg(long, default_value = "none")]
    merge: String,
    /// Retained variance in (0, 1], or none.
    #[arg(long, default_value = "none")]
    pca: String,
    /// 1nn, 3nn, 5nn, nb, rf or mlp.
    #[arg(long)]
    clf: String,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Table rows: any of fc6, fc7, min, max, mean.
    #[arg(long, value_delimiter = ',', default_value = "fc6,fc7,min,max,mean")]
    layers: Vec<String>,
    /// PCA levels per row: retained variance or none.
    #[arg(long = "pca-levels", value_delimiter = ',', default_value = "none,0.99,0.97,0.95")]
    pca_levels: Vec<String>,
    /// Table columns.
    #[arg(long, value_delimiter = ',', default_value = "1nn,3nn,5nn,nb,rf,mlp")]
    clfs: Vec<String>,
    /// Output directory for the tables and per-cell reports.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    path: std::path::PathBuf,
    /// Fail unless every row has this many features.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 150)]
    classes: usize,
    #[arg(long = "per-class", default_value_t = 14)]
    per_class: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 12.0)]
    separation: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    fc6: std::path::PathBuf,
    #[arg(long)]
    fc7: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    input: std::path::PathBuf,
    #[arg(long)]
    pca: f64,
    /// Projected features; the eigenvalue summary goes to `<out>.pca.txt`.
    #[arg(long)]
    out: std::path::PathBuf,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("VEILKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::config(format!("VEILKIT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::runtime(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(failure::CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = configure_threads().and_then(|()| match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Validate(a) => commands::validate(a),
        Command::Synth(a) => commands::synth(a),
        Command::Reduce(a) => commands::reduce(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
