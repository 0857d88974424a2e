mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand};
use rtmix::diagnostics::stability_report;
use rtmix::experiments::{initial_data, run_ensemble, run_seed, ExperimentResult, PRESET_NAMES};
use rtmix::{ExperimentConfig, PeriodicGrid, Spectral};

use output::{Format, Manifest, RunSummary, Writer};

const OUT_ENV: &str = "RTMIX_OUT";

#[derive(Parser)]
#[command(
    name = "rtmix",
    version,
    about = "h-model and z-model interface simulations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Config file path or preset name.
    config: String,
    /// Override a config entry, e.g. `visc.epsilon=0.008`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory (default: $RTMIX_OUT/<name> or results/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for random initial data (default: first seed of the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every seed of an experiment and aggregate widths and amplitudes.
    Ensemble {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed range `a..b` (half open) or comma list; replaces the config's seeds.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Print the stability report of the initial data.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List presets, or export them as config files.
    Presets {
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
    },
}

/// Exit 1: bad input. Exit 2: the model failed at run time.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse()?;
        let b: u64 = b.trim().parse()?;
        (a..b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        bail!("seed list `{spec}` is empty");
    }
    Ok(seeds)
}

fn out_dir(out: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    out.unwrap_or_else(|| {
        let base =
            std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
        base.join(&cfg.name)
    })
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn runtime_failure(runs: &[&ExperimentResult]) -> Option<String> {
    runs.iter()
        .find(|r| r.status.is_failure() || matches!(r.status, rtmix::RunStatus::Degeneracy { .. }))
        .map(|r| format!("seed {}: {:?}", r.seed, r.status))
}

fn finish(
    root: &Path,
    cfg: &ExperimentConfig,
    started: Instant,
    runs: &[&ExperimentResult],
    w: Writer,
) -> Result<(), Failure> {
    let cmd = command_line();
    let manifest = Manifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        command: &cmd,
        config: cfg,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        runs: runs.iter().map(|r| RunSummary::of(r)).collect(),
        files: w.into_files(),
    };
    output::write_manifest(root, &manifest)?;
    for r in runs {
        eprintln!(
            "seed {}: {} at t = {} ({} steps)",
            r.seed,
            r.status.label(),
            r.last_time(),
            r.stats.accepted
        );
    }
    eprintln!("wrote {}", root.display());
    match runtime_failure(runs) {
        Some(msg) => Err(Failure::Runtime(anyhow!(msg))),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Run { common, out, seed } => {
            let cfg = config::load(&common.config, &common.overrides).map_err(Failure::Config)?;
            let started = Instant::now();
            let seed = seed.unwrap_or(cfg.seeds[0]);
            let res = run_seed(&cfg, seed).map_err(|e| Failure::Config(e.into()))?;
            let root = out_dir(out, &cfg);
            let mut w = Writer::new(&root)?;
            output::write_run(&mut w, "", &res, common.format)?;
            finish(&root, &cfg, started, &[&res], w)
        }
        Cmd::Ensemble { common, out, seeds } => {
            let mut cfg =
                config::load(&common.config, &common.overrides).map_err(Failure::Config)?;
            if let Some(spec) = seeds {
                cfg.seeds = parse_seeds(&spec).map_err(Failure::Config)?;
            }
            let started = Instant::now();
            let ens = run_ensemble(&cfg).map_err(|e| Failure::Config(e.into()))?;
            let root = out_dir(out, &cfg);
            let mut w = Writer::new(&root)?;
            for r in &ens.runs {
                output::write_run(&mut w, &format!("seed_{}/", r.seed), r, common.format)?;
            }
            match common.format {
                Format::Csv => w.write("aggregate.csv", &output::aggregate_csv(&ens.aggregate))?,
                Format::Json => w.write(
                    "aggregate.json",
                    &serde_json::to_string_pretty(&ens.aggregate).map_err(anyhow::Error::from)?,
                )?,
            }
            let runs: Vec<&ExperimentResult> = ens.runs.iter().collect();
            finish(&root, &cfg, started, &runs, w)
        }
        Cmd::Check { common, seed } => {
            let cfg = config::load(&common.config, &common.overrides).map_err(Failure::Config)?;
            let grid = PeriodicGrid::new(cfg.grid_n).map_err(|e| Failure::Config(e.into()))?;
            let sp = Spectral::new(grid);
            let data = initial_data(&cfg, &sp, seed.unwrap_or(cfg.seeds[0]))
                .map_err(|e| Failure::Config(e.into()))?;
            let (h0, h1) = data.height_pair(&sp).ok_or_else(|| {
                Failure::Config(anyhow!("`check` needs height-model initial data"))
            })?;
            let report = stability_report(&sp, &h0, &h1, &cfg.phys);
            match common.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?
                ),
                Format::Csv => {
                    println!("lambda_min = {}", report.lambda_min);
                    println!("stable = {}", report.is_stable);
                    println!("smallness_lhs = {}", report.smallness_lhs);
                    println!("smallness_rhs = {}", report.smallness_rhs);
                    println!("satisfies_thm2 = {}", report.satisfies_thm2);
                }
            }
            Ok(())
        }
        Cmd::Presets { export } => {
            match export {
                None => PRESET_NAMES.iter().for_each(|n| println!("{n}")),
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(anyhow::Error::from)?;
                    for n in PRESET_NAMES {
                        let cfg = rtmix::preset(n).map_err(anyhow::Error::from)?;
                        std::fs::write(dir.join(format!("{n}.toml")), cfg.to_toml_string())
                            .map_err(anyhow::Error::from)?;
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
