//! Command-line front end. Exit status: 0 success, 2 configuration error,
//! 3 stage failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dp_graphgen::assembler::AssemblyManifest;
use dp_graphgen::graph::read_edge_list;
use dp_graphgen::model::load_checkpoint;
use dp_graphgen::pipeline::{
    account, assemble, generate, parse_samples, run_baseline, run_sweep, save_json, seed_tags, ExperimentConfig, Run,
    TrainManifest, CONFIG_FILE, LCC_FILE, SAMPLES_FILE,
};
use dp_graphgen::rng::derive_seed;
use dp_graphgen::{Error, Result};

#[derive(Parser)]
#[command(name = "dp-graphgen", version, about = "Edge-private synthetic graph generation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config. Stage commands fall back to `<out>/config.toml`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory. Defaults to `$DP_GRAPHGEN_OUT/run-<config hash>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Read an edge list and keep its largest connected component.
    Ingest {
        /// Edge list; overrides the config's `dataset`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Hold out validation edges and matched non-edges.
    Split,
    /// Train the generator and critic.
    Train,
    /// Sample sequences from the best checkpoint.
    Generate {
        /// Checkpoint to sample from instead of the run's best.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Number of sequences; defaults to the config's `sample_volume`.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Assemble a graph from the generated samples.
    Assemble {
        /// Sample file to read instead of the run's `samples.txt`.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Edge count of the assembled graph; defaults to the ingested graph's.
        #[arg(long)]
        target_edges: Option<usize>,
        /// Node count; defaults to the ingested graph's, else 1 + the largest sampled id.
        #[arg(long)]
        num_nodes: Option<usize>,
    },
    /// Compute statistics and link prediction scores.
    Evaluate,
    /// Privacy loss for (q, sigma, steps), or recomputed from a training manifest.
    Account {
        /// A run's `train/train.json`.
        #[arg(long, conflicts_with_all = ["q", "sigma", "steps"])]
        manifest: Option<PathBuf>,
        /// Sampling rate per step.
        #[arg(long, requires_all = ["sigma", "steps"])]
        q: Option<f64>,
        /// Noise multiplier.
        #[arg(long)]
        sigma: Option<f64>,
        /// Number of private critic steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Target δ for the reported ε.
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
    },
    /// Every stage in order.
    Run {
        /// Non-private random-walk baseline instead of the configured run.
        #[arg(long)]
        baseline: bool,
    },
    /// Private runs over the config's sigma and clip grids.
    Sweep {
        /// Skip grid cells that already finished.
        #[arg(long)]
        resume: bool,
    },
}

fn load_config(common: &Common, input: Option<&Path>) -> Result<ExperimentConfig> {
    let fallback = common.out.as_ref().map(|o| o.join(CONFIG_FILE)).filter(|p| p.exists());
    let mut cfg = match common.config.as_ref().or(fallback.as_ref()) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(input) = input {
        cfg.dataset = input.to_path_buf();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg.resolved())
}

fn open_run(common: &Common, input: Option<&Path>) -> Result<Run> {
    let run = Run::new(load_config(common, input)?)?;
    if !run.path(CONFIG_FILE).exists() {
        run.write_config()?;
    }
    Ok(run)
}

/// Output directory for stage commands that may run without a config.
fn out_dir(common: &Common) -> Result<PathBuf> {
    match &common.out {
        Some(out) => Ok(out.clone()),
        None => Ok(load_config(common, None)?.run_dir()),
    }
}

fn generate_standalone(common: &Common, checkpoint: Option<PathBuf>, count: Option<usize>) -> Result<Vec<Vec<usize>>> {
    let cfg = load_config(common, None)?;
    let dir = out_dir(common)?;
    let checkpoint = checkpoint.unwrap_or_else(|| dir.join("train").join("best.bin"));
    let generator = load_checkpoint(&checkpoint)?.generator;
    let seed = derive_seed(cfg.seed, seed_tags::GENERATE);
    generate(
        &generator,
        count.unwrap_or(cfg.sample_volume),
        seed,
        &dir.join(SAMPLES_FILE),
    )
}

fn assemble_standalone(
    common: &Common,
    samples: Option<PathBuf>,
    target_edges: Option<usize>,
    num_nodes: Option<usize>,
) -> Result<AssemblyManifest> {
    let cfg = load_config(common, None)?;
    let dir = out_dir(common)?;
    let path = samples.unwrap_or_else(|| dir.join(SAMPLES_FILE));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let samples = parse_samples(&text)?;
    let lcc_path = dir.join(LCC_FILE);
    let lcc = if lcc_path.exists() {
        Some(read_edge_list(&lcc_path)?.graph)
    } else {
        None
    };
    let n = match (num_nodes, &lcc) {
        (Some(n), _) => n,
        (None, Some(g)) => g.num_nodes(),
        (None, None) => samples.iter().flatten().max().map_or(0, |m| m + 1),
    };
    let target = match (target_edges, &lcc) {
        (Some(t), _) => t,
        (None, Some(g)) => g.num_edges(),
        (None, None) => {
            return Err(Error::InvalidArgument(
                "--target-edges is required without an ingested graph".into(),
            ))
        }
    };
    let seed = derive_seed(cfg.seed, seed_tags::ASSEMBLE);
    Ok(assemble(&samples, n, target, seed, &dir)?.2)
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Ingest { input } => {
            let run = open_run(common, input.as_deref())?;
            let g = run.ingest().map_err(|e| e.in_stage("ingest"))?;
            println!(
                "{}: {} nodes, {} edges",
                run.dir.display(),
                g.num_nodes(),
                g.num_edges()
            );
        }
        Command::Split => {
            let s = open_run(common, None)?.split().map_err(|e| e.in_stage("split"))?;
            print_json(&s.manifest())?;
        }
        Command::Train => {
            let m = open_run(common, None)?.train().map_err(|e| e.in_stage("train"))?;
            print_json(&m)?;
        }
        Command::Generate { checkpoint, count } => {
            let samples = if checkpoint.is_none() && count.is_none() {
                open_run(common, None)?.generate()
            } else {
                generate_standalone(common, checkpoint, count)
            }
            .map_err(|e| e.in_stage("generate"))?;
            println!("{} samples written", samples.len());
        }
        Command::Assemble {
            samples,
            target_edges,
            num_nodes,
        } => {
            let m = if samples.is_none() && target_edges.is_none() && num_nodes.is_none() {
                open_run(common, None)?.assemble()
            } else {
                assemble_standalone(common, samples, target_edges, num_nodes)
            }
            .map_err(|e| e.in_stage("assemble"))?;
            print_json(&m)?;
        }
        Command::Evaluate => {
            let r = open_run(common, None)?.evaluate().map_err(|e| e.in_stage("evaluate"))?;
            print_json(&r)?;
        }
        Command::Account {
            manifest,
            q,
            sigma,
            steps,
            delta,
        } => {
            let result = match (manifest, q, sigma, steps) {
                (Some(path), ..) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    let m: TrainManifest = serde_json::from_str(&text)?;
                    account(m.sampling_rate, m.noise_scale, m.steps, m.target_delta)?
                }
                (None, Some(q), Some(sigma), Some(steps)) => account(q, sigma, steps, delta)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "give --manifest or all of --q, --sigma and --steps".into(),
                    ))
                }
            };
            print_json(&result)?;
        }
        Command::Run { baseline } => {
            let cfg = load_config(common, None)?;
            let summary = if baseline {
                run_baseline(&cfg)?
            } else {
                Run::new(cfg)?.run()?
            };
            print_json(&summary.report)?;
        }
        Command::Sweep { resume } => {
            let cfg = load_config(common, None)?;
            let root = cfg.run_dir();
            let rows = run_sweep(&cfg, &root, resume)?;
            let failed = rows.iter().filter(|r| r.result.is_err()).count();
            save_json(
                &root.join("sweep_summary.json"),
                &serde_json::json!({ "cells": rows.len(), "failed": failed }),
            )?;
            println!(
                "{} cells, {} failed; see {}",
                rows.len(),
                failed,
                root.join("sweep.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
