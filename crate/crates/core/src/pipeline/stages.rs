//! Individually runnable stages. Each reads and writes plain files so a run
//! can be resumed or inspected between stages.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accountant::{default_orders, PrivacyLedger};
use crate::assembler::{assemble_graph, count_edges, sequences_to_pairs, symmetrize, AssemblyManifest, ScoreMatrix};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvaluationReport, Provenance};
use crate::graph::{
    largest_connected_component, read_edge_list, split_edges, write_edge_list, Component, EdgeSplit, Graph,
};
use crate::model::{generate_samples, save_checkpoint, Checkpoint, GeneratorState, RngState};
use crate::training::{train, DpConfig, StopReason, TrainOptions, TrainOutcome};

use super::config::ExperimentConfig;

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text)
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Counts reported by ingestion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub input: PathBuf,
    pub nodes: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
    pub lcc_nodes: usize,
    pub lcc_edges: usize,
}

/// Reads an edge list and keeps its largest connected component.
///
/// Writes `lcc.txt`, `node_map.txt` (`new_id original_id` per line) and
/// `ingest.json` into `out`.
pub fn ingest(input: &Path, out: &Path) -> Result<Component> {
    let loaded = read_edge_list(input)?;
    if loaded.self_loops_dropped > 0 || loaded.duplicates_dropped > 0 {
        log::warn!(
            "{}: dropped {} self-loops and {} duplicate edges",
            input.display(),
            loaded.self_loops_dropped,
            loaded.duplicates_dropped
        );
    }
    let lcc = largest_connected_component(&loaded.graph)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_edge_list(&out.join("lcc.txt"), &lcc.graph)?;
    let map: String = lcc
        .original_ids
        .iter()
        .enumerate()
        .map(|(new, old)| format!("{new} {old}\n"))
        .collect();
    write_file(&out.join("node_map.txt"), map)?;
    write_json(
        &out.join("ingest.json"),
        &IngestManifest {
            input: input.to_path_buf(),
            nodes: loaded.graph.num_nodes(),
            edges: loaded.graph.num_edges(),
            self_loops_dropped: loaded.self_loops_dropped,
            duplicates_dropped: loaded.duplicates_dropped,
            lcc_nodes: lcc.graph.num_nodes(),
            lcc_edges: lcc.graph.num_edges(),
        },
    )?;
    Ok(lcc)
}

/// Splits `graph` and saves the split under `out`.
pub fn split(graph: &Graph, fraction: f64, seed: u64, out: &Path) -> Result<EdgeSplit> {
    let s = split_edges(graph, fraction, seed)?;
    s.save(out)?;
    Ok(s)
}

/// Privacy bookkeeping and checkpoint choice for a finished training run.
/// `(sampling_rate, noise_scale, steps, orders)` determine `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub best_checkpoint: usize,
    pub best_checkpoint_file: String,
    pub stop_reason: StopReason,
    pub dp_enabled: bool,
    pub sampling_rate: f64,
    pub noise_scale: f64,
    /// Critic steps, each one accountant step.
    pub steps: u64,
    pub orders: Vec<u32>,
    pub target_delta: f64,
    #[serde(with = "crate::serde_ext::real")]
    pub epsilon: f64,
    pub critic_steps: u64,
    pub generator_steps: u64,
    pub seed: u64,
}

impl TrainManifest {
    /// ε at `target_delta` recomputed from the stored accountant inputs.
    pub fn recompute_epsilon(&self) -> f64 {
        if !self.dp_enabled {
            return f64::INFINITY;
        }
        PrivacyLedger::recompute(self.sampling_rate, self.noise_scale, self.steps, self.orders.clone())
            .epsilon_for_delta(self.target_delta)
    }
}

fn checkpoint_file(index: usize) -> String {
    format!("checkpoints/checkpoint-{index:04}.bin")
}

/// Trains and writes every checkpoint, `history.jsonl`, `best.bin` and
/// `train.json` into `out`.
pub fn train_stage(
    split: &EdgeSplit,
    cfg: &ExperimentConfig,
    seed: u64,
    out: &Path,
) -> Result<(TrainOutcome, TrainManifest)> {
    let mut model = cfg.model.clone();
    model.num_nodes = split.train.num_nodes();
    let options = TrainOptions {
        mode: cfg.mode,
        checkpoint_sample_volume: cfg.checkpoint_sample_volume,
        seed,
    };
    let checkpoints = out.join("checkpoints");
    fs::create_dir_all(&checkpoints).map_err(|e| Error::io(&checkpoints, e))?;
    let outcome = train(split, &model, &cfg.gan, &cfg.dp, &options, |rec, state| {
        let ckpt = Checkpoint {
            generator: state.generator.clone(),
            discriminator: Some(state.discriminator.clone()),
            global_step: state.critic_steps,
            rng: Some(RngState {
                seed,
                critic_steps: state.critic_steps,
                generator_steps: state.generator_steps,
            }),
        };
        save_checkpoint(&out.join(checkpoint_file(rec.index)), &ckpt)
    })?;
    write_file(&out.join("history.jsonl"), outcome.history.to_json_lines()?)?;
    let best = Checkpoint {
        generator: outcome.generator.clone(),
        discriminator: Some(outcome.discriminator.clone()),
        global_step: outcome.history.checkpoints[outcome.best_checkpoint].critic_steps,
        rng: None,
    };
    save_checkpoint(&out.join("best.bin"), &best)?;
    let manifest = train_manifest(&outcome, &cfg.dp, seed);
    write_json(&out.join("train.json"), &manifest)?;
    Ok((outcome, manifest))
}

fn train_manifest(outcome: &TrainOutcome, dp: &DpConfig, seed: u64) -> TrainManifest {
    let ledger = &outcome.ledger;
    TrainManifest {
        best_checkpoint: outcome.best_checkpoint,
        best_checkpoint_file: checkpoint_file(outcome.best_checkpoint),
        stop_reason: outcome.stop_reason,
        dp_enabled: dp.enabled,
        sampling_rate: ledger.sampling_rate(),
        noise_scale: ledger.noise_scale(),
        steps: ledger.steps(),
        orders: if ledger.orders().is_empty() {
            default_orders()
        } else {
            ledger.orders().to_vec()
        },
        target_delta: dp.target_delta,
        epsilon: dp.epsilon(ledger),
        critic_steps: outcome.critic_steps,
        generator_steps: outcome.generator_steps,
        seed,
    }
}

/// Writes one sample per line as space-separated node ids.
pub fn format_samples(samples: &[Vec<usize>]) -> String {
    let mut out = String::with_capacity(samples.len() * 12);
    for s in samples {
        let line: Vec<String> = s.iter().map(|id| id.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_samples(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.split_whitespace()
                .map(|t| {
                    t.parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("`{t}` is not a node id"),
                    })
                })
                .collect()
        })
        .collect()
}

/// Draws `count` sequences and writes them to `path`.
pub fn generate(gen: &GeneratorState, count: usize, seed: u64, path: &Path) -> Result<Vec<Vec<usize>>> {
    if count == 0 {
        return Err(Error::InvalidArgument("no samples: count must be at least 1".into()));
    }
    let samples = generate_samples(gen, count, seed)?;
    write_file(path, format_samples(&samples))?;
    Ok(samples)
}

/// Counts, symmetrizes and assembles a graph with `target_edges` edges.
/// Writes `generated.txt` and `assembly.json` into `out`.
pub fn assemble(
    samples: &[Vec<usize>],
    num_nodes: usize,
    target_edges: usize,
    seed: u64,
    out: &Path,
) -> Result<(Graph, ScoreMatrix, AssemblyManifest)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to assemble".into()));
    }
    let counts = count_edges(&sequences_to_pairs(samples), num_nodes)?;
    let sm = symmetrize(&counts);
    let assembly = assemble_graph(&sm, target_edges, seed)?;
    let manifest = assembly.manifest(samples.len());
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    if manifest.dropped_self_pairs > 0 {
        log::info!("dropped {} generated self-pairs", manifest.dropped_self_pairs);
    }
    write_edge_list(&out.join("generated.txt"), &assembly.graph)?;
    write_json(&out.join("assembly.json"), &manifest)?;
    Ok((assembly.graph, sm, manifest))
}

/// Evaluates and writes `report.json` and `report.csv` into `out`.
pub fn evaluate_stage(
    generated: &Graph,
    original: &Graph,
    scores: &ScoreMatrix,
    split: &EdgeSplit,
    epsilon: f64,
    provenance: Provenance,
    out: &Path,
) -> Result<EvaluationReport> {
    let report = evaluate(generated, original, scores, split, epsilon, provenance)?;
    write_json(&out.join("report.json"), &report)?;
    write_file(
        &out.join("report.csv"),
        format!("{}\n{}\n", EvaluationReport::csv_header(), report.csv_row()),
    )?;
    Ok(report)
}
