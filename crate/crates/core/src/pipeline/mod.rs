//! File-backed pipeline: ingest, split, train, generate, assemble and
//! evaluate, each runnable alone against a run directory, plus full runs,
//! σ × C sweeps and the random-walk baseline.

mod config;
mod stages;

pub use config::{default_output_root, ExperimentConfig, SweepConfig, OUTPUT_ENV};
pub use stages::{
    assemble, evaluate_stage, format_samples, generate, ingest, parse_samples, split, train_stage, IngestManifest,
    TrainManifest,
};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accountant::{default_orders, PrivacyLedger};
use crate::assembler::{count_edges, sequences_to_pairs, symmetrize, AssemblyManifest};
use crate::error::{Error, Result};
use crate::evaluation::{definition_notes, EvaluationReport, Provenance};
use crate::graph::{read_edge_list, EdgeSplit, Graph};
use crate::model::{load_checkpoint, GeneratorState};
use crate::rng::derive_seed;
use crate::training::{DpConfig, Mode};
use stages::{read_json, write_file, write_json};

/// Sub-seed tags; each stage draws from `derive_seed(config.seed, tag)`.
pub mod seed_tags {
    pub const SPLIT: u64 = 1;
    pub const TRAIN: u64 = 2;
    pub const GENERATE: u64 = 3;
    pub const ASSEMBLE: u64 = 4;
}

pub const CONFIG_FILE: &str = "config.toml";
pub const FAILED_FILE: &str = "FAILED";
pub const LCC_FILE: &str = "lcc.txt";
pub const SPLIT_DIR: &str = "split";
pub const TRAIN_DIR: &str = "train";
pub const SAMPLES_FILE: &str = "samples.txt";
pub const GENERATED_FILE: &str = "generated.txt";
pub const REPORT_FILE: &str = "report.json";

/// A configuration bound to the directory its artifacts live in.
#[derive(Clone, Debug)]
pub struct Run {
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    /// Overrides the provenance label, e.g. `"baseline"`.
    pub label: Option<String>,
}

/// Everything a finished run produced.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub report: EvaluationReport,
    pub train: TrainManifest,
    pub assembly: AssemblyManifest,
}

impl Run {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let config = config.resolved();
        config.validate()?;
        let dir = config.run_dir();
        Ok(Run {
            config,
            dir,
            label: None,
        })
    }

    pub fn with_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dir = dir.into();
        self
    }

    pub fn seed(&self, tag: u64) -> u64 {
        derive_seed(self.config.seed, tag)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_config(&self) -> Result<()> {
        write_file(&self.path(CONFIG_FILE), self.config.to_toml())
    }

    pub fn ingest(&self) -> Result<Graph> {
        Ok(ingest(&self.config.dataset, &self.dir)?.graph)
    }

    pub fn lcc(&self) -> Result<Graph> {
        Ok(read_edge_list(&self.path(LCC_FILE))?.graph)
    }

    pub fn split(&self) -> Result<EdgeSplit> {
        let lcc = self.lcc()?;
        split(
            &lcc,
            self.config.validation_fraction,
            self.seed(seed_tags::SPLIT),
            &self.path(SPLIT_DIR),
        )
    }

    pub fn load_split(&self) -> Result<EdgeSplit> {
        EdgeSplit::load(&self.path(SPLIT_DIR))
    }

    pub fn train(&self) -> Result<TrainManifest> {
        let s = self.load_split()?;
        let (_, manifest) = train_stage(&s, &self.config, self.seed(seed_tags::TRAIN), &self.path(TRAIN_DIR))?;
        Ok(manifest)
    }

    pub fn train_manifest(&self) -> Result<TrainManifest> {
        read_json(&self.path(TRAIN_DIR).join("train.json"))
    }

    pub fn best_generator(&self) -> Result<GeneratorState> {
        Ok(load_checkpoint(&self.path(TRAIN_DIR).join("best.bin"))?.generator)
    }

    pub fn generate(&self) -> Result<Vec<Vec<usize>>> {
        generate(
            &self.best_generator()?,
            self.config.sample_volume,
            self.seed(seed_tags::GENERATE),
            &self.path(SAMPLES_FILE),
        )
    }

    pub fn load_samples(&self) -> Result<Vec<Vec<usize>>> {
        let path = self.path(SAMPLES_FILE);
        parse_samples(&fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?)
    }

    /// Assembles to the edge count of the ingested component.
    pub fn assemble(&self) -> Result<AssemblyManifest> {
        let lcc = self.lcc()?;
        let samples = self.load_samples()?;
        let (_, _, manifest) = assemble(
            &samples,
            lcc.num_nodes(),
            lcc.num_edges(),
            self.seed(seed_tags::ASSEMBLE),
            &self.dir,
        )?;
        Ok(manifest)
    }

    pub fn provenance(&self) -> Provenance {
        let label = self.label.clone().unwrap_or_else(|| {
            if self.config.dp.enabled {
                "private"
            } else {
                "non-private"
            }
            .to_string()
        });
        Provenance {
            config_hash: self.config.hash(),
            seed: self.config.seed,
            label,
            notes: definition_notes(),
        }
    }

    pub fn evaluate(&self) -> Result<EvaluationReport> {
        let lcc = self.lcc()?;
        let s = self.load_split()?;
        let generated = read_edge_list(&self.path(GENERATED_FILE))?.graph;
        let samples = self.load_samples()?;
        let sm = symmetrize(&count_edges(&sequences_to_pairs(&samples), lcc.num_nodes())?);
        let epsilon = self.train_manifest()?.recompute_epsilon();
        evaluate_stage(&generated, &lcc, &sm, &s, epsilon, self.provenance(), &self.dir)
    }

    /// All stages in order. On failure a `FAILED` file names the stage and
    /// error; a successful rerun removes it.
    pub fn run(&self) -> Result<RunSummary> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let failed = self.path(FAILED_FILE);
        if failed.exists() {
            fs::remove_file(&failed).map_err(|e| Error::io(&failed, e))?;
        }
        self.write_config()?;
        let result = self.run_stages();
        if let Err(e) = &result {
            write_file(&failed, format!("{e}\n"))?;
        }
        result
    }

    fn run_stages(&self) -> Result<RunSummary> {
        log::info!("run directory {}", self.dir.display());
        self.ingest().map_err(|e| e.in_stage("ingest"))?;
        self.split().map_err(|e| e.in_stage("split"))?;
        let train = self.train().map_err(|e| e.in_stage("train"))?;
        log::info!(
            "training stopped ({}) after {} critic steps",
            train.stop_reason,
            train.critic_steps
        );
        self.generate().map_err(|e| e.in_stage("generate"))?;
        let assembly = self.assemble().map_err(|e| e.in_stage("assemble"))?;
        let report = self.evaluate().map_err(|e| e.in_stage("evaluate"))?;
        Ok(RunSummary {
            dir: self.dir.clone(),
            report,
            train,
            assembly,
        })
    }
}

/// Runs the full pipeline for `config` in its run directory.
pub fn run_pipeline(config: ExperimentConfig) -> Result<RunSummary> {
    Run::new(config)?.run()
}

/// The non-private random-walk baseline for `config`'s dataset.
pub fn baseline_config(config: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        mode: Mode::Walk,
        dp: DpConfig {
            enabled: false,
            ..config.dp.clone()
        },
        ..config.clone()
    }
    .resolved()
}

pub fn run_baseline(config: &ExperimentConfig) -> Result<RunSummary> {
    let mut run = Run::new(baseline_config(config))?;
    run.label = Some("baseline".into());
    run.run()
}

/// One sweep cell's outcome.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub noise_scale: f64,
    pub clip_bound: f64,
    pub dir: PathBuf,
    pub result: std::result::Result<EvaluationReport, String>,
}

impl SweepRow {
    fn csv(&self) -> String {
        let (status, rest) = match &self.result {
            Ok(r) => ("ok".to_string(), r.csv_row()),
            Err(e) => (
                format!("failed: {}", e.replace([',', '\n'], ";")),
                vec![""; EvaluationReport::csv_header().split(',').count()].join(","),
            ),
        };
        format!("{},{},{},{}", self.noise_scale, self.clip_bound, status, rest)
    }
}

pub fn sweep_row_dir(root: &Path, sigma: f64, clip: f64) -> PathBuf {
    root.join(format!("sigma-{sigma}_clip-{clip}"))
}

/// Runs private training over every `(σ, C)` in the config's grids. Each
/// cell gets its own directory under `root`. A failing cell is recorded and
/// the sweep continues. With `resume`, cells that already hold a report
/// and no `FAILED` marker are read back instead of rerun. Writes
/// `sweep.csv` into `root`.
pub fn run_sweep(base: &ExperimentConfig, root: &Path, resume: bool) -> Result<Vec<SweepRow>> {
    let base = base.clone().resolved();
    base.validate()?;
    if base.sweep.sigma_grid.is_empty() || base.sweep.clip_grid.is_empty() {
        return Err(Error::Config("sweep grids must be non-empty".into()));
    }
    let mut rows = Vec::new();
    for &sigma in &base.sweep.sigma_grid {
        for &clip in &base.sweep.clip_grid {
            let dir = sweep_row_dir(root, sigma, clip);
            let mut cfg = base.clone();
            cfg.dp.enabled = true;
            cfg.dp.noise_scale = sigma;
            cfg.dp.clip_bound = clip;
            cfg.output_dir = Some(dir.clone());
            let report = dir.join(REPORT_FILE);
            let result = if resume && report.exists() && !dir.join(FAILED_FILE).exists() {
                log::info!("resuming: {} already done", dir.display());
                read_json::<EvaluationReport>(&report).map_err(|e| e.to_string())
            } else {
                Run::new(cfg)
                    .and_then(|r| r.run())
                    .map(|s| s.report)
                    .map_err(|e| e.to_string())
            };
            if let Err(e) = &result {
                log::warn!("sweep cell sigma={sigma} clip={clip} failed: {e}");
            }
            rows.push(SweepRow {
                noise_scale: sigma,
                clip_bound: clip,
                dir,
                result,
            });
        }
    }
    let mut csv = format!("noise_scale,clip_bound,status,{}\n", EvaluationReport::csv_header());
    for row in &rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    write_file(&root.join("sweep.csv"), csv)?;
    Ok(rows)
}

/// A privacy-loss query answered from `(q, σ, T)` alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub sampling_rate: f64,
    pub noise_scale: f64,
    pub steps: u64,
    pub delta: f64,
    #[serde(with = "crate::serde_ext::real")]
    pub epsilon: f64,
    /// Moment order attaining the bound.
    pub order: Option<u32>,
}

pub fn account(sampling_rate: f64, noise_scale: f64, steps: u64, delta: f64) -> Result<Accounting> {
    if !(0.0..=1.0).contains(&sampling_rate) {
        return Err(Error::InvalidArgument(format!(
            "sampling rate must lie in [0, 1], got {sampling_rate}"
        )));
    }
    if !(noise_scale >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise scale must be nonnegative, got {noise_scale}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let ledger = PrivacyLedger::recompute(sampling_rate, noise_scale, steps, default_orders());
    let (epsilon, order) = ledger.epsilon_with_order(delta);
    Ok(Accounting {
        sampling_rate,
        noise_scale,
        steps,
        delta,
        epsilon,
        order,
    })
}

/// Writes `value` as pretty JSON; shared with the command-line front end.
pub fn save_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_json(path, value)
}
