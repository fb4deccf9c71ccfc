use std::fs;
use std::path::Path;

use dp_graphgen::evaluation::EvaluationReport;
use dp_graphgen::graph::{largest_connected_component, stochastic_block_model, write_edge_list, Graph};
use dp_graphgen::model::ModelConfig;
use dp_graphgen::pipeline::{
    account, baseline_config, run_baseline, run_pipeline, run_sweep, ExperimentConfig, Run, TrainManifest, FAILED_FILE,
};
use dp_graphgen::training::{AdamConfig, DpConfig, GanConfig, Mode};
use tempfile::TempDir;

fn toy_dataset(dir: &Path) -> std::path::PathBuf {
    let g = stochastic_block_model(&[15, 15], 0.4, 0.05, 3).unwrap();
    let g = largest_connected_component(&g).unwrap().graph;
    let path = dir.join("toy.txt");
    write_edge_list(&path, &g).unwrap();
    path
}

fn toy_config(dir: &Path, out: &str) -> ExperimentConfig {
    ExperimentConfig {
        dataset: toy_dataset(dir),
        sample_volume: 3000,
        checkpoint_sample_volume: 500,
        seed: 11,
        output_dir: Some(dir.join(out)),
        model: ModelConfig {
            noise_dim: 4,
            hidden_dim: 8,
            down_projection_dim: 8,
            ..Default::default()
        },
        gan: GanConfig {
            batch_size: 16,
            checkpoint_epochs: 2,
            patience: 100,
            max_epochs: 4,
            adam: AdamConfig {
                learning_rate: 5e-3,
                ..Default::default()
            },
            ..Default::default()
        },
        dp: DpConfig::disabled(),
        ..Default::default()
    }
    .resolved()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn full_run_writes_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let summary = run_pipeline(toy_config(tmp.path(), "run")).unwrap();
    let dir = &summary.dir;
    for name in [
        "config.toml",
        "lcc.txt",
        "node_map.txt",
        "ingest.json",
        "split/split.json",
        "train/history.jsonl",
        "train/best.bin",
        "train/train.json",
        "train/checkpoints/checkpoint-0000.bin",
        "samples.txt",
        "generated.txt",
        "assembly.json",
        "report.json",
        "report.csv",
    ] {
        assert!(dir.join(name).exists(), "missing {name}");
    }
    assert!(!dir.join(FAILED_FILE).exists());
    let report = &summary.report;
    assert_eq!(report.epsilon_at_eval, f64::INFINITY);
    assert_eq!(report.provenance.label, "non-private");
    let lcc = dp_graphgen::graph::read_edge_list(&dir.join("lcc.txt")).unwrap().graph;
    assert_eq!(report.num_edges, lcc.num_edges());
    let json = read(&dir.join("report.json"));
    assert!(json.contains("\"epsilon_at_eval\": \"inf\""), "{json}");
    let echoed = ExperimentConfig::from_toml(&read(&dir.join("config.toml"))).unwrap();
    assert_eq!(echoed.hash(), report.provenance.config_hash);
}

#[test]
fn identical_configs_give_identical_reports() {
    let tmp = TempDir::new().unwrap();
    let a = run_pipeline(toy_config(tmp.path(), "a")).unwrap();
    let b = run_pipeline(toy_config(tmp.path(), "b")).unwrap();
    for name in [
        "report.json",
        "samples.txt",
        "generated.txt",
        "train/train.json",
        "split/train.txt",
    ] {
        assert_eq!(read(&a.dir.join(name)), read(&b.dir.join(name)), "{name} differs");
    }
    let mut other = toy_config(tmp.path(), "c");
    other.seed = 12;
    let c = run_pipeline(other).unwrap();
    assert_ne!(read(&a.dir.join("samples.txt")), read(&c.dir.join("samples.txt")));
}

#[test]
fn stages_rerun_from_the_echoed_config() {
    let tmp = TempDir::new().unwrap();
    let first = run_pipeline(toy_config(tmp.path(), "run")).unwrap();
    let cfg = ExperimentConfig::load(&first.dir.join("config.toml")).unwrap();
    let replay = Run::new(ExperimentConfig {
        output_dir: Some(tmp.path().join("replay")),
        ..cfg
    })
    .unwrap();
    replay.ingest().unwrap();
    replay.split().unwrap();
    replay.train().unwrap();
    replay.generate().unwrap();
    replay.assemble().unwrap();
    replay.evaluate().unwrap();
    for name in ["lcc.txt", "samples.txt", "generated.txt", "report.json"] {
        assert_eq!(
            read(&first.dir.join(name)),
            read(&replay.dir.join(name)),
            "{name} differs"
        );
    }
}

#[test]
fn private_report_matches_recomputed_epsilon() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = toy_config(tmp.path(), "private");
    cfg.dp = DpConfig {
        noise_scale: 1.1,
        clip_bound: 0.5,
        ..Default::default()
    };
    let summary = run_pipeline(cfg).unwrap();
    let manifest: TrainManifest = serde_json::from_str(&read(&summary.dir.join("train/train.json"))).unwrap();
    let eps = manifest.recompute_epsilon();
    assert!(eps.is_finite());
    assert!((summary.report.epsilon_at_eval - eps).abs() <= 1e-9);
    assert!((manifest.epsilon - eps).abs() <= 1e-9);
    let direct = account(
        manifest.sampling_rate,
        manifest.noise_scale,
        manifest.steps,
        manifest.target_delta,
    )
    .unwrap();
    assert!((direct.epsilon - eps).abs() <= 1e-9);
    assert_eq!(summary.report.provenance.label, "private");
}

#[test]
fn zero_samples_is_rejected_before_any_stage() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = toy_config(tmp.path(), "none");
    cfg.sample_volume = 0;
    let err = run_pipeline(cfg).unwrap_err();
    assert!(err.is_config());
    assert!(err.to_string().contains("no samples"));
    assert!(!tmp.path().join("none").exists());
}

#[test]
fn failure_leaves_a_marker_that_a_good_rerun_clears() {
    let tmp = TempDir::new().unwrap();
    let good = toy_config(tmp.path(), "run");
    let bad = ExperimentConfig {
        dataset: tmp.path().join("missing.txt"),
        ..good.clone()
    };
    let err = run_pipeline(bad).unwrap_err();
    assert!(err.to_string().contains("ingest"), "{err}");
    let marker = read(&tmp.path().join("run").join(FAILED_FILE));
    assert!(marker.contains("ingest"));
    assert!(tmp.path().join("run/config.toml").exists());
    run_pipeline(good).unwrap();
    assert!(!tmp.path().join("run").join(FAILED_FILE).exists());
}

#[test]
fn sweep_rows_order_by_noise_and_resume_skips_finished_cells() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = toy_config(tmp.path(), "sweep");
    cfg.gan.max_epochs = 2;
    cfg.sweep.sigma_grid = vec![0.8, 1.6];
    cfg.sweep.clip_grid = vec![0.1, 1.0];
    let root = tmp.path().join("sweep");
    let rows = run_sweep(&cfg, &root, false).unwrap();
    assert_eq!(rows.len(), 4);
    let eps = |sigma: f64, clip: f64| {
        let row = rows
            .iter()
            .find(|r| r.noise_scale == sigma && r.clip_bound == clip)
            .unwrap();
        row.result.as_ref().unwrap().epsilon_at_eval
    };
    for clip in [0.1, 1.0] {
        assert!(eps(0.8, clip) > eps(1.6, clip));
    }
    let csv = read(&root.join("sweep.csv"));
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("noise_scale,clip_bound,status,"));

    let report = root.join("sigma-0.8_clip-0.1/report.json");
    fs::write(&report, read(&report).replace("\"max_degree\"", "\"max_degree\" ")).unwrap();
    let before = read(&report);
    let again = run_sweep(&cfg, &root, true).unwrap();
    assert_eq!(read(&report), before, "resumed cell was rerun");
    let first: Vec<_> = rows.iter().map(|r| r.result.clone().unwrap()).collect();
    let second: Vec<_> = again.iter().map(|r| r.result.clone().unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn sweep_records_failing_cells_and_continues() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = toy_config(tmp.path(), "sweep");
    cfg.gan.max_epochs = 1;
    cfg.sweep.sigma_grid = vec![1.0];
    // a negative clip bound fails validation for that cell only
    cfg.sweep.clip_grid = vec![-1.0, 1.0];
    let root = tmp.path().join("sweep");
    let rows = run_sweep(&cfg, &root, false).unwrap();
    assert!(rows[0].result.is_err());
    assert!(rows[1].result.is_ok());
    let csv = read(&root.join("sweep.csv"));
    assert!(csv.lines().nth(1).unwrap().contains("failed"));
}

#[test]
fn one_cell_sweep_equals_a_single_run() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = toy_config(tmp.path(), "single");
    cfg.gan.max_epochs = 2;
    cfg.sweep.sigma_grid = vec![1.0];
    cfg.sweep.clip_grid = vec![0.5];
    let rows = run_sweep(&cfg, &tmp.path().join("sweep"), false).unwrap();
    let mut single = cfg.clone();
    single.dp.enabled = true;
    single.dp.noise_scale = 1.0;
    single.dp.clip_bound = 0.5;
    let summary = run_pipeline(single).unwrap();
    let swept: EvaluationReport = rows[0].result.clone().unwrap();
    assert_eq!(swept, summary.report);
}

#[test]
fn two_step_walk_baseline_on_a_triangle() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("triangle.txt");
    // a pendant node supplies the validation non-edges a bare triangle lacks
    let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
    write_edge_list(&path, &g).unwrap();
    let mut cfg = toy_config(tmp.path(), "baseline");
    cfg.dataset = path;
    cfg.walk_length = 2;
    cfg.validation_fraction = 0.3;
    cfg.gan.batch_size = 4;
    cfg.dp = DpConfig::default();
    let base = baseline_config(&cfg);
    assert_eq!(base.mode, Mode::Walk);
    assert_eq!(base.model.sequence_length, 2);
    assert!(!base.dp.enabled);
    let summary = run_baseline(&cfg).unwrap();
    assert_eq!(summary.report.provenance.label, "baseline");
    assert_eq!(summary.report.epsilon_at_eval, f64::INFINITY);
    assert_eq!(summary.assembly.sample_volume, 3000);
}

#[test]
fn walk_mode_samples_have_the_walk_length() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = toy_config(tmp.path(), "walk");
    cfg.mode = Mode::Walk;
    cfg.walk_length = 4;
    let cfg = cfg.resolved();
    let summary = run_pipeline(cfg).unwrap();
    let samples = read(&summary.dir.join("samples.txt"));
    assert!(samples.lines().all(|l| l.split_whitespace().count() == 4));
}
