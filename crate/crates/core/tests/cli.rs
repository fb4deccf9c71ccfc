use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dp_graphgen::graph::{largest_connected_component, stochastic_block_model, write_edge_list};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dp-graphgen"));
    cmd.env_remove("DP_GRAPHGEN_OUT").env("RUST_LOG", "warn");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let g = stochastic_block_model(&[12, 12], 0.45, 0.05, 5).unwrap();
    let g = largest_connected_component(&g).unwrap().graph;
    let data = dir.join("toy.txt");
    write_edge_list(&data, &g).unwrap();
    let cfg = dir.join("toy.toml");
    fs::write(
        &cfg,
        format!(
            r#"
dataset = "{}"
sample_volume = 2000
checkpoint_sample_volume = 400
seed = 4
model.noise_dim = 4
model.hidden_dim = 6
model.down_projection_dim = 6
gan.batch_size = 16
gan.max_epochs = 2
gan.checkpoint_epochs = 1
dp.enabled = false
"#,
            data.display()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn account_prints_the_single_step_bound() {
    let out = run(bin().args(["account", "--q", "1", "--sigma", "1", "--steps", "1"]));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["epsilon"].as_f64().unwrap() - 5.3026).abs() < 1e-3);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(code(&run(&mut bin())), 2);
    assert_eq!(code(&run(bin().args(["account", "--q", "1"]))), 2);
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "gan.batch_sise = 3\n").unwrap();
    let out = run(bin().arg("run").arg("--config").arg(&cfg));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("batch_sise"));
    let out = run(bin().args(["account", "--q", "2", "--sigma", "1", "--steps", "1"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn stage_failure_exits_with_three_and_leaves_a_marker() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("missing.toml");
    fs::write(
        &cfg,
        format!("dataset = \"{}\"\n", tmp.path().join("nope.txt").display()),
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out_dir));
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest"));
    assert!(out_dir.join("FAILED").exists());
}

#[test]
fn stage_by_stage_matches_a_full_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    let full = tmp.path().join("full");
    let out = run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&full));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let staged = tmp.path().join("staged");
    for stage in ["ingest", "split", "train", "generate", "assemble", "evaluate"] {
        let out = run(bin().arg(stage).arg("--config").arg(&cfg).arg("--out").arg(&staged));
        assert_eq!(code(&out), 0, "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["samples.txt", "generated.txt", "report.json"] {
        assert_eq!(
            fs::read(full.join(name)).unwrap(),
            fs::read(staged.join(name)).unwrap(),
            "{name} differs"
        );
    }

    // explicit inputs to the assembler
    let elsewhere = tmp.path().join("elsewhere");
    let out = run(bin()
        .arg("assemble")
        .arg("--samples")
        .arg(full.join("samples.txt"))
        .args(["--target-edges", "30", "--out"])
        .arg(&elsewhere));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let generated = dp_graphgen::graph::read_edge_list(&elsewhere.join("generated.txt")).unwrap();
    assert_eq!(generated.graph.num_edges(), 30);

    let out = run(bin()
        .arg("account")
        .arg("--manifest")
        .arg(full.join("train/train.json")));
    assert_eq!(code(&out), 0);
}

#[test]
fn seed_flag_and_output_root_variable() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path());
    let root = tmp.path().join("root");
    let out = run(bin()
        .env("DP_GRAPHGEN_OUT", &root)
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--seed", "9"]));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let runs: Vec<_> = fs::read_dir(&root).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(runs.len(), 1);
    assert!(runs[0].to_string_lossy().starts_with("run-"));
    let echoed = fs::read_to_string(root.join(&runs[0]).join("config.toml")).unwrap();
    assert!(echoed.contains("seed = 9"));
}
