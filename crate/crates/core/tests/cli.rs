//! End-to-end tests of the `rfsift` binary: command round trips, exit
//! codes, and flag/env/config precedence.

use std::path::Path;
use std::process::{Command, Output};

use rfsift::sim::preset_scene;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rfsift"));
    // isolate each invocation from the ambient environment
    for (k, _) in std::env::vars() {
        if k.starts_with("RFSIFT_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("spawn rfsift")
}

fn short_scene_toml() -> String {
    let mut scene = preset_scene("sweep_0").expect("preset");
    scene.radio.duration_s = 0.02;
    scene.to_toml()
}

#[test]
fn presets_lists_known_scenes() {
    let out = run(&mut bin().arg("presets"));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["sweep_0", "antennas_4", "tsw_6.25", "three_devices", "short_50us"] {
        assert!(text.lines().any(|l| l == name), "missing preset {name}");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(bin().args(["pipeline", "--no-such-flag"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_required_flag_is_a_validation_error() {
    let out = run(bin().args(["simulate"]));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--scene"), "{err}");
}

#[test]
fn malformed_scene_file_is_rejected_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("bad.toml");
    std::fs::write(&scene, "emitters = not valid toml").unwrap();
    let out = run(bin().args([
        "simulate",
        "--scene",
        scene.to_str().unwrap(),
        "--out",
        dir.path().join("cap.iq").to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_capture_is_an_io_error() {
    let out = run(bin().args(["pipeline", "--in", "/nonexistent/cap.iq"]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn render_rejects_inverted_db_range() {
    let out = run(bin().args([
        "render",
        "--in",
        "whatever.iq",
        "--out",
        "out.pgm",
        "--render-floor-db=10",
        "--render-ceil-db=-5",
    ]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_pipeline_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.toml");
    std::fs::write(&scene, short_scene_toml()).unwrap();
    let cap = dir.path().join("cap.iq");

    let out = run(bin().args([
        "simulate",
        "--scene",
        scene.to_str().unwrap(),
        "--out",
        cap.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(cap.exists());
    assert!(rfsift::capture::sidecar_path(&cap).exists(), "sidecar missing");
    let truth: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cap.iq.truth.json")).unwrap(),
    )
    .unwrap();
    let n_true = truth["packets"].as_array().unwrap().len();
    assert!(n_true > 0);

    let jsonl = dir.path().join("ann.jsonl");
    let out = run(bin().args([
        "pipeline",
        "--in",
        cap.to_str().unwrap(),
        "--out",
        jsonl.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&jsonl)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    for ann in &lines {
        assert!(ann["center_freq_hz"].is_number());
        assert!(ann.get("aoa_deg_per_cycle").is_some());
    }

    let pgm = dir.path().join("spec.pgm");
    let out = run(bin().args([
        "render",
        "--in",
        cap.to_str().unwrap(),
        "--out",
        pgm.to_str().unwrap(),
    ]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header = &std::fs::read(&pgm).unwrap()[..2];
    assert_eq!(header, b"P5");
}

#[test]
fn flag_beats_env_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.toml");
    std::fs::write(&scene, short_scene_toml()).unwrap();

    let from_cfg = dir.path().join("from_cfg.iq");
    let from_env = dir.path().join("from_env.iq");
    let from_flag = dir.path().join("from_flag.iq");
    let cfg = dir.path().join("rfsift.toml");
    std::fs::write(
        &cfg,
        format!("scene = {:?}\nout = {:?}\n", scene.to_str().unwrap(), from_cfg.to_str().unwrap()),
    )
    .unwrap();

    // config alone supplies both required values
    let out = run(bin().args(["simulate", "--config", cfg.to_str().unwrap()]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(from_cfg.exists());

    // env var overrides the config file
    let out = run(bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .env("RFSIFT_OUT", from_env.to_str().unwrap()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(from_env.exists());

    // explicit flag overrides both
    let out = run(bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .args(["--out", from_flag.to_str().unwrap()])
        .env("RFSIFT_OUT", dir.path().join("ignored.iq").to_str().unwrap()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(from_flag.exists());
    assert!(!dir.path().join("ignored.iq").exists());
}

#[test]
fn config_file_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rfsift.toml");
    std::fs::write(&cfg, "no_such_option = 1\n").unwrap();
    let out = run(bin().args(["presets", "--config", cfg.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(2));
}
