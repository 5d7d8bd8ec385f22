use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hsi_rpca::io::{read_cube, read_ground_truth, write_cube};
use hsi_rpca::{flatten, thin_svd, HsiCube};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_hsi-rpca");

fn scenes_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Simulates the small oracle scene into `dir/sim`.
fn oracle_scene(dir: &Path) -> PathBuf {
    let sim = dir.join("sim");
    let scene = scenes_dir().join("oracle_small.toml");
    let o = run(&["simulate", "--scene", p(&scene), "--out", p(&sim)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    sim
}

fn sweep_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tau,lambda,pd,false_alarms,rank_l,active_columns,runtime,converged,outer_iters"
    );
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn missing_weights_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let o = run(&[
        "decompose",
        "--cube",
        p(&sim.join("scene_a1.hsic")),
        "--dictionary",
        p(&sim.join("target.csv")),
        "--out",
        p(&dir.path().join("dec")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--tau"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&run(&["decompose", "--bogus"])), 2);
}

#[test]
fn malformed_scene_names_the_offending_key() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("bad.toml");
    let text = fs::read_to_string(scenes_dir().join("oracle_small.toml")).unwrap();
    fs::write(&spec, text.replace("rank = 3", "rank = 3\nrnak = 2")).unwrap();
    let o = run(&["simulate", "--scene", p(&spec), "--out", p(&dir.path().join("o"))]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("rnak"), "{}", stderr(&o));
}

#[test]
fn simulated_low_rank_scene_has_the_requested_rank() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let bg = read_cube(&sim.join("background.hsic")).unwrap();
    assert_eq!((bg.height(), bg.width(), bg.bands()), (30, 30, 50));
    let svd = thin_svd(flatten(&bg).as_mat().as_ref(), 1e-10).unwrap();
    assert_eq!(svd.s.len(), 3);
    assert_eq!(read_ground_truth(&sim.join("truth_a1.pgm")).unwrap().count(), 18);
}

#[test]
fn protocol_simulation_writes_eight_scenes_and_masks() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("proto");
    let o = run(&["simulate", "--out", p(&out), "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    let count = |prefix: &str, ext: &str| names.iter().filter(|n| n.starts_with(prefix) && n.ends_with(ext)).count();
    assert_eq!(count("scene_", ".hsic"), 8);
    assert_eq!(count("truth_", ".pgm"), 8);
    let cube = read_cube(&out.join("scene_a0.5.hsic")).unwrap();
    assert_eq!((cube.height(), cube.width(), cube.bands()), (100, 100, 186));
}

#[test]
fn sweep_over_a_three_by_three_grid_writes_nine_rows() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let out = dir.path().join("sw");
    let o = run(&[
        "sweep",
        "--cube",
        p(&sim.join("scene_a1.hsic")),
        "--dictionary",
        p(&sim.join("target.csv")),
        "--truth",
        p(&sim.join("truth_a1.pgm")),
        "--grid-size",
        "3x3",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(sweep_rows(&out.join("sweep.csv")).len(), 9);
}

#[test]
fn active_columns_do_not_grow_with_lambda() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let out = dir.path().join("sw");
    let o = run(&[
        "sweep",
        "--cube",
        p(&sim.join("scene_a1.hsic")),
        "--dictionary",
        p(&sim.join("target.csv")),
        "--truth",
        p(&sim.join("truth_a1.pgm")),
        "--taus",
        "4.0,30.0",
        "--lambdas",
        "0.5,1.5,5,15,50",
        "--deterministic",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = sweep_rows(&out.join("sweep.csv"));
    for block in rows.chunks(5) {
        let active: Vec<usize> = block.iter().map(|r| r[5].parse().unwrap()).collect();
        assert!(active.windows(2).all(|w| w[1] <= w[0]), "{active:?}");
        assert!(block.iter().all(|r| r[6] == "0"), "deterministic runtimes are zero");
    }
}

fn decompose_args<'a>(cube: &'a str, dict: &'a str, out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["decompose", "--cube", cube, "--dictionary", dict, "--out", out];
    v.extend_from_slice(extra);
    v
}

#[test]
fn zero_cube_gives_zero_outputs_and_converges() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let zero = dir.path().join("zero.hsic");
    write_cube(&HsiCube::zeros(4, 5, 50).unwrap(), &zero).unwrap();
    let out = dir.path().join("dec");
    let dict = sim.join("target.csv");
    let o = run(&decompose_args(p(&zero), p(&dict), p(&out), &["--tau", "1", "--lambda", "1"]));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["background.hsic", "target.hsic", "residual.hsic"] {
        let c = read_cube(&out.join(name)).unwrap();
        assert!(c.data().iter().all(|&v| v == 0.0), "{name}");
    }
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("decompose_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["converged"], true);
}

#[test]
fn band_count_mismatch_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let short = dir.path().join("short.hsic");
    write_cube(&HsiCube::zeros(4, 5, 49).unwrap(), &short).unwrap();
    let dict = sim.join("target.csv");
    let out = dir.path().join("dec");
    let o = run(&decompose_args(p(&short), p(&dict), p(&out), &["--tau", "1", "--lambda", "1"]));
    assert_eq!(code(&o), 3);
    let msg = stderr(&o);
    assert!(msg.contains("50") && msg.contains("49"), "{msg}");
}

#[test]
fn oracle_scene_target_is_nonzero_exactly_on_the_implants() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let out = dir.path().join("dec");
    let (cube, dict) = (sim.join("scene_a1.hsic"), sim.join("target.csv"));
    // the best cell of the heuristic sweep on this scene
    let o = run(&decompose_args(
        p(&cube),
        p(&dict),
        p(&out),
        &["--tau", "4.329285167409775", "--lambda", "1.5616623989578056"],
    ));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let target = read_cube(&out.join("target.hsic")).unwrap();
    let truth = read_ground_truth(&sim.join("truth_a1.pgm")).unwrap();
    for r in 0..30 {
        for c in 0..30 {
            let nonzero = target.pixel(r, c).iter().any(|&v| v != 0.0);
            assert_eq!(nonzero, truth.mask[r * 30 + c], "pixel ({r}, {c})");
        }
    }

    let det = dir.path().join("det");
    let o = run(&["detect", "--target", p(&out.join("target.hsic")), "--out", p(&det)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ev = dir.path().join("ev");
    let o = run(&[
        "eval",
        "--mask",
        p(&det.join("mask.pgm")),
        "--truth",
        p(&sim.join("truth_a1.pgm")),
        "--scores",
        p(&det.join("scores.csv")),
        "--out",
        p(&ev),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(ev.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(m["pd"], 1.0);
    assert_eq!(m["false_alarms"], 0);
    assert_eq!(m["auc"], 1.0);
}

#[test]
fn iteration_cap_exits_with_the_non_convergence_code_and_still_writes() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let out = dir.path().join("dec");
    let (cube, dict) = (sim.join("scene_a1.hsic"), sim.join("target.csv"));
    let o = run(&decompose_args(
        p(&cube),
        p(&dict),
        p(&out),
        &["--tau", "4.33", "--lambda", "1.56", "--max-outer", "1"],
    ));
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(out.join("target.hsic").exists() && out.join("trace.csv").exists());
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("decompose_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["converged"], false);
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "tau = 4.33\nlambda = 1.56\nmax_outer = 1\n").unwrap();
    let (cube, dict) = (sim.join("scene_a1.hsic"), sim.join("target.csv"));
    let out = dir.path().join("a");
    let o = run(&decompose_args(p(&cube), p(&dict), p(&out), &["--config", p(&cfg), "--max-outer", "3"]));
    assert!(matches!(code(&o), 0 | 4), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("decompose_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["solver"]["tau"], 4.33);
    assert_eq!(m["solver"]["max_outer"], 3);

    fs::write(&cfg, "tau = 4.33\nlamda = 1.56\n").unwrap();
    let o = run(&decompose_args(p(&cube), p(&dict), p(&out), &["--config", p(&cfg)]));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lamda"));
}

#[test]
fn manifest_lists_every_output_and_replay_reproduces_them() {
    let dir = TempDir::new().unwrap();
    let sim = oracle_scene(dir.path());
    let out = dir.path().join("dec");
    let (cube, dict) = (sim.join("scene_a1.hsic"), sim.join("target.csv"));
    let o = run(&decompose_args(
        p(&cube),
        p(&dict),
        p(&out),
        &["--tau", "4.33", "--lambda", "1.56", "--deterministic"],
    ));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = out.join("decompose_manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    let outputs: Vec<String> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "decompose_manifest.json")
        .collect();
    on_disk.sort();
    let mut listed = outputs.clone();
    listed.sort();
    assert_eq!(listed, on_disk);
    assert_eq!(m["timestamp"], 0);

    let again = dir.path().join("again");
    let o = run(&["replay", p(&manifest), "--out", p(&again)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in &outputs {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}
