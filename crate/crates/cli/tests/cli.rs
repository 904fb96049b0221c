use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "seed = 4\nminutes = 4320\nepochs = 2\nhidden_mt = 8\nhidden_mall = 8\n\
                     gb_rounds = 15\noptim_iterations = 10\nloop_iterations = 3\nloop_minutes = 300\n";

fn furnace(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_furnace"))
        .current_dir(dir)
        .env_remove("FURNACE_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = furnace(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    dir
}

fn read(dir: &Path, rel: &str) -> Vec<u8> {
    std::fs::read(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// generate → preprocess → select-features → train, returning the
/// checkpoint path.
fn stages(dir: &Path) -> PathBuf {
    let c = ["--config", "run.cfg"];
    ok(dir, &[&c[..], &["generate", "--out", "raw.csv"]].concat());
    ok(dir, &[&c[..], &["preprocess", "--in", "raw.csv", "--out", "disc.csv", "--sidecar", "side.txt"]].concat());
    ok(dir, &[&c[..], &["select-features", "--in", "disc.csv", "--out", "feat"]].concat());
    ok(
        dir,
        &[
            &c[..],
            &[
                "train", "--model", "mt-classical", "--in", "disc.csv", "--sidecar", "side.txt",
                "--features", "feat/features.txt", "--checkpoint", "m.ckpt",
            ],
        ]
        .concat(),
    );
    dir.join("m.ckpt")
}

#[test]
fn stages_run_and_identical_checkpoints_compare_equal() {
    let d = setup();
    let dir = d.path();
    stages(dir);
    let raw = read(dir, "raw.csv");
    assert!(String::from_utf8_lossy(&raw).starts_with("timestamp,pci,"));
    let feats = String::from_utf8(read(dir, "feat/features.txt")).unwrap();
    assert_eq!(feats.lines().count(), 27);
    assert!(dir.join("m.ckpt.manifest").exists());
    assert!(dir.join("m.ckpt.curve.csv").exists());

    ok(dir, &["--config", "run.cfg", "evaluate", "--checkpoints", "m.ckpt", "m.ckpt", "--in", "disc.csv", "--out", "eval"]);
    let json = String::from_utf8(read(dir, "eval/evaluation.json")).unwrap();
    let tail = &json[json.find("\"improvement_vs_first\"").unwrap()..];
    let list = &tail[tail.find('[').unwrap() + 1..tail.find(']').unwrap()];
    let vals: Vec<f64> = list.split(',').map(|v| v.trim().parse().unwrap()).collect();
    assert_eq!(vals, vec![0.0, 0.0]);
}

#[test]
fn commands_are_idempotent_and_leave_inputs_alone() {
    let d = setup();
    let dir = d.path();
    stages(dir);
    let raw = read(dir, "raw.csv");
    let disc = read(dir, "disc.csv");
    let side = read(dir, "side.txt");
    let ckpt = read(dir, "m.ckpt");

    // Re-running a stage on the same inputs writes the same bytes.
    ok(dir, &["--config", "run.cfg", "preprocess", "--in", "raw.csv", "--out", "disc2.csv", "--sidecar", "side2.txt"]);
    assert_eq!(read(dir, "disc2.csv"), disc);
    assert_eq!(read(dir, "side2.txt"), side);
    ok(
        dir,
        &[
            "--config", "run.cfg", "train", "--model", "mt-classical", "--in", "disc.csv", "--sidecar",
            "side.txt", "--features", "feat/features.txt", "--checkpoint", "m2.ckpt",
        ],
    );
    assert_eq!(read(dir, "m2.ckpt"), ckpt);
    assert_eq!(read(dir, "m2.ckpt.manifest"), read(dir, "m.ckpt.manifest"));

    assert_eq!(read(dir, "raw.csv"), raw);
    assert_eq!(read(dir, "disc.csv"), disc);
    assert_eq!(read(dir, "side.txt"), side);
}

#[test]
fn pipeline_end_to_end_and_deterministic() {
    let d = setup();
    let dir = d.path();
    let line = ok(dir, &["--config", "run.cfg", "pipeline", "--out", "a"]);
    assert!(line.starts_with("pipeline wrote"));
    ok(dir, &["--config", "run.cfg", "pipeline", "--out", "b"]);
    for rel in [
        "config.txt",
        "raw.csv",
        "discretized.csv",
        "sidecar.txt",
        "features/features.txt",
        "mall.ckpt",
        "evaluation.json",
        "optimize/policy.csv",
        "optimize/trace.csv",
        "closed_loop/closed_loop.csv",
        "closed_loop/closed_loop.json",
    ] {
        assert_eq!(read(&dir.join("a"), rel), read(&dir.join("b"), rel), "{rel} differs");
    }
}

#[test]
fn seed_flag_and_env_agree() {
    let d = setup();
    let dir = d.path();
    ok(dir, &["--seed", "9", "generate", "--minutes", "200", "--out", "flag.csv"]);
    let out = Command::new(env!("CARGO_BIN_EXE_furnace"))
        .current_dir(dir)
        .env("FURNACE_SEED", "9")
        .args(["generate", "--minutes", "200", "--out", "env.csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(dir, "flag.csv"), read(dir, "env.csv"));
    ok(dir, &["--seed", "10", "generate", "--minutes", "200", "--out", "other.csv"]);
    assert_ne!(read(dir, "flag.csv"), read(dir, "other.csv"));
}

fn error_line(out: &Output) -> String {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    lines[0].to_string()
}

#[test]
fn errors_are_one_structured_line() {
    let d = setup();
    let dir = d.path();

    let out = furnace(dir, &["preprocess", "--in", "missing.csv", "--out", "x.csv", "--sidecar", "s.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_line(&out).starts_with("error: kind=io message="));

    std::fs::write(dir.join("bad.csv"), "timestamp,pci,temp1,temp2,temp3,temp4\n2023-01-01T00:00,x,1,1,1,1\n").unwrap();
    let out = furnace(dir, &["preprocess", "--in", "bad.csv", "--out", "x.csv", "--sidecar", "s.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let line = error_line(&out);
    assert!(line.starts_with("error: kind=parse message="), "{line}");
    assert!(line.contains("line 2"), "{line}");

    std::fs::write(dir.join("typo.cfg"), "epochz = 3\n").unwrap();
    let out = furnace(dir, &["--config", "typo.cfg", "generate", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let line = error_line(&out);
    assert!(line.starts_with("error: kind=parse message="), "{line}");
    assert!(line.contains("epochz"), "{line}");

    let out = furnace(dir, &["train", "--model", "transformer"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("error: kind=usage message="));
    assert!(!dir.join("x.csv").exists());
}
