use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("kexpand-cli-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, file: &str) -> PathBuf {
        self.0.join(file)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn kexpand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kexpand")).args(args).env_remove("MCK_SEED").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// 4x4 images: class 0 lights the top half, class 1 the bottom half.
fn write_idx(dir: &Scratch, prefix: &str, count: u32) -> (PathBuf, PathBuf) {
    let mut images = Vec::new();
    for v in [0x0803u32, count, 4, 4] {
        images.extend_from_slice(&v.to_be_bytes());
    }
    let mut labels = Vec::new();
    for v in [0x0801u32, count] {
        labels.extend_from_slice(&v.to_be_bytes());
    }
    for i in 0..count {
        let label = (i % 2) as u8;
        for p in 0..16u32 {
            let lit = (p < 8) == (label == 0);
            images.push(if lit { 200 + ((i * 7 + p) % 50) as u8 } else { ((i + p) % 30) as u8 });
        }
        labels.push(label);
    }
    let (ip, lp) = (dir.path(&format!("{prefix}-images")), dir.path(&format!("{prefix}-labels")));
    std::fs::write(&ip, images).unwrap();
    std::fs::write(&lp, labels).unwrap();
    (ip, lp)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn without_timestamps(mut v: Value) -> Value {
    let m = v["manifest"].as_object_mut().unwrap();
    m.remove("started_unix_ms");
    m.remove("finished_unix_ms");
    v
}

#[test]
fn bench_rejects_non_power_of_two() {
    let o = kexpand(&["bench-wht", "--sizes", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a power of two"), "{}", stderr(&o));
}

#[test]
fn bench_writes_csv_and_manifest() {
    let dir = Scratch::new("bench");
    let out = dir.path("bench.csv");
    let o = kexpand(&["bench-wht", "--sizes", "1024..4096", "--reps", "3", "--naive-cutoff", "2048", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "size,impl,median_ms,reps");
    let fast: Vec<&str> = lines.iter().filter(|l| l.contains(",fast,")).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(fast, ["1024", "2048", "4096"]);
    assert_eq!(lines.iter().filter(|l| l.contains(",naive,")).count(), 2);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path("bench.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "bench-wht");
    assert_eq!(manifest["flags"]["reps"], 3);
}

#[test]
fn kernel_check_is_accurate_and_repeatable() {
    let run = || {
        let o = kexpand(&["kernel-check", "--dim", "64", "--features", "512", "--pairs", "100"]);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!((a["dims"].as_u64(), a["D"].as_u64(), a["pairs"].as_u64()), (Some(64), Some(512), Some(100)));
    assert!(a["mean_err"].as_f64().unwrap() <= 0.05);
    assert!(a["max_err"].as_f64().unwrap() >= a["mean_err"].as_f64().unwrap());
    assert!((a["ref_scale"].as_f64().unwrap() - 1.0 / 512f64.sqrt()).abs() < 1e-12);
    assert_eq!(without_timestamps(a), without_timestamps(b));
}

#[test]
fn kernel_check_validates_feature_count() {
    let o = kexpand(&["kernel-check", "--dim", "64", "--features", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_kexpand"))
        .args(["kernel-check", "--dim", "4", "--features", "8", "--pairs", "3"])
        .env("MCK_SEED", "77")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["manifest"]["flags"]["seed"], 77);
}

#[test]
fn train_then_eval() {
    let dir = Scratch::new("train");
    let (tri, trl) = write_idx(&dir, "train", 120);
    let (tei, tel) = write_idx(&dir, "test", 40);
    let (metrics, model) = (dir.path("metrics.csv"), dir.path("model.bin"));
    let o = kexpand(&[
        "train", "--train-images", s(&tri), "--train-labels", s(&trl), "--test-images", s(&tei), "--test-labels",
        s(&tel), "--kernel", "rbf", "--sigma", "2", "--expansions", "2", "--lr", "0.05", "--epochs", "5",
        "--metrics-out", s(&metrics), "--model-out", s(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&metrics).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "epoch,train_loss,test_acc");
    assert_eq!(rows.len(), 7);
    let final_acc: f64 = rows[6].split(',').nth(2).unwrap().parse().unwrap();
    assert!(final_acc >= 0.9, "{csv}");
    assert!(std::fs::read_to_string(dir.path("model.bin.cfg")).unwrap().contains("kernel=rbf"));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path("model.bin.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["flags"]["param_count"], 10 * (2 * 16 * 2 + 1));

    let o = kexpand(&["eval", "--model", s(&model), "--test-images", s(&tei), "--test-labels", s(&tel)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["samples"], 40);
    assert!((v["accuracy"].as_f64().unwrap() - final_acc).abs() < 1e-6);
}

#[test]
fn zero_epochs_emit_initial_metrics() {
    let dir = Scratch::new("zero");
    let (i, l) = write_idx(&dir, "d", 20);
    let o = kexpand(&[
        "train", "--train-images", s(&i), "--train-labels", s(&l), "--test-images", s(&i), "--test-labels", s(&l),
        "--kernel", "none", "--lr", "0.01", "--epochs", "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,2.302585"), "{out}");
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = Scratch::new("codes");
    let (i, l) = write_idx(&dir, "d", 20);
    let missing = dir.path("missing");
    let base = ["train", "--train-images", s(&i), "--train-labels", s(&l), "--test-images"];

    let o = kexpand(&[&base[..], &[s(&missing), "--test-labels", s(&l)]].concat());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = kexpand(&[&base[..], &[s(&l), "--test-labels", s(&l)]].concat());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("bad magic"));

    let o = kexpand(&[&base[..], &[s(&i), "--test-labels", s(&l), "--lr", "0"]].concat());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = kexpand(&[&base[..], &[s(&i), "--test-labels", s(&l), "--kernel", "none", "--lr", "1e300", "--epochs", "1"]].concat());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    let o = kexpand(&["--workers", "0", "kernel-check"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn feature_dump_layout() {
    let dir = Scratch::new("features");
    let (i, l) = write_idx(&dir, "d", 10);
    let out = dir.path("f.bin");
    let o = kexpand(&["features", "--images", s(&i), "--kernel", "matern", "--t", "3", "--expansions", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(&bytes[..8], b"KXMATF32");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 10);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 64);
    assert_eq!(bytes.len(), 16 + 10 * 64 * 4);
    let first = f32::from_le_bytes(bytes[16..20].try_into().unwrap());
    assert!((-1.0..=1.0).contains(&first));

    let labeled = dir.path("g.bin");
    let o = kexpand(&["features", "--images", s(&i), "--labels", s(&l), "--kernel", "rbf", "--out", s(&labeled)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&labeled).unwrap();
    let labels_at = 16 + 10 * 32 * 4;
    assert_eq!(&bytes[labels_at..labels_at + 8], b"KXMATU32");

    let o = kexpand(&["features", "--images", s(&i), "--kernel", "none", "--out", s(&labeled)]);
    assert_eq!(o.status.code(), Some(2));
}
