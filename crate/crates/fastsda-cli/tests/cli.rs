//! End-to-end tests of the command-line interface: exit codes, file
//! contracts, and determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fastsda"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fastsda-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_two_cloud_csv(path: &PathBuf, per_class: usize) {
    let mut content = String::new();
    for i in 0..per_class {
        let t = i as f64 * 0.1;
        content.push_str(&format!("{},{},{},a\n", t, 1.0 + t, 0.5 - t));
        content.push_str(&format!("{},{},{},b\n", 5.0 + t, 6.0 - t, 4.5 + t));
    }
    fs::write(path, content).unwrap();
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn fastsda")
}

#[test]
fn fit_and_transform_round_trip() {
    let dir = temp_dir("fit");
    let csv = dir.join("toy.csv");
    write_two_cloud_csv(&csv, 8);
    let model = dir.join("model.txt");
    let out = run(bin()
        .args(["fit", "--dataset"])
        .arg(&csv)
        .args(["--method", "sv-linear", "--z", "2", "--alpha", "0.1", "--seed", "3", "--out"])
        .arg(&model));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model_text = fs::read_to_string(&model).unwrap();
    assert!(model_text.starts_with("FASTSDA-MODEL v1 linear"));
    // C*Z - 1 = 3 directions
    let log = fs::read_to_string(model.with_extension("log")).unwrap();
    assert!(log.starts_with("# "), "log echoes the invocation");
    assert!(log.contains("d: 3"), "log: {log}");
    let emb = dir.join("embeddings.tsv");
    let out = run(bin()
        .args(["transform", "--model"])
        .arg(&model)
        .arg("--dataset")
        .arg(&csv)
        .arg("--out")
        .arg(&emb));
    assert!(out.status.success());
    let text = fs::read_to_string(&emb).unwrap();
    assert!(text.starts_with("# "));
    assert_eq!(text.lines().count(), 1 + 16); // header + one row per sample
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn fit_with_oversized_z_is_a_data_error() {
    let dir = temp_dir("zbig");
    let csv = dir.join("toy.csv");
    write_two_cloud_csv(&csv, 3);
    let out = run(bin()
        .args(["fit", "--dataset"])
        .arg(&csv)
        .args(["--method", "sv-linear", "--z", "9", "--out"])
        .arg(dir.join("m.txt")));
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("subclasses were requested"), "{stderr}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_method_is_invalid_args() {
    let dir = temp_dir("badmethod");
    let csv = dir.join("toy.csv");
    write_two_cloud_csv(&csv, 4);
    let out = run(bin()
        .args(["fit", "--dataset"])
        .arg(&csv)
        .args(["--method", "sv-quantum", "--z", "1", "--out"])
        .arg(dir.join("m.txt")));
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_dataset_file_is_a_data_error() {
    let out = run(bin()
        .args(["cluster", "--dataset", "/nonexistent/x.csv", "--z", "2", "--out", "/tmp/never.tsv"]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn eval_is_deterministic_and_writes_both_reports() {
    let dir = temp_dir("eval");
    let csv = dir.join("toy.csv");
    write_two_cloud_csv(&csv, 15);
    let args = |out: &PathBuf| {
        let mut c = bin();
        c.args(["eval", "--dataset"])
            .arg(&csv)
            .args([
                "--method",
                "fastsda-linear",
                "--seed",
                "7",
                "--z-grid",
                "1,2",
                "--alpha-grid",
                "1e-2,1",
                "--timing-reps",
                "1",
                "--out",
            ])
            .arg(out);
        c
    };
    let out1 = dir.join("r1");
    let out2 = dir.join("r2");
    assert!(run(&mut args(&out1)).status.success());
    assert!(run(&mut args(&out2)).status.success());
    let tsv1 = fs::read_to_string(out1.with_extension("tsv")).unwrap();
    let tsv2 = fs::read_to_string(out2.with_extension("tsv")).unwrap();
    assert!(tsv1.starts_with("# "));
    // identical modulo the echoed output path in the header line
    let body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&tsv1), body(&tsv2));
    // five rotation rows plus header lines
    assert_eq!(body(&tsv1).lines().count(), 1 + 5 + 1);
    assert!(out1.with_extension("txt").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_check_passes_and_corruption_fails() {
    let ok = run(bin().args([
        "oracle-check",
        "--classes",
        "3",
        "--z",
        "2",
        "--samples",
        "45",
        "--seed",
        "5",
    ]));
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("all checks passed (rank 5)"), "{stdout}");
    let bad = run(bin().args([
        "oracle-check",
        "--classes",
        "3",
        "--z",
        "2",
        "--samples",
        "45",
        "--seed",
        "5",
        "--corrupt",
    ]));
    assert_eq!(bad.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn multiview_fit_caps_dimensions() {
    let dir = temp_dir("mv");
    // two views, 2 classes x 2 clouds, 24 samples
    let mut v0 = String::new();
    let mut v1 = String::new();
    let mut labels = String::new();
    for i in 0..24 {
        let c = i % 2;
        let z = (i / 2) % 2;
        let base = (c * 10 + z * 3) as f64;
        let t = (i / 4) as f64 * 0.05;
        v0.push_str(&format!("{},{},{},{}\n", base + t, base - t, t, 1.0 - t));
        v1.push_str(&format!("{},{},{}\n", base * 0.5 + t, t, base - 2.0 * t));
        labels.push_str(if c == 0 { "first\n" } else { "second\n" });
    }
    fs::write(dir.join("v0.csv"), v0).unwrap();
    fs::write(dir.join("v1.csv"), v1).unwrap();
    fs::write(dir.join("y.csv"), labels).unwrap();
    fs::write(
        dir.join("toy.manifest"),
        "view a v0.csv\nview b v1.csv\nlabels y.csv\n",
    )
    .unwrap();
    let model = dir.join("mv.txt");
    let out = run(bin()
        .args(["fit", "--manifest"])
        .arg(dir.join("toy.manifest"))
        .args(["--method", "mv-linear", "--z", "2", "--alpha", "0.1", "--out"])
        .arg(&model));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = fs::read_to_string(model.with_extension("log")).unwrap();
    // d <= V*C*Z - 1 = 7
    let d: usize = log
        .lines()
        .find(|l| l.starts_with("d: "))
        .and_then(|l| l[3..].trim().parse().ok())
        .unwrap();
    assert!(d <= 7, "d = {d}");
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("FASTSDA-MODEL v1 multiview"));
    // transform through the manifest works
    let emb = dir.join("emb.tsv");
    let out = run(bin()
        .args(["transform", "--model"])
        .arg(&model)
        .arg("--manifest")
        .arg(dir.join("toy.manifest"))
        .arg("--out")
        .arg(&emb));
    assert!(out.status.success());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_writes_rectangular_tsv() {
    let dir = temp_dir("bench");
    let out_path = dir.join("bench.tsv");
    let out = run(bin().args([
        "bench",
        "--d-grid",
        "8,16",
        "--n-grid",
        "40",
        "--c",
        "2",
        "--z",
        "2",
        "--reps",
        "1",
        "--seed",
        "4",
        "--out",
    ])
    .arg(&out_path));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    let header = lines.next().unwrap();
    assert_eq!(header.split('\t').count(), 7);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row.split('\t').count(), 7);
        let ratio: f64 = row.split('\t').last().unwrap().parse().unwrap();
        assert!(ratio > 0.0);
    }
    fs::remove_dir_all(&dir).ok();
}
