use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polar-sim"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = cli().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
    assert_eq!(run(&["roc", "--bogus"]).0, 1);
    assert_eq!(run(&["roc", "--n", "100"]).0, 1);
    assert_eq!(run(&["roc", "--format", "xml"]).0, 1);
    assert_eq!(run(&["cdf", "--config", "/nonexistent/cfg.json"]).0, 2);
    let (code, _, err) = run(&["cdf", "--n", "64", "--k", "32", "--trials", "10", "--ebn0-db", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent/dir/x.csv"));
}

#[test]
fn construct_reports_tree() {
    let (code, out, _) = run(&["construct", "--n", "16", "--k", "11", "--crc", "none"]);
    assert_eq!(code, 0);
    assert!(out.contains("# leaves: Rep(4) Spc(4) Spc(8)"));
    let rows = body(&out);
    assert_eq!(rows[0], "index,frozen,ga_llr_mean");
    let frozen: Vec<usize> = rows[1..]
        .iter()
        .filter(|r| r.split(',').nth(1) == Some("true"))
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(frozen, [0, 1, 2, 4, 8]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 64, "k": 32, "trials": 5, "ebn0_db": [2.0], "seed": 4}"#).unwrap();
    let (code, out, _) = run(&["encode", "--config", cfg.to_str().unwrap(), "--trials", "3"]);
    assert_eq!(code, 0);
    let rows = body(&out);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1].split(',').nth(2).unwrap().len(), 64);
}

#[test]
fn roc_writes_one_file_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roc.csv");
    let (code, _, err) = run(&[
        "roc", "--n", "128", "--k", "40", "--trials", "300", "--ebn0-db", "2,3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    for p in ["roc_2dB.csv", "roc_3dB.csv"] {
        let text = std::fs::read_to_string(dir.path().join(p)).unwrap();
        assert_eq!(body(&text)[0], "threshold_d,p_miss,p_fa,n_miss,n_fa,n_f1,n_f0");
        assert!(text.contains("# config_hash: "));
    }
}

#[test]
fn json_output_mirrors_csv() {
    let args = ["fer", "--n", "64", "--k", "32", "--ebn0-db", "1,2", "--max-frames", "4000", "--min-errors", "10"];
    let (_, csv, _) = run(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let (code, json, _) = run(&json_args);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let columns: Vec<&str> = doc["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(columns.join(","), body(&csv)[0]);
    for (row, line) in doc["rows"].as_array().unwrap().iter().zip(&body(&csv)[1..]) {
        let fer: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(row[2].as_f64().unwrap().to_bits(), fer.to_bits());
    }
    assert_eq!(doc["metadata"]["seed"], 1);
}
