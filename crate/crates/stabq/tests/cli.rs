use std::path::Path;
use std::process::Command;

use stabq::output::{rate_svg, table_csv, write_report};
use stabq::report::Plot;
use stabq::{ExperimentConfig, RateFit, Report, Table};

fn stabq(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_stabq"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn attr(svg: &str, element: &str, name: &str) -> f64 {
    let start = svg.find(element).expect("element present");
    let tail = &svg[start..];
    let key = format!(" {name}=\"");
    let at = tail.find(&key).expect("attribute present") + key.len();
    let end = tail[at..].find('"').unwrap();
    tail[at..at + end].parse().unwrap()
}

#[test]
fn config_round_trips_and_hash_ignores_key_order() {
    let a = r#"{"family": "knn-kth", "k": 2, "seed": 9, "lil": {"rungs": 7, "n0": 512}}"#;
    let b = r#"{"lil": {"n0": 512, "rungs": 7}, "seed": 9, "k": 2, "family": "knn-kth"}"#;
    let (ca, _) = ExperimentConfig::from_json(a).unwrap();
    let (cb, _) = ExperimentConfig::from_json(b).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(ca.hash(), cb.hash());
    let (again, _) = ExperimentConfig::from_json(&ca.to_json()).unwrap();
    assert_eq!(again, ca);
    assert_eq!(again.hash(), ca.hash());
}

#[test]
fn empty_report_writes_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut report = Report::new("sample");
    report.tables.push(Table::new("empty", &["n", "replicate", "value"]));
    let files = write_report(&report, dir.path(), false).unwrap();
    assert_eq!(files, ["empty.csv", "sample_summary.csv"]);
    assert_eq!(std::fs::read(dir.path().join("empty.csv")).unwrap(), b"n,replicate,value\n");
    assert_eq!(
        std::fs::read(dir.path().join("sample_summary.csv")).unwrap(),
        b"check,value,lower,upper,pass\n"
    );
}

#[test]
fn rate_svg_line_carries_the_fitted_slope() {
    let per_n: Vec<(f64, Vec<f64>)> = [1e3f64, 4e3, 1.6e4, 6.4e4]
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, vec![3.0 * n.powf(-0.75) * (1.0 + 0.01 * i as f64), 3.0 * n.powf(-0.75)]))
        .collect();
    let fit = RateFit::from_samples("remainder", &per_n).unwrap();
    let svg = rate_svg(&fit);
    let (x1, y1) = (attr(&svg, "<line id=\"fit\"", "x1"), attr(&svg, "<line id=\"fit\"", "y1"));
    let (x2, y2) = (attr(&svg, "<line id=\"fit\"", "x2"), attr(&svg, "<line id=\"fit\"", "y2"));
    let drawn = (y2 - y1) / (x2 - x1);
    assert!((drawn - fit.slope).abs() < 1e-9, "{drawn} vs {}", fit.slope);
    assert_eq!(attr(&svg, "<line id=\"fit\"", "data-slope"), fit.slope);
    assert_eq!(svg.matches("<circle").count(), 4);

    let dir = tempfile::tempdir().unwrap();
    let mut report = Report::new("bahadur");
    report.plots.push(Plot::Rate { name: "remainder".into(), fit });
    let files = write_report(&report, dir.path(), true).unwrap();
    assert!(files.contains(&"remainder.svg".to_string()));
}

#[test]
fn same_table_gives_same_bytes() {
    let mut t = Table::new("t", &["n", "replicate", "x"]);
    for i in (0..50u64).rev() {
        t.push(vec![1000.0.into(), i.into(), (1.0 / (i as f64 + 3.0)).into()]);
    }
    assert_eq!(table_csv(&t), table_csv(&t.clone()));
}

#[test]
fn unknown_subcommand_and_bad_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(stabq(dir.path(), &["frobnicate"]).0, 2);
    let cfg = write_config(dir.path(), r#"{"family": "knn-kth", "replicatez": 3}"#);
    let (code, err) = stabq(dir.path(), &["sample", "--config", &cfg]);
    assert_eq!(code, 2);
    assert!(err.contains("replicatez"), "{err}");
    let cfg = write_config(dir.path(), r#"{"family": "knn-kth", "replicates": 1}"#);
    let (code, err) = stabq(dir.path(), &["sample", "--config", &cfg]);
    assert_eq!(code, 2);
    assert!(err.contains("replicates"), "{err}");
}

#[test]
fn oracle_free_family_rejects_oracle_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"family": "knn-total"}"#);
    assert_eq!(stabq(dir.path(), &["bahadur", "--config", &cfg]).0, 2);
}

#[test]
fn band_breach_exits_1_with_fail_row() {
    let dir = tempfile::tempdir().unwrap();
    // A 16-step Gaussian walk is nowhere near its iterated-logarithm envelope.
    let cfg = write_config(
        dir.path(),
        r#"{"family": "knn-kth", "replicates": 10, "lil": {"n0": 256, "rungs": 6, "control_log2": 4}}"#,
    );
    let (code, _) = stabq(dir.path(), &["lil", "--config", &cfg, "--out", "o"]);
    assert_eq!(code, 1);
    let summary = std::fs::read_to_string(dir.path().join("o/lil_summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("normal control median") && l.ends_with(",FAIL")));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], false);
}

#[test]
fn sample_run_is_reproducible_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"family": "knn-kth", "n_ladder": [400, 900], "c_star": 1.0}"#);
    let (code, err) = stabq(dir.path(), &["sample", "--config", &cfg, "--seed", "5", "--out", "a"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("warning"), "{err}");
    assert_eq!(stabq(dir.path(), &["sample", "--config", &cfg, "--seed", "5", "--out", "b"]).0, 0);
    assert_eq!(stabq(dir.path(), &["sample", "--config", &cfg, "--seed", "6", "--out", "c"]).0, 0);
    let read = |d: &str| std::fs::read(dir.path().join(d).join("sample.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["subcommand"], "sample");
    assert_eq!(manifest["passed"], true);
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 1);
    for f in manifest["files"]["sample"].as_array().unwrap() {
        assert!(dir.path().join("a").join(f.as_str().unwrap()).exists());
    }
}
