mod common;

use std::fs;

use common::{read_csv, run, run_ok, survey_rows, synth};

fn dir_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["validate", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["signal"]).status.code(), Some(1));
    assert_eq!(run(&["signal", "--config", "/nonexistent/pipeline.toml"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("p.toml");
    fs::write(&cfg, "inputs = [\"x.ndjson\"]\nunknown_key = 3\n").unwrap();
    let out = run(&["signal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key"));
}

#[test]
fn data_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("posts.ndjson"), "not json\n{\"broken\": true}\n").unwrap();
    fs::write(tmp.path().join("sad.txt"), "sad\n").unwrap();
    let cfg = tmp.path().join("p.toml");
    fs::write(&cfg, "inputs = [\"posts.ndjson\"]\n[[lexicons]]\npath = \"sad.txt\"\n").unwrap();
    let out = run(&["signal", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_before_signal_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = synth(tmp.path(), &["--days", "21", "--posts-per-day", "50"]);
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run `signal` first"));
}

#[test]
fn synth_and_signal_are_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--days", "60", "--posts-per-day", "300", "--scores-per-day", "20", "--seed", "9"];
    for d in [a.path(), b.path()] {
        let cfg = synth(d, &args);
        run_ok(&["signal", "--config", cfg.to_str().unwrap()]);
        run_ok(&["validate", "--config", cfg.to_str().unwrap(), "--permutations", "1000", "--stratified"]);
    }
    let (fa, fb) = (dir_bytes(a.path()), dir_bytes(b.path()));
    assert_eq!(fa.len(), fb.len());
    for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        if na.ends_with("manifest.json") {
            // Input paths are absolute and differ between directories.
            let strip = |b: &[u8]| {
                let mut v: serde_json::Value = serde_json::from_slice(b).unwrap();
                v["inputs"] = serde_json::Value::Null;
                v["scores"]["path"] = serde_json::Value::Null;
                v
            };
            assert_eq!(strip(ba), strip(bb));
        } else {
            assert!(ba == bb, "{na} differs between runs");
        }
    }
    assert!(fa.iter().any(|(n, _)| n.ends_with("report.csv")));

    let cfg = a.path().join("pipeline.toml");
    let before = dir_bytes(&a.path().join("out"));
    run_ok(&["signal", "--config", cfg.to_str().unwrap()]);
    run_ok(&["validate", "--config", cfg.to_str().unwrap(), "--permutations", "1000", "--stratified"]);
    assert!(before == dir_bytes(&a.path().join("out")), "rerun changed outputs");
}

#[test]
fn weekly_anchors_follow_the_survey_and_rescaled_is_the_gender_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = synth(tmp.path(), &["--days", "70", "--posts-per-day", "400"]);
    run_ok(&["signal", "--config", cfg.to_str().unwrap()]);
    let out = tmp.path().join("out");
    let survey: Vec<String> = survey_rows(&tmp.path().join("survey.csv"), "sad").into_iter().map(|r| r.0).collect();
    for mode in ["agnostic", "male", "female", "rescaled"] {
        let (header, rows) = read_csv(&out.join(format!("weekly/sadness_{mode}.csv")));
        assert_eq!(header, ["date", "value", "coverage"]);
        let anchors: Vec<String> = rows.iter().map(|r| r[0].clone()).collect();
        assert_eq!(anchors, survey, "{mode}");
    }
    let value = |mode: &str| -> Vec<(String, f64)> {
        read_csv(&out.join(format!("daily/sadness_{mode}.csv")))
            .1
            .into_iter()
            .map(|r| (r[0].clone(), r[1].parse().unwrap()))
            .collect()
    };
    let (m, f, r) = (value("male"), value("female"), value("rescaled"));
    assert_eq!(r.len(), 70);
    for ((a, b), c) in m.iter().zip(&f).zip(&r) {
        assert_eq!(a.0, c.0);
        assert_eq!(b.0, c.0);
        assert!((c.1 - (a.1 + b.1) / 2.0).abs() < 1e-15);
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kept"], 70 * 400);
    assert_eq!(manifest["anchors"], survey.len());
}

#[test]
fn decoys_are_filtered_before_counting() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = synth(tmp.path(), &["--days", "14", "--posts-per-day", "500", "--decoy-fraction", "0.2"]);
    let out = tmp.path().join("out");
    let stdout = run_ok(&["signal", "--config", cfg.to_str().unwrap()]);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kept"], 14 * 400, "{stdout}");
    assert_eq!(manifest["filtered"], 14 * 100);
}

#[test]
fn identical_series_are_skipped_with_the_ci_reason() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = synth(tmp.path(), &["--days", "120", "--posts-per-day", "200"]);
    run_ok(&["signal", "--config", cfg.to_str().unwrap()]);
    let (_, weekly) = read_csv(&tmp.path().join("out/weekly/sadness_rescaled.csv"));
    let copy: Vec<(String, String)> = weekly.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    common::replace_survey(&tmp.path().join("survey.csv"), "sad", &copy);
    let table = run_ok(&["validate", "--config", cfg.to_str().unwrap(), "--permutations", "1000"]);
    let line = table.lines().find(|l| l.starts_with("sad ") && l.contains("rescaled")).unwrap();
    assert!(line.contains("skipped: r1: |r| = 1"), "{line}");
    let (header, rows) = read_csv(&tmp.path().join("out/report.csv"));
    let skip = header.iter().position(|h| h == "skipped").unwrap();
    let row = rows.iter().find(|r| r[0] == "sad" && r[1] == "sadness").unwrap();
    assert!(row[skip].contains("|r| = 1"));
    // Other rows still run.
    assert!(table.lines().any(|l| l.starts_with("scared") && !l.contains("skipped")));
}

#[test]
fn auc_writes_roc_points_and_area() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = tmp.path().join("scores.ndjson");
    let labels = tmp.path().join("labels.csv");
    let mut s = String::new();
    for (id, v) in [("a", 0.9), ("b", 0.8), ("c", 0.7), ("d", 0.1)] {
        s.push_str(&format!("{{\"id\":\"{id}\",\"date\":\"2020-01-01\",\"scores\":{{\"fear\":{v}}}}}\n"));
    }
    fs::write(&scores, s).unwrap();
    fs::write(&labels, "id,emotion,label\na,fear,1\nb,fear,0\nc,fear,1\nd,fear,0\nzz,fear,1\n").unwrap();
    let out = tmp.path().join("auc");
    let stdout = run_ok(&[
        "auc",
        "--scores",
        scores.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("fear: AUC 0.7500"), "{stdout}");
    let (header, rows) = read_csv(&out.join("auc.csv"));
    assert_eq!(header, ["emotion", "labelled", "scored", "positives", "auc", "skipped"]);
    assert_eq!(rows[0][..5], ["fear", "5", "4", "2", "0.75"]);
    let (header, roc) = read_csv(&out.join("roc_fear.csv"));
    assert_eq!(header, ["threshold", "fpr", "tpr"]);
    assert_eq!(roc.last().unwrap()[1..], ["1", "1"]);

    fs::write(&labels, "id,emotion,label\na,fear,maybe\n").unwrap();
    let bad = run(&["auc", "--scores", scores.to_str().unwrap(), "--labels", labels.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}
