#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_macroscope"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn macroscope")
}

pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let d = dir.to_str().unwrap();
    let mut args = vec!["synth", "--out", d];
    args.extend_from_slice(extra);
    run_ok(&args);
    dir.join("pipeline.toml")
}

/// `(header, rows)` of a small CSV file, split on commas.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

/// Survey rows for one emotion as `(date, percent)` strings.
pub fn survey_rows(path: &Path, emotion: &str) -> Vec<(String, String)> {
    read_csv(path)
        .1
        .into_iter()
        .filter(|r| r[1] == emotion)
        .map(|r| (r[0].clone(), r[2].clone()))
        .collect()
}

/// Rewrites one emotion's survey values, keeping the other rows.
pub fn replace_survey(path: &Path, emotion: &str, values: &[(String, String)]) {
    let (_, rows) = read_csv(path);
    let mut text = String::from("date,emotion,percent\n");
    for r in rows.iter().filter(|r| r[1] != emotion) {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    for (d, v) in values {
        text.push_str(&format!("{d},{emotion},{v}\n"));
    }
    fs::write(path, text).unwrap();
}
