//! `auc`: ROC curves of score files against labelled posts.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use macroscope::corpus::open_input;
use macroscope::signals::read_scores;
use macroscope::stats::{roc_auc, roc_curve};
use serde::Deserialize;

use crate::error::{data, usage, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AucRow {
    pub emotion: String,
    pub labelled: usize,
    pub scored: usize,
    pub positives: usize,
    pub auc: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    id: String,
    emotion: String,
    label: String,
}

fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

/// Labels CSV `id,emotion,label` with label in {0, 1, true, false}.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, Vec<(String, bool)>>> {
    if !path.exists() {
        return Err(usage(format!("{} does not exist", path.display())));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut by_emotion: BTreeMap<String, Vec<(String, bool)>> = BTreeMap::new();
    for (i, r) in reader.deserialize::<LabelRow>().enumerate() {
        let line = i + 2;
        let r = r.map_err(|e| data(format!("{} row {line}: {e}", path.display())))?;
        let label = parse_label(&r.label)
            .ok_or_else(|| data(format!("{} row {line}: bad label `{}`", path.display(), r.label)))?;
        by_emotion.entry(r.emotion.trim().to_string()).or_default().push((r.id, label));
    }
    Ok(by_emotion)
}

pub fn run(scores: &Path, labels: &Path, emotion: Option<&str>, out: &Path) -> Result<Vec<AucRow>> {
    if !scores.exists() {
        return Err(usage(format!("{} does not exist", scores.display())));
    }
    let labels = read_labels(labels)?;
    let reader = open_input(scores).map_err(|e| data(format!("{}: {e}", scores.display())))?;
    let (records, _) = read_scores(reader).map_err(|e| data(format!("{}: {e}", scores.display())))?;
    let by_id: HashMap<&str, &BTreeMap<String, f64>> = records.iter().map(|r| (r.id.as_str(), &r.scores)).collect();
    fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    let selected: Vec<&String> = match emotion {
        Some(e) => {
            let key = labels
                .keys()
                .find(|k| k.as_str() == e)
                .ok_or_else(|| data(format!("no labels for emotion `{e}`")))?;
            vec![key]
        }
        None => labels.keys().collect(),
    };
    let mut rows = Vec::new();
    for e in selected {
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for (id, label) in &labels[e] {
            if let Some(s) = by_id.get(id.as_str()).and_then(|m| m.get(e)) {
                ys.push(*label);
                xs.push(*s);
            }
        }
        let mut row = AucRow {
            emotion: e.clone(),
            labelled: labels[e].len(),
            scored: xs.len(),
            positives: ys.iter().filter(|y| **y).count(),
            auc: None,
            skipped: None,
        };
        match (roc_auc(&ys, &xs), roc_curve(&ys, &xs)) {
            (Ok(a), Ok(curve)) => {
                row.auc = Some(a);
                let path = out.join(format!("roc_{e}.csv"));
                let f = File::create(&path).map_err(|err| data(format!("{}: {err}", path.display())))?;
                let mut w = csv::Writer::from_writer(BufWriter::new(f));
                let io = |err: csv::Error| data(format!("{}: {err}", path.display()));
                w.write_record(["threshold", "fpr", "tpr"]).map_err(io)?;
                for p in curve {
                    w.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])
                        .map_err(io)?;
                }
                w.flush().map_err(|err| data(format!("{}: {err}", path.display())))?;
            }
            (Err(err), _) | (_, Err(err)) => row.skipped = Some(err.to_string()),
        }
        rows.push(row);
    }
    let path = out.join("auc.csv");
    let f = File::create(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let io = |e: csv::Error| data(format!("{}: {e}", path.display()));
    w.write_record(["emotion", "labelled", "scored", "positives", "auc", "skipped"]).map_err(io)?;
    for r in &rows {
        w.write_record([
            r.emotion.clone(),
            r.labelled.to_string(),
            r.scored.to_string(),
            r.positives.to_string(),
            r.auc.map(|a| a.to_string()).unwrap_or_default(),
            r.skipped.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| data(format!("{}: {e}", path.display())))?;
    Ok(rows)
}
