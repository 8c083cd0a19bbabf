//! `signal`: corpus → daily and weekly series per signal and gender mode.

use std::collections::{BTreeSet, HashSet};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use macroscope::aggregate::SignalSet;
use macroscope::corpus::{open_input, Gender};
use macroscope::lexicon::LexiconMatcher;
use macroscope::signals::{
    gender_rescale, load_survey, read_scores, survey_anchors, weekly_align, DailySignal, GenderFilter,
    ScoreAccumulator, ScoreRecord, SurveySeries, WeekWindow,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{data, usage, Result};
use crate::ingest::ingest;

/// Gender modes in output file names.
pub const MODES: [&str; 4] = ["agnostic", "male", "female", "rescaled"];

pub fn series_path(out: &Path, kind: &str, signal: &str, mode: &str) -> PathBuf {
    out.join(kind).join(format!("{signal}_{mode}.csv"))
}

#[derive(Debug, Serialize)]
struct SignalEntry {
    name: String,
    survey: Option<String>,
    matched: u64,
    total: u64,
    days: usize,
}

#[derive(Debug, Serialize)]
struct ScoreEntry {
    path: String,
    records: usize,
    rejected: usize,
    unmatched: u64,
    emotions: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    inputs: Vec<String>,
    lines: u64,
    parsed: u64,
    malformed: u64,
    filtered: u64,
    kept: u64,
    posts_with_pronoun: u64,
    offset_minutes: i32,
    window: WeekWindow,
    anchors: usize,
    signals: Vec<SignalEntry>,
    scores: Option<ScoreEntry>,
    error_sample: Vec<String>,
}

pub fn load_survey_checked(path: &Path) -> Result<Vec<SurveySeries>> {
    if !path.exists() {
        return Err(usage(format!("survey {} does not exist", path.display())));
    }
    load_survey(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_daily(sig: &DailySignal, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    sig.write_csv(BufWriter::new(f)).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_modes(
    out: &Path,
    name: &str,
    strata: [DailySignal; 3],
    anchors: Option<&[NaiveDate]>,
    window: WeekWindow,
) -> Result<usize> {
    let [all, male, female] = strata;
    let rescaled = gender_rescale(&male, &female).renamed(name);
    let days = all.len();
    for (mode, sig) in MODES.iter().zip([all, male, female, rescaled]) {
        write_daily(&sig, &series_path(out, "daily", name, mode))?;
        if let Some(anchors) = anchors {
            let weekly = weekly_align(&sig, anchors, window).map_err(data)?;
            let path = series_path(out, "weekly", name, mode);
            let f = File::create(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
            weekly.write_csv(BufWriter::new(f)).map_err(data)?;
        }
    }
    Ok(days)
}

fn load_scores(path: &Path) -> Result<(Vec<ScoreRecord>, usize)> {
    if !path.exists() {
        return Err(usage(format!("score file {} does not exist", path.display())));
    }
    let reader = open_input(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let (records, errors) = read_scores(reader).map_err(|e| data(format!("{}: {e}", path.display())))?;
    Ok((records, errors.len()))
}

/// Emotions to aggregate from the score file, in output order.
pub fn score_emotions(cfg: &PipelineConfig, records: &[ScoreRecord]) -> Vec<String> {
    match &cfg.scores {
        Some(s) if !s.signals.is_empty() => s.signals.iter().map(|s| s.emotion.clone()).collect(),
        Some(_) => records
            .iter()
            .flat_map(|r| r.scores.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        None => Vec::new(),
    }
}

pub struct SignalOutcome {
    pub manifest: Manifest,
}

pub fn run(cfg: &PipelineConfig) -> Result<SignalOutcome> {
    cfg.validate()?;
    let lexicons = cfg.load_lexicons()?;
    if lexicons.is_empty() && cfg.reports.emotions.is_empty() && cfg.scores.is_none() {
        return Err(usage("nothing to compute: configure lexicons, report emotions or scores"));
    }
    let matcher = LexiconMatcher::new(&lexicons).map_err(usage)?;
    let set = SignalSet::new(
        matcher,
        cfg.report_templates()?,
        cfg.reports.emotions.iter().map(|e| e.to_lowercase()).collect(),
        cfg.pronoun_list(),
        cfg.offset_minutes,
    )
    .map_err(usage)?;
    let files = cfg.input_files()?;
    let survey = cfg.survey.as_deref().map(load_survey_checked).transpose()?;
    let anchors = survey.as_deref().map(survey_anchors);
    let (records, rejected) = match &cfg.scores {
        Some(s) => load_scores(&s.path)?,
        None => (Vec::new(), 0),
    };
    let score_ids: HashSet<String> = records.iter().map(|r| r.id.clone()).collect();

    let ingested = ingest(&files, &set, &cfg.filter, &score_ids)?;

    let out = &cfg.output;
    for kind in ["daily", "weekly"] {
        fs::create_dir_all(out.join(kind)).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    }
    let survey_of = |name: &str| -> Option<String> {
        let pairs = cfg.signal_pairs(&score_emotions(cfg, &records)).ok()?;
        pairs.into_iter().find(|p| p.0 == name).map(|p| p.1)
    };
    let mut entries = Vec::new();
    let agg = &ingested.aggregator;
    for (i, name) in set.names().iter().enumerate() {
        let strata = [
            agg.signal(i, GenderFilter::All),
            agg.signal(i, GenderFilter::Male),
            agg.signal(i, GenderFilter::Female),
        ];
        let days = write_modes(out, name, strata, anchors.as_deref(), cfg.window)?;
        let counter = &agg.counter(i).all;
        entries.push(SignalEntry {
            name: name.clone(),
            survey: survey_of(name),
            matched: counter.matched(),
            total: counter.total(),
            days,
        });
    }

    let emotions = score_emotions(cfg, &records);
    let mut unmatched = 0;
    let mut accs = vec![[ScoreAccumulator::default(), ScoreAccumulator::default(), ScoreAccumulator::default()]; emotions.len()];
    for r in &records {
        let Some(&gender) = ingested.score_genders.get(&r.id) else {
            unmatched += 1;
            continue;
        };
        for (e, acc) in emotions.iter().zip(accs.iter_mut()) {
            if let Some(&v) = r.scores.get(e) {
                acc[0].record(r.date, v);
                match gender {
                    Gender::Male => acc[1].record(r.date, v),
                    Gender::Female => acc[2].record(r.date, v),
                    Gender::Unknown => true,
                };
            }
        }
    }
    for (e, acc) in emotions.iter().zip(&accs) {
        let name = format!("score_{e}");
        let strata = [acc[0].to_signal(&name), acc[1].to_signal(&name), acc[2].to_signal(&name)];
        let days = write_modes(out, &name, strata, anchors.as_deref(), cfg.window)?;
        entries.push(SignalEntry {
            survey: survey_of(&name),
            name,
            matched: 0,
            total: acc[0].to_signal("").counts.values().map(|c| c.denominator).sum(),
            days,
        });
    }

    let stats = &ingested.stats;
    let manifest = Manifest {
        inputs: files.iter().map(|f| f.display().to_string()).collect(),
        lines: stats.lines,
        parsed: stats.parsed,
        malformed: stats.malformed,
        filtered: stats.dropped,
        kept: stats.kept,
        posts_with_pronoun: agg.posts_with_pronoun,
        offset_minutes: cfg.offset_minutes,
        window: cfg.window,
        anchors: anchors.as_ref().map_or(0, |a| a.len()),
        signals: entries,
        scores: cfg.scores.as_ref().map(|s| ScoreEntry {
            path: s.path.display().to_string(),
            records: records.len(),
            rejected,
            unmatched,
            emotions: emotions.clone(),
        }),
        error_sample: ingested.error_sample.clone(),
    };
    let path = out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| data(format!("{}: {e}", path.display())))?;
    Ok(SignalOutcome { manifest })
}

impl SignalOutcome {
    pub fn summary(&self) -> String {
        let m = &self.manifest;
        format!(
            "{} files: {} records, {} malformed, {} filtered out, {} kept; {} signals × {} modes{}",
            m.inputs.len(),
            m.lines,
            m.malformed,
            m.filtered,
            m.kept,
            m.signals.len(),
            MODES.len(),
            if m.anchors > 0 { format!(", {} weekly anchors", m.anchors) } else { String::new() }
        )
    }
}
