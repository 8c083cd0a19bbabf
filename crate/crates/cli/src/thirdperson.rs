//! `thirdperson`: third-person pronoun rates in posts with and without each
//! lexicon's terms.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use macroscope::aggregate::{PronounCounts, SignalSet};
use macroscope::lexicon::{LexiconMatcher, ReportTemplateSet};
use macroscope::stats::{chi2_two_proportions, percent_difference};
use serde::Deserialize;

use crate::config::PipelineConfig;
use crate::error::{data, usage, Result};
use crate::ingest::ingest;

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionRow {
    pub lexicon: String,
    pub counts: PronounCounts,
    pub frac_matched: Option<f64>,
    pub frac_unmatched: Option<f64>,
    pub baseline: f64,
    pub percent_difference: Option<f64>,
    pub chi2: Option<f64>,
    pub p: Option<f64>,
    pub skipped: Option<String>,
}

fn ratio(k: u64, n: u64) -> Option<f64> {
    (n > 0).then(|| k as f64 / n as f64)
}

pub fn row(lexicon: &str, c: PronounCounts) -> ProportionRow {
    let total = c.matched + c.unmatched;
    let mut r = ProportionRow {
        lexicon: lexicon.to_string(),
        counts: c,
        frac_matched: ratio(c.with_pronoun_matched, c.matched),
        frac_unmatched: ratio(c.with_pronoun_unmatched, c.unmatched),
        baseline: ratio(c.with_pronoun_matched + c.with_pronoun_unmatched, total).unwrap_or(0.0),
        percent_difference: None,
        chi2: None,
        p: None,
        skipped: None,
    };
    let (Some(fm), Some(fu)) = (r.frac_matched, r.frac_unmatched) else {
        let side = if c.matched == 0 { "no post matches the lexicon" } else { "every post matches the lexicon" };
        r.skipped = Some(side.to_string());
        return r;
    };
    match percent_difference(fm, fu) {
        Ok(d) => r.percent_difference = Some(d),
        Err(e) => r.skipped = Some(format!("percent difference: {e}")),
    }
    match chi2_two_proportions(c.with_pronoun_matched, c.matched, c.with_pronoun_unmatched, c.unmatched) {
        Ok((chi2, p)) => {
            r.chi2 = Some(chi2);
            r.p = Some(p);
        }
        Err(e) => {
            r.skipped.get_or_insert_with(|| format!("chi2: {e}"));
        }
    }
    r
}

/// Rows from a corpus run.
pub fn from_corpus(cfg: &PipelineConfig) -> Result<Vec<ProportionRow>> {
    cfg.validate()?;
    let lexicons = cfg.load_lexicons()?;
    if lexicons.is_empty() {
        return Err(usage("no lexicons configured"));
    }
    let set = SignalSet::new(
        LexiconMatcher::new(&lexicons).map_err(usage)?,
        ReportTemplateSet::default(),
        Vec::new(),
        cfg.pronoun_list(),
        cfg.offset_minutes,
    )
    .map_err(usage)?;
    let ingested = ingest(&cfg.input_files()?, &set, &cfg.filter, &HashSet::new())?;
    Ok(lexicons
        .iter()
        .enumerate()
        .map(|(i, l)| row(&l.name, ingested.aggregator.pronoun_counts(i)))
        .collect())
}

#[derive(Debug, Deserialize)]
struct CountRow {
    lexicon: String,
    with_pronoun_matched: u64,
    matched: u64,
    with_pronoun_unmatched: u64,
    unmatched: u64,
}

/// Rows from precomputed counts
/// (`lexicon,with_pronoun_matched,matched,with_pronoun_unmatched,unmatched`).
pub fn from_counts(path: &Path) -> Result<Vec<ProportionRow>> {
    if !path.exists() {
        return Err(usage(format!("{} does not exist", path.display())));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    reader
        .deserialize::<CountRow>()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| data(format!("{} row {}: {e}", path.display(), i + 2)))?;
            if r.with_pronoun_matched > r.matched || r.with_pronoun_unmatched > r.unmatched {
                return Err(data(format!("{} row {}: pronoun count exceeds its total", path.display(), i + 2)));
            }
            Ok(row(
                &r.lexicon,
                PronounCounts {
                    with_pronoun_matched: r.with_pronoun_matched,
                    matched: r.matched,
                    with_pronoun_unmatched: r.with_pronoun_unmatched,
                    unmatched: r.unmatched,
                },
            ))
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write(out: &Path, rows: &[ProportionRow]) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    let path = out.join("thirdperson.csv");
    let f = File::create(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let io = |e: csv::Error| data(format!("{}: {e}", path.display()));
    w.write_record([
        "lexicon",
        "with_pronoun_matched",
        "matched",
        "fraction_matched",
        "with_pronoun_unmatched",
        "unmatched",
        "fraction_unmatched",
        "baseline",
        "percent_difference",
        "chi2",
        "p",
        "skipped",
    ])
    .map_err(io)?;
    for r in rows {
        let c = r.counts;
        w.write_record([
            r.lexicon.clone(),
            c.with_pronoun_matched.to_string(),
            c.matched.to_string(),
            opt(r.frac_matched),
            c.with_pronoun_unmatched.to_string(),
            c.unmatched.to_string(),
            opt(r.frac_unmatched),
            r.baseline.to_string(),
            opt(r.percent_difference),
            opt(r.chi2),
            opt(r.p),
            r.skipped.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| data(format!("{}: {e}", path.display())))?;
    fs::write(out.join("thirdperson.txt"), render_table(rows)).map_err(|e| data(format!("{}: {e}", out.display())))
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{:.1}%", 100.0 * x)).unwrap_or_else(|| "-".into())
}

pub fn render_table(rows: &[ProportionRow]) -> String {
    let mut cells = vec![vec![
        "lexicon".to_string(),
        "with terms".into(),
        "without terms".into(),
        "baseline".into(),
        "% difference".into(),
        "chi2 p".into(),
    ]];
    for r in rows {
        let mut line = vec![
            r.lexicon.clone(),
            pct(r.frac_matched),
            pct(r.frac_unmatched),
            pct(Some(r.baseline)),
            r.percent_difference.map(|d| format!("{d:.2}%")).unwrap_or_else(|| "-".into()),
            r.p.map(|p| if p < 1e-4 { "<0.0001".to_string() } else { format!("{p:.4}") })
                .unwrap_or_else(|| "-".into()),
        ];
        if let Some(s) = &r.skipped {
            line.push(format!("skipped: {s}"));
        }
        cells.push(line);
    }
    let widths: Vec<usize> = (0..6).map(|i| cells.iter().map(|c| c[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for c in &cells {
        let padded: Vec<String> = c
            .iter()
            .enumerate()
            .map(|(i, s)| match widths.get(i) {
                Some(w) => format!("{s}{}", " ".repeat(w - s.chars().count())),
                None => s.clone(),
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    }
    out
}
