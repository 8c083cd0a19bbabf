//! `validate`: weekly signals against the survey, period by period.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use macroscope::signals::{split_periods, AlignedPair, SurveySeries, WeeklySeries};
use macroscope::stats::dcca::dcca_rho;
use macroscope::stats::{
    correlate, kpss, lagged_regression_hac, pearson, permutation_test, significance_marker, CorrelationResult,
    KpssBand, PermutationConfig,
};
use serde::Serialize;

use crate::config::{GenderMode, PipelineConfig};
use crate::error::{data, usage, Result};
use crate::signal::{load_survey_checked, series_path};

/// Fewest anchors accepted in each period.
pub const MIN_ANCHORS: usize = 8;

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Add male and female rows for every pair.
    pub stratified: bool,
    /// Write joined series for plotting.
    pub plot_data: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub r1: CorrelationResult,
    pub r2: CorrelationResult,
    pub perm_p: f64,
    pub dcca_rho: f64,
    pub dcca_p: f64,
    pub beta: f64,
    pub beta_p: f64,
    pub kpss: f64,
    pub kpss_band: KpssBand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub survey: String,
    pub signal: String,
    pub mode: String,
    pub n1: usize,
    pub n2: usize,
    pub outcome: std::result::Result<PairStats, String>,
}

/// The full battery on one aligned pair. Correlations are per period; the
/// permutation, DCCA, regression and KPSS results use the whole series.
pub fn analyze(pair: &AlignedPair, cfg: &PipelineConfig) -> std::result::Result<PairStats, String> {
    let (hist, pred) = split_periods(pair, cfg.split_date).map_err(|e| e.to_string())?;
    for (label, p) in [("historical", &hist), ("prediction", &pred)] {
        if p.len() < MIN_ANCHORS {
            return Err(format!("{label} period has {} anchors (need {MIN_ANCHORS})", p.len()));
        }
    }
    let r1 = correlate(&hist.signal, &hist.survey, 0.95).map_err(|e| format!("r1: {e}"))?;
    let r2 = correlate(&pred.signal, &pred.survey, 0.95).map_err(|e| format!("r2: {e}"))?;
    let perm = PermutationConfig::new(cfg.permutations, cfg.seed);
    let perm_p = permutation_test(&pair.signal, &pair.survey, pearson, &perm)
        .map_err(|e| format!("permutation: {e}"))?
        .p;
    let w = cfg.dcca_window;
    let dcca = permutation_test(&pair.signal, &pair.survey, |x, y| dcca_rho(x, y, w), &perm)
        .map_err(|e| format!("dcca: {e}"))?;
    let fit = lagged_regression_hac(&pair.survey, &pair.signal).map_err(|e| format!("regression: {e}"))?;
    let k = kpss(&fit.residuals).map_err(|e| format!("kpss: {e}"))?;
    Ok(PairStats {
        r1,
        r2,
        perm_p,
        dcca_rho: dcca.observed,
        dcca_p: dcca.p,
        beta: fit.beta,
        beta_p: fit.p_beta,
        kpss: k.statistic,
        kpss_band: k.band,
    })
}

fn row_modes(cfg: &PipelineConfig, opts: &ValidateOptions) -> Vec<&'static str> {
    let mut modes = match cfg.gender_mode {
        GenderMode::Agnostic => vec!["agnostic"],
        GenderMode::Rescaled => vec!["rescaled"],
        GenderMode::Stratified => vec!["male", "female"],
    };
    if opts.stratified && cfg.gender_mode != GenderMode::Stratified {
        modes.extend(["male", "female"]);
    }
    modes
}

fn write_plot(dir: &Path, row: &ReportRow, pair: &AlignedPair, cfg: &PipelineConfig) -> Result<()> {
    let path = dir.join(format!("{}_{}_{}.csv", row.survey, row.signal, row.mode));
    let f = File::create(&path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let io = |e: csv::Error| data(format!("{}: {e}", path.display()));
    w.write_record(["date", "survey", "signal", "period"]).map_err(io)?;
    for ((a, s), x) in pair.anchors.iter().zip(&pair.survey).zip(&pair.signal) {
        let period = if *a < cfg.split_date { "historical" } else { "prediction" };
        w.write_record([a.to_string(), s.to_string(), x.to_string(), period.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| data(format!("{}: {e}", path.display())))
}

pub fn run(cfg: &PipelineConfig, opts: &ValidateOptions) -> Result<Vec<ReportRow>> {
    cfg.validate_for_validation()?;
    let survey_path = cfg.survey.as_deref().expect("checked by validate_for_validation");
    let survey = load_survey_checked(survey_path)?;
    let manifest = cfg.output.join("manifest.json");
    if !manifest.exists() {
        return Err(usage(format!("{} not found; run `signal` first", manifest.display())));
    }
    let score_emotions = read_score_emotions(&manifest)?;
    let pairs = cfg.signal_pairs(&score_emotions)?;
    if pairs.is_empty() {
        return Err(usage("no signal is paired with a survey emotion"));
    }
    let plot_dir = cfg.output.join("plot");
    if opts.plot_data {
        fs::create_dir_all(&plot_dir).map_err(|e| usage(format!("{}: {e}", plot_dir.display())))?;
    }
    let mut rows = Vec::new();
    for (signal, emotion) in &pairs {
        for mode in row_modes(cfg, opts) {
            let mut row = ReportRow {
                survey: emotion.clone(),
                signal: signal.clone(),
                mode: mode.to_string(),
                n1: 0,
                n2: 0,
                outcome: Err(String::new()),
            };
            match load_pair(cfg, &survey, signal, emotion, mode) {
                Err(reason) => row.outcome = Err(reason),
                Ok(pair) => {
                    row.n1 = pair.anchors.partition_point(|a| *a < cfg.split_date);
                    row.n2 = pair.len() - row.n1;
                    row.outcome = analyze(&pair, cfg);
                    if opts.plot_data {
                        write_plot(&plot_dir, &row, &pair, cfg)?;
                    }
                }
            }
            rows.push(row);
        }
    }
    write_report_csv(&cfg.output.join("report.csv"), &rows)?;
    fs::write(cfg.output.join("report.txt"), render_table(&rows))
        .map_err(|e| data(format!("{}: {e}", cfg.output.display())))?;
    Ok(rows)
}

fn read_score_emotions(manifest: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(manifest).map_err(|e| data(format!("{}: {e}", manifest.display())))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", manifest.display())))?;
    Ok(v["scores"]["emotions"]
        .as_array()
        .map(|a| a.iter().filter_map(|e| e.as_str().map(String::from)).collect())
        .unwrap_or_default())
}

fn load_pair(
    cfg: &PipelineConfig,
    survey: &[SurveySeries],
    signal: &str,
    emotion: &str,
    mode: &str,
) -> std::result::Result<AlignedPair, String> {
    let series = survey
        .iter()
        .find(|s| s.emotion == emotion)
        .ok_or_else(|| format!("survey has no `{emotion}` series"))?;
    let path = series_path(&cfg.output, "weekly", signal, mode);
    if !path.exists() {
        return Err(format!("missing {}", path.display()));
    }
    let weekly = WeeklySeries::load(signal, &path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(AlignedPair::join(series, &weekly, cfg.min_coverage))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let f = File::create(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let io = |e: csv::Error| data(format!("{}: {e}", path.display()));
    w.write_record([
        "survey", "signal", "mode", "n1", "r1", "r1_low", "r1_high", "p1", "n2", "r2", "r2_low", "r2_high", "p2",
        "perm_p", "dcca_rho", "dcca_perm_p", "beta", "beta_p", "kpss", "kpss_band", "skipped",
    ])
    .map_err(io)?;
    for row in rows {
        let s = row.outcome.as_ref().ok();
        let mut rec = vec![row.survey.clone(), row.signal.clone(), row.mode.clone(), row.n1.to_string()];
        rec.extend([
            opt(s.map(|s| s.r1.r)),
            opt(s.map(|s| s.r1.ci_low)),
            opt(s.map(|s| s.r1.ci_high)),
            opt(s.map(|s| s.r1.p)),
            row.n2.to_string(),
            opt(s.map(|s| s.r2.r)),
            opt(s.map(|s| s.r2.ci_low)),
            opt(s.map(|s| s.r2.ci_high)),
            opt(s.map(|s| s.r2.p)),
            opt(s.map(|s| s.perm_p)),
            opt(s.map(|s| s.dcca_rho)),
            opt(s.map(|s| s.dcca_p)),
            opt(s.map(|s| s.beta)),
            opt(s.map(|s| s.beta_p)),
            opt(s.map(|s| s.kpss)),
            s.map(|s| s.kpss_band.as_str().to_string()).unwrap_or_default(),
            row.outcome.as_ref().err().cloned().unwrap_or_default(),
        ]);
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| data(format!("{}: {e}", path.display())))
}

fn starred(value: f64, p: f64) -> String {
    match significance_marker(p) {
        "(n.s.)" => format!("{value:.3} (n.s.)"),
        m => format!("{value:.3}{m}"),
    }
}

fn corr_cell(c: &CorrelationResult) -> String {
    format!("{} [{:.3}, {:.3}]", starred(c.r, c.p), c.ci_low, c.ci_high)
}

/// Aligned text table with star notation (· p<0.1, * p<0.05, ** p<0.01,
/// *** p<0.001).
pub fn render_table(rows: &[ReportRow]) -> String {
    let header = [
        "survey", "signal", "mode", "n1", "r1 (historical)", "n2", "r2 (prediction)", "perm p", "DCCA rho (p)",
        "beta (p)", "KPSS",
    ];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for row in rows {
        let mut line = vec![row.survey.clone(), row.signal.clone(), row.mode.clone(), row.n1.to_string()];
        match &row.outcome {
            Ok(s) => line.extend([
                corr_cell(&s.r1),
                row.n2.to_string(),
                corr_cell(&s.r2),
                format!("{:.4}", s.perm_p),
                format!("{:.3} ({:.4})", s.dcca_rho, s.dcca_p),
                format!("{} ({:.4})", starred(s.beta, s.beta_p), s.beta_p),
                format!("{:.3} {}", s.kpss, s.kpss_band),
            ]),
            Err(reason) => line.extend([format!("skipped: {reason}")]),
        }
        cells.push(line);
    }
    let width = |i: usize| {
        cells
            .iter()
            .filter(|c| c.len() == header.len())
            .map(|c| c[i].chars().count())
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..header.len()).map(width).collect();
    let mut out = String::new();
    for c in &cells {
        let padded: Vec<String> = c
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i + 1 == c.len() {
                    s.clone()
                } else {
                    format!("{s}{}", " ".repeat(widths[i].saturating_sub(s.chars().count())))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  "));
    }
    out.push_str("· p<0.1, * p<0.05, ** p<0.01, *** p<0.001\n");
    out
}
