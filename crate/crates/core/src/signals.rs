//! Daily signals (fractions and mean scores), gender rescaling, weekly
//! alignment to survey field dates, survey ingestion and period splitting.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Gender, Post};

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("line {line}: {reason}")]
    Record { line: u64, reason: String },
    #[error("row {row}: {reason}")]
    Survey { row: u64, reason: String },
    #[error("anchors must be strictly increasing (at index {0})")]
    UnorderedAnchors(usize),
    #[error("split at {split} leaves the {side} period empty")]
    EmptyPeriod { split: NaiveDate, side: &'static str },
    #[error("series mismatch: {0}")]
    Mismatch(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which authors a daily fraction is computed over. `All` includes posts of
/// unknown gender; the two strata exclude them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderFilter {
    Male,
    Female,
    All,
}

impl GenderFilter {
    pub fn admits(self, gender: Gender) -> bool {
        match self {
            GenderFilter::All => true,
            GenderFilter::Male => gender == Gender::Male,
            GenderFilter::Female => gender == Gender::Female,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayCount {
    pub numerator: f64,
    pub denominator: u64,
}

/// Date-indexed signal. Days without data are absent from `values`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DailySignal {
    pub name: String,
    pub values: BTreeMap<NaiveDate, f64>,
    pub counts: BTreeMap<NaiveDate, DayCount>,
}

impl DailySignal {
    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.values.get(&date).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// CSV `date,value,numerator,denominator`; counts left blank when the
    /// signal is derived rather than counted.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SignalError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["date", "value", "numerator", "denominator"])?;
        for (date, value) in &self.values {
            let (num, den) = match self.counts.get(date) {
                Some(c) => (fmt_num(c.numerator), c.denominator.to_string()),
                None => (String::new(), String::new()),
            };
            out.write_record([date.to_string(), fmt_num(*value), num, den])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Per-day (matched, total) counters. Merging is plain integer addition, so
/// sharded counts merge to the same result in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FractionCounter {
    days: BTreeMap<NaiveDate, (u64, u64)>,
}

impl FractionCounter {
    pub fn record(&mut self, date: NaiveDate, matched: bool) {
        let e = self.days.entry(date).or_default();
        e.0 += matched as u64;
        e.1 += 1;
    }

    pub fn merge(&mut self, other: &FractionCounter) {
        for (d, (m, t)) in &other.days {
            let e = self.days.entry(*d).or_default();
            e.0 += m;
            e.1 += t;
        }
    }

    pub fn total(&self) -> u64 {
        self.days.values().map(|(_, t)| t).sum()
    }

    pub fn matched(&self) -> u64 {
        self.days.values().map(|(m, _)| m).sum()
    }

    pub fn to_signal(&self, name: &str) -> DailySignal {
        let mut sig = DailySignal {
            name: name.to_owned(),
            ..Default::default()
        };
        for (d, &(m, t)) in &self.days {
            if t == 0 {
                continue;
            }
            sig.values.insert(*d, m as f64 / t as f64);
            sig.counts.insert(
                *d,
                DayCount {
                    numerator: m as f64,
                    denominator: t,
                },
            );
        }
        sig
    }
}

/// Male and female strata plus the gender-agnostic total for one predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StratifiedCounter {
    pub all: FractionCounter,
    pub male: FractionCounter,
    pub female: FractionCounter,
}

impl StratifiedCounter {
    pub fn record(&mut self, date: NaiveDate, gender: Gender, matched: bool) {
        self.all.record(date, matched);
        match gender {
            Gender::Male => self.male.record(date, matched),
            Gender::Female => self.female.record(date, matched),
            Gender::Unknown => {}
        }
    }

    pub fn merge(&mut self, other: &StratifiedCounter) {
        self.all.merge(&other.all);
        self.male.merge(&other.male);
        self.female.merge(&other.female);
    }

    pub fn stratum(&self, filter: GenderFilter) -> &FractionCounter {
        match filter {
            GenderFilter::All => &self.all,
            GenderFilter::Male => &self.male,
            GenderFilter::Female => &self.female,
        }
    }
}

/// Daily share of posts satisfying `predicate` within one gender stratum.
pub fn daily_fraction<'a, I, P>(
    posts: I,
    mut predicate: P,
    filter: GenderFilter,
    offset_minutes: i32,
) -> DailySignal
where
    I: IntoIterator<Item = &'a Post>,
    P: FnMut(&Post) -> bool,
{
    let mut counter = FractionCounter::default();
    for post in posts {
        if filter.admits(post.author_gender) {
            counter.record(post.date(offset_minutes), predicate(post));
        }
    }
    counter.to_signal("")
}

/// Unweighted mean of the male and female signals on their common dates.
pub fn gender_rescale(male: &DailySignal, female: &DailySignal) -> DailySignal {
    let values = male
        .values
        .iter()
        .filter_map(|(d, m)| female.values.get(d).map(|f| (*d, (m + f) / 2.0)))
        .collect();
    DailySignal {
        name: male.name.clone(),
        values,
        counts: BTreeMap::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub date: NaiveDate,
    pub scores: BTreeMap<String, f64>,
}

impl ScoreRecord {
    pub fn validate(&self, line: u64) -> Result<(), SignalError> {
        for (k, v) in &self.scores {
            if !(0.0..=1.0).contains(v) {
                return Err(SignalError::Record {
                    line,
                    reason: format!("score `{k}` = {v} outside [0, 1]"),
                });
            }
        }
        Ok(())
    }
}

pub fn parse_score_record(line: &str, line_no: u64) -> Result<ScoreRecord, SignalError> {
    let rec: ScoreRecord = serde_json::from_str(line).map_err(|e| SignalError::Record {
        line: line_no,
        reason: e.to_string(),
    })?;
    rec.validate(line_no)?;
    Ok(rec)
}

/// Reads a score NDJSON stream. Invalid records are skipped and returned as
/// errors alongside the valid ones.
pub fn read_scores<R: BufRead>(reader: R) -> Result<(Vec<ScoreRecord>, Vec<SignalError>), SignalError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_score_record(&line, i as u64 + 1) {
            Ok(r) => records.push(r),
            Err(e) => errors.push(e),
        }
    }
    Ok((records, errors))
}

// Scores are summed as fixed-point integers with a 2^-64 quantum so that the
// daily sum does not depend on accumulation order.
const SCORE_SCALE: f64 = 18_446_744_073_709_551_616.0;

/// Per-day exact score sums for one emotion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoreAccumulator {
    days: BTreeMap<NaiveDate, (u128, u64)>,
    pub rejected: u64,
}

impl ScoreAccumulator {
    /// Adds one score; out-of-range values are rejected and counted.
    pub fn record(&mut self, date: NaiveDate, score: f64) -> bool {
        if !(0.0..=1.0).contains(&score) {
            self.rejected += 1;
            return false;
        }
        let e = self.days.entry(date).or_default();
        e.0 += (score * SCORE_SCALE).round() as u128;
        e.1 += 1;
        true
    }

    pub fn merge(&mut self, other: &ScoreAccumulator) {
        for (d, (s, n)) in &other.days {
            let e = self.days.entry(*d).or_default();
            e.0 += s;
            e.1 += n;
        }
        self.rejected += other.rejected;
    }

    pub fn to_signal(&self, name: &str) -> DailySignal {
        let mut sig = DailySignal {
            name: name.to_owned(),
            ..Default::default()
        };
        for (d, &(s, n)) in &self.days {
            let sum = s as f64 / SCORE_SCALE;
            sig.values.insert(*d, sum / n as f64);
            sig.counts.insert(
                *d,
                DayCount {
                    numerator: sum,
                    denominator: n,
                },
            );
        }
        sig
    }
}

/// Daily mean of one emotion's scores. Returns the signal and the number of
/// records skipped for an out-of-range score; records lacking the emotion are
/// ignored.
pub fn daily_mean_score<'a, I>(records: I, emotion: &str) -> (DailySignal, u64)
where
    I: IntoIterator<Item = &'a ScoreRecord>,
{
    let mut acc = ScoreAccumulator::default();
    for r in records {
        if let Some(&s) = r.scores.get(emotion) {
            acc.record(r.date, s);
        }
    }
    (acc.to_signal(emotion), acc.rejected)
}

/// Rolling window feeding one survey anchor: `length` days ending
/// `offset_days` before the anchor, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeekWindow {
    pub length: u32,
    pub offset_days: i64,
}

impl Default for WeekWindow {
    fn default() -> Self {
        WeekWindow {
            length: 7,
            offset_days: 0,
        }
    }
}

impl WeekWindow {
    pub fn days(&self, anchor: NaiveDate) -> impl Iterator<Item = NaiveDate> {
        let end = anchor - Duration::days(self.offset_days);
        let len = self.length as i64;
        (0..len).map(move |k| end - Duration::days(len - 1 - k))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySeries {
    pub name: String,
    pub anchors: Vec<NaiveDate>,
    pub values: Vec<Option<f64>>,
    /// Share of window days that had data.
    pub coverage: Vec<f64>,
}

impl WeeklySeries {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SignalError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["date", "value", "coverage"])?;
        for ((a, v), c) in self.anchors.iter().zip(&self.values).zip(&self.coverage) {
            out.write_record([
                a.to_string(),
                v.map(fmt_num).unwrap_or_default(),
                fmt_num(*c),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(name: &str, r: R) -> Result<WeeklySeries, SignalError> {
        #[derive(Deserialize)]
        struct Row {
            date: NaiveDate,
            value: Option<f64>,
            coverage: Option<f64>,
        }
        let mut series = WeeklySeries {
            name: name.to_owned(),
            anchors: Vec::new(),
            values: Vec::new(),
            coverage: Vec::new(),
        };
        for (i, row) in csv::Reader::from_reader(r).deserialize::<Row>().enumerate() {
            let row = row?;
            if series.anchors.last().is_some_and(|last| *last >= row.date) {
                return Err(SignalError::UnorderedAnchors(i));
            }
            series.anchors.push(row.date);
            series.values.push(row.value);
            series.coverage.push(row.coverage.unwrap_or(if row.value.is_some() { 1.0 } else { 0.0 }));
        }
        Ok(series)
    }

    pub fn load(name: &str, path: &Path) -> Result<WeeklySeries, SignalError> {
        WeeklySeries::read_csv(name, std::fs::File::open(path)?)
    }
}

/// Averages the daily signal over each anchor's window, using whatever days
/// are present and recording the coverage.
pub fn weekly_align(
    daily: &DailySignal,
    anchors: &[NaiveDate],
    window: WeekWindow,
) -> Result<WeeklySeries, SignalError> {
    check_increasing(anchors)?;
    let mut values = Vec::with_capacity(anchors.len());
    let mut coverage = Vec::with_capacity(anchors.len());
    for &a in anchors {
        let (sum, n) = window
            .days(a)
            .filter_map(|d| daily.get(d))
            .fold((0.0, 0u32), |(s, n), v| (s + v, n + 1));
        values.push((n > 0).then(|| sum / n as f64));
        coverage.push(n as f64 / window.length as f64);
    }
    Ok(WeeklySeries {
        name: daily.name.clone(),
        anchors: anchors.to_vec(),
        values,
        coverage,
    })
}

fn check_increasing(anchors: &[NaiveDate]) -> Result<(), SignalError> {
    match anchors.windows(2).position(|w| w[0] >= w[1]) {
        Some(i) => Err(SignalError::UnorderedAnchors(i + 1)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveySeries {
    pub emotion: String,
    pub anchors: Vec<NaiveDate>,
    pub percent: Vec<f64>,
}

/// Parses the long-form survey CSV (`date,emotion,percent`). Rows are
/// reported by file line number, header being line 1.
pub fn read_survey<R: Read>(r: R) -> Result<Vec<SurveySeries>, SignalError> {
    #[derive(Deserialize)]
    struct Row {
        date: String,
        emotion: String,
        percent: f64,
    }
    let mut by_emotion: BTreeMap<String, SurveySeries> = BTreeMap::new();
    let mut reader = csv::Reader::from_reader(r);
    let headers = reader.headers()?.clone();
    for col in ["date", "emotion", "percent"] {
        if !headers.iter().any(|h| h.trim() == col) {
            return Err(SignalError::Survey {
                row: 1,
                reason: format!("missing column `{col}`"),
            });
        }
    }
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let err = |reason: String| SignalError::Survey { row: line, reason };
        let row = row.map_err(|e| err(e.to_string()))?;
        let date = NaiveDate::parse_from_str(row.date.trim(), "%Y-%m-%d")
            .map_err(|_| err(format!("bad date `{}`", row.date)))?;
        if !(0.0..=100.0).contains(&row.percent) {
            return Err(err(format!("percent {} outside [0, 100]", row.percent)));
        }
        let emotion = row.emotion.trim().to_lowercase();
        let series = by_emotion.entry(emotion.clone()).or_insert_with(|| SurveySeries {
            emotion,
            anchors: Vec::new(),
            percent: Vec::new(),
        });
        if let Some(&last) = series.anchors.last() {
            if series.anchors.contains(&date) {
                return Err(err(format!("duplicate row for ({date}, {})", series.emotion)));
            }
            if date < last {
                return Err(err(format!("date {date} out of order for `{}`", series.emotion)));
            }
        }
        series.anchors.push(date);
        series.percent.push(row.percent);
    }
    Ok(by_emotion.into_values().collect())
}

pub fn load_survey(path: &Path) -> Result<Vec<SurveySeries>, SignalError> {
    read_survey(std::fs::File::open(path)?)
}

/// Sorted union of anchor dates across survey series.
pub fn survey_anchors(series: &[SurveySeries]) -> Vec<NaiveDate> {
    let mut all: Vec<NaiveDate> = series.iter().flat_map(|s| s.anchors.iter().copied()).collect();
    all.sort();
    all.dedup();
    all
}

/// Survey and signal values on their common, non-missing anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub anchors: Vec<NaiveDate>,
    pub survey: Vec<f64>,
    pub signal: Vec<f64>,
}

impl AlignedPair {
    /// Pairwise-complete join. Anchors whose window coverage falls below
    /// `min_coverage` are dropped.
    pub fn join(survey: &SurveySeries, signal: &WeeklySeries, min_coverage: f64) -> AlignedPair {
        let lookup: BTreeMap<NaiveDate, (Option<f64>, f64)> = signal
            .anchors
            .iter()
            .zip(signal.values.iter().zip(&signal.coverage))
            .map(|(a, (v, c))| (*a, (*v, *c)))
            .collect();
        let mut pair = AlignedPair {
            anchors: Vec::new(),
            survey: Vec::new(),
            signal: Vec::new(),
        };
        for (a, p) in survey.anchors.iter().zip(&survey.percent) {
            if let Some((Some(v), c)) = lookup.get(a) {
                if *c >= min_coverage {
                    pair.anchors.push(*a);
                    pair.survey.push(*p);
                    pair.signal.push(*v);
                }
            }
        }
        pair
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> AlignedPair {
        AlignedPair {
            anchors: self.anchors[range.clone()].to_vec(),
            survey: self.survey[range.clone()].to_vec(),
            signal: self.signal[range].to_vec(),
        }
    }
}

/// Anchors before `split` form the historical period, the rest the
/// prediction period.
pub fn split_periods(
    pair: &AlignedPair,
    split: NaiveDate,
) -> Result<(AlignedPair, AlignedPair), SignalError> {
    check_increasing(&pair.anchors)?;
    let cut = pair.anchors.partition_point(|a| *a < split);
    if cut == 0 {
        return Err(SignalError::EmptyPeriod {
            split,
            side: "historical",
        });
    }
    if cut == pair.len() {
        return Err(SignalError::EmptyPeriod {
            split,
            side: "prediction",
        });
    }
    Ok((pair.slice(0..cut), pair.slice(cut..pair.len())))
}
