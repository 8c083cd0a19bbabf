//! Synthetic corpora with planted ground truth.
//!
//! Each emotion has a latent AR(1) process `z`; the per-gender daily
//! prevalence is `base_g + amplitude · tanh(z_t)`, which stays inside
//! `(base_g - amplitude, base_g + amplitude)`. A post embeds one of the
//! emotion's terms with exactly that probability, so lexicon matching
//! recovers the planted series up to binomial noise.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Duration, NaiveDate, NaiveTime, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Gender, Post};
use crate::signals::{SurveySeries, WeekWindow};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("anchor {0} outside the generated range")]
    AnchorOutOfRange(NaiveDate),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionSpec {
    /// Signal name, also the lexicon file name.
    pub name: String,
    /// Survey emotion this signal tracks.
    pub survey_name: String,
    /// Lexicon file entries (may contain `*` stems).
    pub lexicon: Vec<String>,
    /// Words embedded in matching posts; each must match `lexicon`.
    pub words: Vec<String>,
    pub male_prevalence: f64,
    pub female_prevalence: f64,
    pub amplitude: f64,
}

/// The three demo emotion classes used throughout tests and the CLI.
pub fn demo_emotions() -> Vec<EmotionSpec> {
    let spec = |name: &str, survey: &str, lex: &[&str], words: &[&str], m: f64, f: f64| EmotionSpec {
        name: name.into(),
        survey_name: survey.into(),
        lexicon: lex.iter().map(|s| s.to_string()).collect(),
        words: words.iter().map(|s| s.to_string()).collect(),
        male_prevalence: m,
        female_prevalence: f,
        amplitude: 0.01,
    };
    vec![
        spec("sadness", "sad", &["sad", "cry*", "grief", "tears"], &["sad", "crying", "cry", "grief", "tears"], 0.03, 0.05),
        spec("anxiety", "scared", &["worr*", "afraid", "nervous", "anxious"], &["worried", "worry", "afraid", "nervous", "anxious"], 0.02, 0.03),
        spec("positive", "happy", &["happ*", "glad", "love", "great"], &["happy", "happiness", "glad", "love", "great"], 0.10, 0.12),
    ]
}

const FILLER: [&str; 24] = [
    "the", "day", "was", "long", "and", "we", "went", "to", "town", "coffee", "rain", "train", "work", "today",
    "bus", "match", "weather", "news", "lunch", "team", "road", "shop", "game", "morning",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepChange {
    pub day: u32,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub days: u32,
    pub posts_per_day: u32,
    /// Share of gender-known posts written by men.
    pub male_share: f64,
    pub unknown_gender_share: f64,
    pub emotions: Vec<EmotionSpec>,
    pub ar_phi: f64,
    pub innovation_sd: f64,
    /// Share of posts per day that corpus filtering must remove.
    pub decoy_fraction: f64,
    pub pronoun_rate_neutral: f64,
    pub pronoun_rate_emotional: f64,
    /// Posts per day receiving classifier-style scores (0 disables).
    pub scores_per_day: u32,
    pub score_noise_sd: f64,
    pub step: Option<StepChange>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            start: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            days: 120,
            posts_per_day: 1000,
            male_share: 0.639,
            unknown_gender_share: 0.0,
            emotions: demo_emotions(),
            ar_phi: 0.9,
            innovation_sd: 0.45,
            decoy_fraction: 0.0,
            pronoun_rate_neutral: 0.15,
            pronoun_rate_emotional: 0.15,
            scores_per_day: 0,
            score_noise_sd: 0.05,
            step: None,
            seed: 1,
        }
    }
}

fn open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.days == 0 || self.posts_per_day == 0 {
            return bad("days and posts_per_day must be positive".into());
        }
        if !open_unit(self.male_share) {
            return bad(format!("male_share {} not in (0, 1)", self.male_share));
        }
        if !(0.0..1.0).contains(&self.unknown_gender_share) {
            return bad(format!("unknown_gender_share {} not in [0, 1)", self.unknown_gender_share));
        }
        if !(self.ar_phi > -1.0 && self.ar_phi < 1.0) {
            return bad(format!("ar_phi {} not in (-1, 1)", self.ar_phi));
        }
        if !(self.innovation_sd >= 0.0) || !(self.score_noise_sd >= 0.0) {
            return bad("standard deviations must be non-negative".into());
        }
        for r in [self.decoy_fraction, self.pronoun_rate_neutral, self.pronoun_rate_emotional] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("rate {r} not in [0, 1]"));
            }
        }
        if self.emotions.is_empty() {
            return bad("no emotions configured".into());
        }
        for e in &self.emotions {
            if e.words.is_empty() || e.lexicon.is_empty() {
                return bad(format!("{}: needs lexicon entries and words", e.name));
            }
            if !(e.amplitude >= 0.0) {
                return bad(format!("{}: negative amplitude", e.name));
            }
            let shift = self.step.map_or(0.0, |s| s.delta.abs());
            for base in [e.male_prevalence, e.female_prevalence] {
                if !open_unit(base - e.amplitude - shift) || !open_unit(base + e.amplitude + shift) {
                    return bad(format!("{}: prevalence {base} ± amplitude leaves (0, 1)", e.name));
                }
            }
        }
        Ok(())
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.days as i64).map(|d| self.start + Duration::days(d))
    }

    /// Weekly anchors ending every seventh day, starting with the first
    /// complete week.
    pub fn weekly_anchors(&self) -> Vec<NaiveDate> {
        (1..=self.days as i64 / 7)
            .map(|w| self.start + Duration::days(7 * w - 1))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionTruth {
    pub name: String,
    pub survey_name: String,
    pub male: Vec<f64>,
    pub female: Vec<f64>,
    /// Equal-weight mean of the gender prevalences.
    pub population: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub dates: Vec<NaiveDate>,
    pub emotions: Vec<EmotionTruth>,
}

impl GroundTruth {
    pub fn emotion(&self, name: &str) -> Option<&EmotionTruth> {
        self.emotions.iter().find(|e| e.name == name || e.survey_name == name)
    }

    fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let first = *self.dates.first()?;
        let i = (date - first).num_days();
        (i >= 0 && (i as usize) < self.dates.len()).then_some(i as usize)
    }

    /// Mean population prevalence over each anchor's window.
    pub fn weekly_population(&self, emotion: &str, anchors: &[NaiveDate], window: WeekWindow) -> Result<Vec<f64>, SynthError> {
        let truth = self
            .emotion(emotion)
            .ok_or_else(|| SynthError::Config(format!("unknown emotion {emotion}")))?;
        anchors
            .iter()
            .map(|&a| {
                let idx: Option<Vec<usize>> = window.days(a).map(|d| self.index_of(d)).collect();
                let idx = idx.ok_or(SynthError::AnchorOutOfRange(a))?;
                Ok(idx.iter().map(|&i| truth.population[i]).sum::<f64>() / idx.len() as f64)
            })
            .collect()
    }

    /// CSV `date,emotion,male,female,population`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SynthError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["date", "emotion", "male", "female", "population"])?;
        for e in &self.emotions {
            for (i, d) in self.dates.iter().enumerate() {
                out.write_record([
                    d.to_string(),
                    e.name.clone(),
                    e.male[i].to_string(),
                    e.female[i].to_string(),
                    e.population[i].to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn plant_truth(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> GroundTruth {
    let dates: Vec<NaiveDate> = cfg.dates().collect();
    let emotions = cfg
        .emotions
        .iter()
        .map(|e| {
            let stationary_sd = cfg.innovation_sd / (1.0 - cfg.ar_phi * cfg.ar_phi).sqrt();
            let mut z = stationary_sd * rng.sample::<f64, _>(StandardNormal);
            let mut latent = Vec::with_capacity(dates.len());
            for day in 0..cfg.days {
                if day > 0 {
                    z = cfg.ar_phi * z + cfg.innovation_sd * rng.sample::<f64, _>(StandardNormal);
                }
                let step = match cfg.step {
                    Some(s) if day >= s.day => s.delta,
                    _ => 0.0,
                };
                latent.push(e.amplitude * z.tanh() + step);
            }
            let male: Vec<f64> = latent.iter().map(|l| e.male_prevalence + l).collect();
            let female: Vec<f64> = latent.iter().map(|l| e.female_prevalence + l).collect();
            let population = male.iter().zip(&female).map(|(m, f)| (m + f) / 2.0).collect();
            EmotionTruth {
                name: e.name.clone(),
                survey_name: e.survey_name.clone(),
                male,
                female,
                population,
            }
        })
        .collect();
    GroundTruth { dates, emotions }
}

/// A generated post plus its per-emotion scores when it falls in the daily
/// score subsample.
pub struct Generated<'a> {
    pub post: &'a Post,
    pub decoy: bool,
    pub scores: Option<&'a BTreeMap<String, f64>>,
}

/// Generates the corpus day by day, handing every post to `sink`.
pub fn generate_corpus<F>(cfg: &SynthConfig, mut sink: F) -> Result<GroundTruth, SynthError>
where
    F: FnMut(Generated<'_>) -> Result<(), SynthError>,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth = plant_truth(cfg, &mut rng);
    let ppd = cfg.posts_per_day as usize;
    let decoys_per_day = (cfg.decoy_fraction * ppd as f64).round() as usize;
    let score_noise = Normal::new(0.0, cfg.score_noise_sd).expect("validated sd");
    let pronouns = crate::lexicon::DEFAULT_PRONOUNS;
    let mut words: Vec<&str> = Vec::with_capacity(16);
    let mut scores = BTreeMap::new();
    for (day, date) in truth.dates.iter().enumerate() {
        let midnight = Utc.from_utc_datetime(&date.and_time(NaiveTime::MIN));
        let decoy_slots: Vec<usize> = rand::seq::index::sample(&mut rng, ppd, decoys_per_day).into_vec();
        let mut is_decoy = vec![false; ppd];
        for i in decoy_slots {
            is_decoy[i] = true;
        }
        let score_slots = rand::seq::index::sample(&mut rng, ppd, (cfg.scores_per_day as usize).min(ppd)).into_vec();
        let mut scored = vec![false; ppd];
        for i in score_slots {
            scored[i] = true;
        }
        for (i, decoy) in is_decoy.into_iter().enumerate() {
            let gender = if rng.random::<f64>() < cfg.unknown_gender_share {
                Gender::Unknown
            } else if rng.random::<f64>() < cfg.male_share {
                Gender::Male
            } else {
                Gender::Female
            };
            words.clear();
            let n_filler = rng.random_range(3..=6);
            for _ in 0..n_filler {
                words.push(FILLER.choose(&mut rng).unwrap());
            }
            let mut emotional = false;
            scores.clear();
            for (spec, t) in cfg.emotions.iter().zip(&truth.emotions) {
                let prevalence = match gender {
                    Gender::Male => t.male[day],
                    Gender::Female => t.female[day],
                    Gender::Unknown => t.population[day],
                };
                if rng.random::<f64>() < prevalence {
                    let pos = rng.random_range(0..=words.len());
                    words.insert(pos, spec.words.choose(&mut rng).unwrap());
                    emotional = true;
                }
                if scored[i] {
                    let s: f64 = prevalence + score_noise.sample(&mut rng);
                    scores.insert(spec.name.clone(), s.clamp(0.0, 1.0));
                }
            }
            let pronoun_rate = if emotional { cfg.pronoun_rate_emotional } else { cfg.pronoun_rate_neutral };
            if rng.random::<f64>() < pronoun_rate {
                let pos = rng.random_range(0..=words.len());
                words.insert(pos, pronouns.choose(&mut rng).unwrap());
            }
            let (followers, is_retweet) = if decoy {
                match rng.random_range(0..3) {
                    0 => (rng.random_range(0..100), false),
                    1 => (rng.random_range(100_001..10_000_000), false),
                    _ => (rng.random_range(100..=100_000), true),
                }
            } else {
                let log = rng.random_range(2.0f64..5.0);
                ((10f64.powf(log).round() as u64).clamp(100, 100_000), false)
            };
            let post = Post {
                id: format!("{}-{}", day, i),
                timestamp: midnight + Duration::seconds(rng.random_range(0..86_400)),
                text: words.join(" "),
                author_gender: gender,
                author_followers: followers,
                is_retweet,
            };
            sink(Generated {
                post: &post,
                decoy,
                scores: scored[i].then_some(&scores),
            })?;
        }
    }
    Ok(truth)
}

/// Writes the corpus NDJSON and, when `scores` is given, the score NDJSON.
pub fn write_corpus<W: Write>(
    cfg: &SynthConfig,
    mut corpus: W,
    mut scores: Option<&mut dyn Write>,
) -> Result<GroundTruth, SynthError> {
    let truth = generate_corpus(cfg, |g| {
        writeln!(corpus, "{}", g.post.to_record())?;
        if let (Some(out), Some(s)) = (scores.as_mut(), g.scores) {
            let rec = serde_json::json!({
                "id": g.post.id,
                "date": g.post.timestamp.date_naive().to_string(),
                "scores": s,
            });
            writeln!(out, "{rec}")?;
        }
        Ok(())
    })?;
    corpus.flush()?;
    Ok(truth)
}

/// Survey noise model: binomial sampling with `respondents` per wave, or
/// none at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyNoise {
    pub respondents: Option<u64>,
    pub seed: u64,
}

impl Default for SurveyNoise {
    fn default() -> Self {
        SurveyNoise {
            respondents: Some(2000),
            seed: 1,
        }
    }
}

/// Weekly survey percentages tracking the planted population prevalence.
pub fn generate_survey(
    truth: &GroundTruth,
    anchors: &[NaiveDate],
    window: WeekWindow,
    noise: SurveyNoise,
) -> Result<Vec<SurveySeries>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    truth
        .emotions
        .iter()
        .map(|e| {
            let weekly = truth.weekly_population(&e.name, anchors, window)?;
            let percent = weekly
                .into_iter()
                .map(|p| match noise.respondents {
                    None => 100.0 * p,
                    Some(n) => {
                        let k = Binomial::new(n, p.clamp(0.0, 1.0)).expect("valid binomial").sample(&mut rng);
                        (100.0 * k as f64 / n as f64).clamp(0.0, 100.0)
                    }
                })
                .collect();
            Ok(SurveySeries {
                emotion: e.survey_name.clone(),
                anchors: anchors.to_vec(),
                percent,
            })
        })
        .collect()
}

/// Long-form survey CSV, rows ordered by date then emotion.
pub fn write_survey_csv<W: Write>(series: &[SurveySeries], w: W) -> Result<(), SynthError> {
    let mut rows: Vec<(NaiveDate, &str, f64)> = series
        .iter()
        .flat_map(|s| s.anchors.iter().zip(&s.percent).map(move |(a, p)| (*a, s.emotion.as_str(), *p)))
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["date", "emotion", "percent"])?;
    for (d, e, p) in rows {
        out.write_record([d.to_string(), e.to_string(), p.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{tokenize, Lexicon, LexiconMatcher};

    fn small() -> SynthConfig {
        SynthConfig {
            days: 21,
            posts_per_day: 400,
            ..Default::default()
        }
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = small();
        c.ar_phi = 1.0;
        assert!(c.validate().is_err());
        let mut c = small();
        c.emotions[0].amplitude = 0.5;
        assert!(c.validate().is_err());
        let mut c = small();
        c.male_share = 0.0;
        assert!(c.validate().is_err());
        assert!(small().validate().is_ok());
    }

    #[test]
    fn words_match_their_lexicon_and_fillers_match_nothing() {
        let emotions = demo_emotions();
        let lexicons: Vec<Lexicon> = emotions
            .iter()
            .map(|e| Lexicon::from_terms(&e.name, e.lexicon.iter().map(String::as_str)).unwrap())
            .collect();
        let m = LexiconMatcher::new(&lexicons).unwrap();
        for (i, e) in emotions.iter().enumerate() {
            for w in &e.words {
                assert_eq!(m.match_mask(&[w.as_str()]), 1 << i, "{w}");
            }
        }
        let pronouns = crate::lexicon::PronounList::default();
        for f in FILLER {
            assert_eq!(m.match_mask(&tokenize(f)), 0, "{f}");
            assert!(!pronouns.contains(f));
        }
    }

    #[test]
    fn byte_identical_given_seed() {
        let run = || {
            let mut buf = Vec::new();
            let mut scores = Vec::new();
            let cfg = SynthConfig { scores_per_day: 20, ..small() };
            write_corpus(&cfg, &mut buf, Some(&mut scores)).unwrap();
            (buf, scores)
        };
        let (a, sa) = run();
        let (b, sb) = run();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(String::from_utf8(sa).unwrap().lines().count(), 21 * 20);
    }

    #[test]
    fn zero_noise_survey_is_planted_mean() {
        let cfg = small();
        let truth = generate_corpus(&cfg, |_| Ok(())).unwrap();
        let anchors = cfg.weekly_anchors();
        assert_eq!(anchors.len(), 3);
        let s = generate_survey(&truth, &anchors, WeekWindow::default(), SurveyNoise { respondents: None, seed: 1 }).unwrap();
        let planted = truth.weekly_population("sadness", &anchors, WeekWindow::default()).unwrap();
        assert_eq!(s[0].emotion, "sad");
        for (p, q) in s[0].percent.iter().zip(planted) {
            assert_eq!(*p, 100.0 * q);
        }
        let late = [cfg.start + Duration::days(200)];
        assert!(matches!(
            generate_survey(&truth, &late, WeekWindow::default(), SurveyNoise::default()),
            Err(SynthError::AnchorOutOfRange(_))
        ));
        let early = [cfg.start + Duration::days(2)];
        assert!(generate_survey(&truth, &early, WeekWindow::default(), SurveyNoise::default()).is_err());
    }

    #[test]
    fn survey_csv_layout() {
        let s = vec![SurveySeries {
            emotion: "sad".into(),
            anchors: vec![NaiveDate::from_ymd_opt(2020, 1, 7).unwrap()],
            percent: vec![26.5],
        }];
        let mut buf = Vec::new();
        write_survey_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "date,emotion,percent\n2020-01-07,sad,26.5\n");
    }
}
