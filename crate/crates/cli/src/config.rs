//! Pipeline configuration: a TOML file plus command-line overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use macroscope::corpus::FilterConfig;
use macroscope::lexicon::{
    load_lexicon, Lexicon, PronounList, ReportTemplateSet, DEFAULT_PRONOUNS, DEFAULT_TEMPLATES, SURVEY_EMOTIONS,
};
use macroscope::signals::WeekWindow;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

pub const DEFAULT_SPLIT_DATE: &str = "2020-11-01";
pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const DEFAULT_DCCA_WINDOW: usize = 12;
pub const MIN_VALIDATION_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GenderMode {
    /// All posts, unknown gender included.
    Agnostic,
    /// Separate male and female series.
    Stratified,
    /// Mean of the male and female series.
    Rescaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconEntry {
    pub path: PathBuf,
    /// Signal name; defaults to the file stem.
    pub name: Option<String>,
    /// Survey emotion the signal is validated against.
    pub survey: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreSignal {
    pub emotion: String,
    pub survey: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreSource {
    pub path: PathBuf,
    /// Emotions to aggregate; empty means every emotion in the file, each
    /// validated against the survey emotion of the same name.
    #[serde(default)]
    pub signals: Vec<ScoreSignal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Survey emotions to count explicit reports for (`report_<emotion>`).
    pub emotions: Vec<String>,
    pub templates: Vec<String>,
    /// Extra slot adjectives per emotion; each emotion always matches its own name.
    pub adjectives: BTreeMap<String, Vec<String>>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            emotions: Vec::new(),
            templates: DEFAULT_TEMPLATES.iter().map(|s| s.to_string()).collect(),
            adjectives: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Corpus files or glob patterns (NDJSON, optionally gzip).
    pub inputs: Vec<String>,
    pub lexicons: Vec<LexiconEntry>,
    pub scores: Option<ScoreSource>,
    pub survey: Option<PathBuf>,
    pub output: PathBuf,
    pub split_date: NaiveDate,
    pub gender_mode: GenderMode,
    /// Shift applied to UTC timestamps before taking the calendar date.
    pub offset_minutes: i32,
    pub filter: FilterConfig,
    pub window: WeekWindow,
    /// Anchors whose window coverage is below this are left out of validation.
    pub min_coverage: f64,
    pub permutations: usize,
    pub seed: u64,
    pub dcca_window: usize,
    pub reports: ReportConfig,
    pub pronouns: Vec<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            lexicons: Vec::new(),
            scores: None,
            survey: None,
            output: PathBuf::from("out"),
            split_date: DEFAULT_SPLIT_DATE.parse().unwrap(),
            gender_mode: GenderMode::Rescaled,
            offset_minutes: 0,
            filter: FilterConfig::default(),
            window: WeekWindow::default(),
            min_coverage: 0.0,
            permutations: DEFAULT_PERMUTATIONS,
            seed: 1,
            dcca_window: DEFAULT_DCCA_WINDOW,
            reports: ReportConfig::default(),
            pronouns: DEFAULT_PRONOUNS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Flag overrides shared by the pipeline subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Output directory [config: output; default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// First date of the prediction period [config: split_date; default: 2020-11-01]
    #[arg(long)]
    pub split_date: Option<NaiveDate>,
    /// Gender handling of validated series [config: gender_mode; default: rescaled]
    #[arg(long, value_enum)]
    pub gender_mode: Option<GenderMode>,
    /// Permutations per test, at least 1000 [config: permutations; default: 10000]
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Permutation seed [config: seed; default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// DCCA box length in weeks [config: dcca_window; default: 12]
    #[arg(long)]
    pub dcca_window: Option<usize>,
    /// Minutes added to UTC before bucketing by date [config: offset_minutes; default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub offset_minutes: Option<i32>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn parse(src: &str) -> Result<PipelineConfig> {
        toml::from_str(src).map_err(|e| usage(format!("config: {e}")))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let src = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut cfg = PipelineConfig::parse(&src)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        self.inputs = self
            .inputs
            .iter()
            .map(|i| resolve(base, Path::new(i)).to_string_lossy().into_owned())
            .collect();
        for l in &mut self.lexicons {
            l.path = resolve(base, &l.path);
        }
        if let Some(s) = &mut self.scores {
            s.path = resolve(base, &s.path);
        }
        if let Some(s) = &mut self.survey {
            *s = resolve(base, s);
        }
        self.output = resolve(base, &self.output);
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.output = v.clone();
        }
        if let Some(v) = o.split_date {
            self.split_date = v;
        }
        if let Some(v) = o.gender_mode {
            self.gender_mode = v;
        }
        if let Some(v) = o.permutations {
            self.permutations = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.dcca_window {
            self.dcca_window = v;
        }
        if let Some(v) = o.offset_minutes {
            self.offset_minutes = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate().map_err(usage)?;
        if self.window.length == 0 {
            return Err(usage("window.length must be positive"));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(usage("min_coverage must lie in [0, 1]"));
        }
        if self.dcca_window < 4 {
            return Err(usage("dcca_window must be at least 4"));
        }
        let mut names = BTreeSet::new();
        for name in self.signal_names()? {
            if !names.insert(name.clone()) {
                return Err(usage(format!("duplicate signal name `{name}`")));
            }
        }
        Ok(())
    }

    pub fn validate_for_validation(&self) -> Result<()> {
        self.validate()?;
        if self.permutations < MIN_VALIDATION_PERMUTATIONS {
            return Err(usage(format!(
                "permutations = {} is below the minimum of {MIN_VALIDATION_PERMUTATIONS}",
                self.permutations
            )));
        }
        if self.survey.is_none() {
            return Err(usage("no survey configured"));
        }
        Ok(())
    }

    fn lexicon_name(entry: &LexiconEntry) -> Result<String> {
        match &entry.name {
            Some(n) => Ok(n.clone()),
            None => entry
                .path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| usage(format!("cannot name lexicon {}", entry.path.display()))),
        }
    }

    /// Configured signal names (score signals only when listed explicitly).
    fn signal_names(&self) -> Result<Vec<String>> {
        let mut names = Vec::new();
        for l in &self.lexicons {
            names.push(Self::lexicon_name(l)?);
        }
        names.extend(self.reports.emotions.iter().map(|e| format!("report_{e}")));
        if let Some(s) = &self.scores {
            names.extend(s.signals.iter().map(|s| format!("score_{}", s.emotion)));
        }
        Ok(names)
    }

    pub fn load_lexicons(&self) -> Result<Vec<Lexicon>> {
        self.lexicons
            .iter()
            .map(|l| {
                if !l.path.exists() {
                    return Err(usage(format!("lexicon {} does not exist", l.path.display())));
                }
                load_lexicon(&l.path, Some(&Self::lexicon_name(l)?)).map_err(usage)
            })
            .collect()
    }

    pub fn report_templates(&self) -> Result<ReportTemplateSet> {
        let mut terms: BTreeMap<String, BTreeSet<String>> = SURVEY_EMOTIONS
            .iter()
            .map(|e| (e.to_string(), BTreeSet::from([e.to_string()])))
            .collect();
        for (e, adjs) in &self.reports.adjectives {
            let entry = terms.entry(e.to_lowercase()).or_insert_with(|| BTreeSet::from([e.to_lowercase()]));
            entry.extend(adjs.iter().map(|a| a.to_lowercase()));
        }
        ReportTemplateSet::new(&self.reports.templates, terms).map_err(usage)
    }

    pub fn pronoun_list(&self) -> PronounList {
        PronounList::new(&self.pronouns)
    }

    /// Expands `inputs` into a sorted, de-duplicated file list. Every
    /// pattern must match at least one file.
    pub fn input_files(&self) -> Result<Vec<PathBuf>> {
        if self.inputs.is_empty() {
            return Err(usage("no inputs configured"));
        }
        let mut files = Vec::new();
        for pattern in &self.inputs {
            let matches: Vec<PathBuf> = glob::glob(pattern)
                .map_err(|e| usage(format!("input pattern `{pattern}`: {e}")))?
                .filter_map(|p| p.ok())
                .filter(|p| p.is_file())
                .collect();
            if matches.is_empty() {
                return Err(usage(format!("input `{pattern}` matches no file")));
            }
            files.extend(matches);
        }
        files.sort();
        files.dedup();
        Ok(files)
    }

    /// (signal name, survey emotion) for every validated signal, in config order.
    pub fn signal_pairs(&self, score_emotions: &[String]) -> Result<Vec<(String, String)>> {
        let mut pairs = Vec::new();
        for l in &self.lexicons {
            if let Some(s) = &l.survey {
                pairs.push((Self::lexicon_name(l)?, s.to_lowercase()));
            }
        }
        if let Some(scores) = &self.scores {
            for e in score_emotions {
                let survey = scores
                    .signals
                    .iter()
                    .find(|sig| &sig.emotion == e)
                    .and_then(|sig| sig.survey.clone())
                    .unwrap_or_else(|| e.clone());
                pairs.push((format!("score_{e}"), survey.to_lowercase()));
            }
        }
        for e in &self.reports.emotions {
            pairs.push((format!("report_{e}"), e.to_lowercase()));
        }
        // Group by survey emotion, keeping first-appearance order.
        let mut order: Vec<String> = Vec::new();
        for (_, s) in &pairs {
            if !order.contains(s) {
                order.push(s.clone());
            }
        }
        Ok(order
            .iter()
            .flat_map(|s| pairs.iter().filter(move |p| &p.1 == s).cloned())
            .collect())
    }
}
