//! `synth`: a synthetic corpus with planted truth, survey and lexicons, plus
//! a pipeline config that runs on them.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use macroscope::signals::WeekWindow;
use macroscope::synth::{generate_survey, write_corpus, write_survey_csv, SurveyNoise, SynthConfig};

use crate::error::{data, usage, Result};

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SynthOverrides {
    /// Number of days [default: 120]
    #[arg(long)]
    pub days: Option<u32>,
    /// Posts per day [default: 1000]
    #[arg(long)]
    pub posts_per_day: Option<u32>,
    /// Share of gender-known posts by men [default: 0.639]
    #[arg(long)]
    pub male_share: Option<f64>,
    /// Share of posts the corpus filter must drop [default: 0]
    #[arg(long)]
    pub decoy_fraction: Option<f64>,
    /// Posts per day that receive emotion scores [default: 0]
    #[arg(long)]
    pub scores_per_day: Option<u32>,
    /// Pronoun insertion rate in posts without emotion terms [default: 0.15]
    #[arg(long)]
    pub pronoun_rate_neutral: Option<f64>,
    /// Pronoun insertion rate in posts with emotion terms [default: 0.15]
    #[arg(long)]
    pub pronoun_rate_emotional: Option<f64>,
    /// Generator seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SynthOverrides {
    pub fn apply(&self, cfg: &mut SynthConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(days, posts_per_day, male_share, decoy_fraction, scores_per_day, pronoun_rate_neutral, pronoun_rate_emotional, seed);
    }
}

pub fn load_config(path: Option<&Path>) -> Result<SynthConfig> {
    match path {
        None => Ok(SynthConfig::default()),
        Some(p) => {
            let src = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            toml::from_str(&src).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Pipeline config pointing at the generated files. The split falls on the
/// anchor two thirds through, moved so both periods keep 8 anchors if possible.
fn pipeline_toml(cfg: &SynthConfig) -> String {
    let anchors = cfg.weekly_anchors();
    let cut = if anchors.len() >= 16 {
        (anchors.len() * 2 / 3).clamp(8, anchors.len() - 8)
    } else {
        anchors.len() / 2
    };
    let split = anchors.get(cut).copied().unwrap_or(cfg.start);
    let mut s = String::from("# Generated by `macroscope synth`.\n");
    s.push_str("inputs = [\"corpus.ndjson\"]\nsurvey = \"survey.csv\"\noutput = \"out\"\n");
    s.push_str(&format!("split_date = \"{split}\"\ngender_mode = \"rescaled\"\npermutations = 10000\nseed = 1\ndcca_window = 12\n"));
    for e in &cfg.emotions {
        s.push_str(&format!(
            "\n[[lexicons]]\npath = \"lexicons/{}.txt\"\nsurvey = \"{}\"\n",
            e.name, e.survey_name
        ));
    }
    if cfg.scores_per_day > 0 {
        s.push_str("\n[scores]\npath = \"scores.ndjson\"\n");
        for e in &cfg.emotions {
            s.push_str(&format!(
                "\n[[scores.signals]]\nemotion = \"{}\"\nsurvey = \"{}\"\n",
                e.name, e.survey_name
            ));
        }
    }
    s
}

pub struct SynthOutcome {
    pub posts: u64,
    pub anchors: usize,
}

pub fn run(cfg: &SynthConfig, respondents: u64, out: &Path) -> Result<SynthOutcome> {
    cfg.validate().map_err(usage)?;
    fs::create_dir_all(out.join("lexicons")).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    let mut corpus = create(&out.join("corpus.ndjson"))?;
    let truth = if cfg.scores_per_day > 0 {
        let mut scores = create(&out.join("scores.ndjson"))?;
        let t = write_corpus(cfg, &mut corpus, Some(&mut scores as &mut dyn Write)).map_err(data)?;
        scores.flush().map_err(data)?;
        t
    } else {
        write_corpus(cfg, &mut corpus, None).map_err(data)?
    };
    truth.write_csv(create(&out.join("truth.csv"))?).map_err(data)?;
    let anchors = cfg.weekly_anchors();
    let noise = SurveyNoise {
        respondents: (respondents > 0).then_some(respondents),
        seed: cfg.seed.wrapping_add(1),
    };
    let survey = generate_survey(&truth, &anchors, WeekWindow::default(), noise).map_err(data)?;
    write_survey_csv(&survey, create(&out.join("survey.csv"))?).map_err(data)?;
    for e in &cfg.emotions {
        let mut body = e.lexicon.join("\n");
        body.push('\n');
        fs::write(out.join("lexicons").join(format!("{}.txt", e.name)), body).map_err(data)?;
    }
    fs::write(out.join("pipeline.toml"), pipeline_toml(cfg)).map_err(data)?;
    Ok(SynthOutcome {
        posts: cfg.days as u64 * cfg.posts_per_day as u64,
        anchors: anchors.len(),
    })
}
