//! Command-line pipeline: `synth`, `signal`, `validate`, `thirdperson` and
//! `auc`.

pub mod auc;
pub mod config;
pub mod error;
pub mod ingest;
pub mod signal;
pub mod synth;
pub mod thirdperson;
pub mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, PipelineConfig};
use crate::error::{usage, Result};

#[derive(Debug, Parser)]
#[command(name = "macroscope", version, about = "Emotion signals from post corpora, validated against weekly surveys")]
#[command(after_help = "Exit codes: 0 success, 1 usage or config error, 2 data error.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus, survey, lexicons and pipeline config
    Synth {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Generator config (TOML); flags below override it
        #[arg(long)]
        config: Option<PathBuf>,
        /// Survey respondents per wave; 0 gives a noiseless survey
        #[arg(long, default_value_t = 2000)]
        respondents: u64,
        #[command(flatten)]
        overrides: synth::SynthOverrides,
    },
    /// Compute daily and weekly signals for every gender mode
    Signal {
        /// Pipeline config (TOML)
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Correlate weekly signals with the survey and run the test battery
    Validate {
        /// Pipeline config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Also report male-only and female-only rows
        #[arg(long)]
        stratified: bool,
        /// Write joined survey/signal series to <output>/plot
        #[arg(long)]
        plot_data: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Third-person pronoun rates with and without lexicon terms
    Thirdperson {
        /// Pipeline config (TOML); required unless --counts is given
        #[arg(long, required_unless_present = "counts")]
        config: Option<PathBuf>,
        /// Precomputed counts CSV
        /// (lexicon,with_pronoun_matched,matched,with_pronoun_unmatched,unmatched)
        #[arg(long)]
        counts: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// ROC curve and AUC of a score file against labels (id,emotion,label)
    Auc {
        /// Score file (NDJSON, optionally gzip)
        #[arg(long)]
        scores: PathBuf,
        /// Labels CSV
        #[arg(long)]
        labels: PathBuf,
        /// Only this emotion
        #[arg(long)]
        emotion: Option<String>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn pipeline_config(path: &std::path::Path, overrides: &Overrides) -> Result<PipelineConfig> {
    if !path.exists() {
        return Err(usage(format!("config {} does not exist", path.display())));
    }
    let mut cfg = PipelineConfig::load(path)?;
    cfg.apply(overrides);
    Ok(cfg)
}

/// Runs one command and returns the text for standard output.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Synth {
            out,
            config,
            respondents,
            overrides,
        } => {
            let mut cfg = synth::load_config(config.as_deref())?;
            overrides.apply(&mut cfg);
            let o = synth::run(&cfg, respondents, &out)?;
            Ok(format!(
                "wrote {} posts over {} days and {} survey waves to {}\n",
                o.posts,
                cfg.days,
                o.anchors,
                out.display()
            ))
        }
        Command::Signal { config, overrides } => {
            let cfg = pipeline_config(&config, &overrides)?;
            let o = signal::run(&cfg)?;
            Ok(format!("{}\n", o.summary()))
        }
        Command::Validate {
            config,
            stratified,
            plot_data,
            overrides,
        } => {
            let cfg = pipeline_config(&config, &overrides)?;
            let rows = validate::run(&cfg, &validate::ValidateOptions { stratified, plot_data })?;
            Ok(validate::render_table(&rows))
        }
        Command::Thirdperson {
            config,
            counts,
            overrides,
        } => {
            let (rows, out) = match (counts, config) {
                (Some(c), cfg) => {
                    let out = match cfg {
                        Some(p) => pipeline_config(&p, &overrides)?.output,
                        None => overrides.out.clone().unwrap_or_else(|| PathBuf::from("out")),
                    };
                    (thirdperson::from_counts(&c)?, out)
                }
                (None, Some(p)) => {
                    let cfg = pipeline_config(&p, &overrides)?;
                    (thirdperson::from_corpus(&cfg)?, cfg.output)
                }
                (None, None) => return Err(usage("either --config or --counts is required")),
            };
            thirdperson::write(&out, &rows)?;
            Ok(thirdperson::render_table(&rows))
        }
        Command::Auc {
            scores,
            labels,
            emotion,
            out,
        } => {
            let rows = auc::run(&scores, &labels, emotion.as_deref(), &out)?;
            let mut text = String::new();
            for r in rows {
                match (r.auc, r.skipped) {
                    (Some(a), _) => text.push_str(&format!("{}: AUC {a:.4} ({} scored, {} positive)\n", r.emotion, r.scored, r.positives)),
                    (None, reason) => text.push_str(&format!("{}: skipped: {}\n", r.emotion, reason.unwrap_or_default())),
                }
            }
            Ok(text)
        }
    }
}
