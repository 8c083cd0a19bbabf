//! Parallel, file-level corpus ingestion into an [`Aggregator`].

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use macroscope::aggregate::{Aggregator, SignalSet};
use macroscope::corpus::{stream_file, FilterConfig, Gender, IngestStats};
use rayon::prelude::*;

use crate::error::{data, Result};

/// Record-level errors kept per file for the manifest.
const ERROR_SAMPLE: usize = 20;

pub struct Ingested<'a> {
    pub aggregator: Aggregator<'a>,
    pub stats: IngestStats,
    pub error_sample: Vec<String>,
    /// Genders of kept posts whose id appears in `score_ids`.
    pub score_genders: HashMap<String, Gender>,
}

pub fn ingest<'a>(
    files: &[PathBuf],
    set: &'a SignalSet,
    filter: &FilterConfig,
    score_ids: &HashSet<String>,
) -> Result<Ingested<'a>> {
    let parts: Vec<Result<Ingested<'a>>> = files
        .par_iter()
        .map(|path| {
            let mut aggregator = Aggregator::new(set);
            let mut score_genders = HashMap::new();
            let mut error_sample = Vec::new();
            let stats = stream_file(
                path,
                filter,
                |post| {
                    aggregator.add(&post);
                    if score_ids.contains(&post.id) {
                        score_genders.insert(post.id, post.author_gender);
                    }
                },
                |e| {
                    if error_sample.len() < ERROR_SAMPLE {
                        error_sample.push(format!("{}: {e}", path.display()));
                    }
                },
            )
            .map_err(|e| data(format!("{}: {e}", path.display())))?;
            Ok(Ingested {
                aggregator,
                stats,
                error_sample,
                score_genders,
            })
        })
        .collect();
    // Merge in file order so the error sample is deterministic.
    let mut total = Ingested {
        aggregator: Aggregator::new(set),
        stats: IngestStats::default(),
        error_sample: Vec::new(),
        score_genders: HashMap::new(),
    };
    for part in parts {
        let part = part?;
        total.aggregator.merge(&part.aggregator);
        total.stats.merge(&part.stats);
        total.error_sample.extend(part.error_sample);
        total.score_genders.extend(part.score_genders);
    }
    if total.stats.kept == 0 {
        return Err(data(format!(
            "no posts left after filtering ({} parsed, {} malformed, {} filtered out)",
            total.stats.parsed, total.stats.malformed, total.stats.dropped
        )));
    }
    Ok(total)
}
