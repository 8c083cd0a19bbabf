//! Post records: NDJSON parsing, follower/retweet filtering and streaming
//! ingestion of (optionally gzip-compressed) corpus files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: u64, field: &'static str },
    #[error("line {line}: unparseable timestamp `{value}`")]
    Timestamp { line: u64, value: String },
    #[error("invalid filter: min_followers {min} > max_followers {max}")]
    InvalidFilter { min: u64, max: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CorpusError {
    /// Line number for record-level errors.
    pub fn line(&self) -> Option<u64> {
        match self {
            CorpusError::Malformed { line, .. }
            | CorpusError::MissingField { line, .. }
            | CorpusError::Timestamp { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn parse(s: &str) -> Gender {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" => Gender::Male,
            "female" => Gender::Female,
            _ => Gender::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Post {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub author_gender: Gender,
    pub author_followers: u64,
    pub is_retweet: bool,
}

impl Post {
    /// Calendar date of the post after shifting by `offset_minutes` from UTC.
    pub fn date(&self, offset_minutes: i32) -> NaiveDate {
        (self.timestamp + Duration::minutes(offset_minutes as i64)).date_naive()
    }

    /// Serializes the post back into the documented record layout.
    pub fn to_record(&self) -> String {
        let rec = RecordOut {
            id: &self.id,
            created_at: self.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            text: &self.text,
            author_gender: self.author_gender.as_str(),
            author_followers: self.author_followers,
            is_retweet: self.is_retweet,
        };
        serde_json::to_string(&rec).expect("record serialization cannot fail")
    }
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    created_at: String,
    text: &'a str,
    author_gender: &'a str,
    author_followers: u64,
    is_retweet: bool,
}

#[derive(Deserialize)]
struct RecordIn {
    id: Option<IdField>,
    created_at: Option<String>,
    text: Option<String>,
    author_gender: Option<serde_json::Value>,
    author_followers: Option<u64>,
    is_retweet: Option<bool>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdField {
    Str(String),
    Num(serde_json::Number),
}

/// Parses one NDJSON record. `line_no` is 1-based and only used in errors.
pub fn parse_post_record(line: &str, line_no: u64) -> Result<Post, CorpusError> {
    let rec: RecordIn = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
        line: line_no,
        reason: e.to_string(),
    })?;
    let id = match rec.id {
        Some(IdField::Str(s)) => s,
        Some(IdField::Num(n)) => n.to_string(),
        None => {
            return Err(CorpusError::MissingField {
                line: line_no,
                field: "id",
            })
        }
    };
    let created_at = rec.created_at.ok_or(CorpusError::MissingField {
        line: line_no,
        field: "created_at",
    })?;
    let text = rec.text.ok_or(CorpusError::MissingField {
        line: line_no,
        field: "text",
    })?;
    let timestamp = DateTime::parse_from_rfc3339(created_at.trim())
        .map_err(|_| CorpusError::Timestamp {
            line: line_no,
            value: created_at.clone(),
        })?
        .with_timezone(&Utc);
    let author_gender = match rec.author_gender {
        Some(serde_json::Value::String(s)) => Gender::parse(&s),
        _ => Gender::Unknown,
    };
    Ok(Post {
        id,
        timestamp,
        text,
        author_gender,
        author_followers: rec.author_followers.unwrap_or(0),
        is_retweet: rec.is_retweet.unwrap_or(false),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_followers: u64,
    pub max_followers: u64,
    pub exclude_retweets: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_followers: 100,
            max_followers: 100_000,
            exclude_retweets: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.min_followers > self.max_followers {
            return Err(CorpusError::InvalidFilter {
                min: self.min_followers,
                max: self.max_followers,
            });
        }
        Ok(())
    }
}

/// Keep/drop decision. Both follower bounds are inclusive.
pub fn filter_post(post: &Post, cfg: &FilterConfig) -> bool {
    (cfg.min_followers..=cfg.max_followers).contains(&post.author_followers)
        && !(cfg.exclude_retweets && post.is_retweet)
}

/// Exact ingestion counters. `parsed = kept + dropped`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines: u64,
    pub parsed: u64,
    pub malformed: u64,
    pub dropped: u64,
    pub kept: u64,
}

impl IngestStats {
    pub fn merge(&mut self, other: &IngestStats) {
        self.lines += other.lines;
        self.parsed += other.parsed;
        self.malformed += other.malformed;
        self.dropped += other.dropped;
        self.kept += other.kept;
    }
}

/// Opens a corpus file, transparently decompressing gzip input (detected by
/// magic bytes, not extension).
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = read_prefix(&mut file, &mut magic)?;
    let file = File::open(path)?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn read_prefix(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

/// Streams filtered posts from a reader into `sink`. Record-level errors are
/// counted and handed to `on_error`; only I/O failures abort the stream.
pub fn stream_posts<R, F, E>(
    reader: R,
    filter: &FilterConfig,
    mut sink: F,
    mut on_error: E,
) -> Result<IngestStats, CorpusError>
where
    R: BufRead,
    F: FnMut(Post),
    E: FnMut(CorpusError),
{
    let mut stats = IngestStats::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        match parse_post_record(&line, idx as u64 + 1) {
            Ok(post) => {
                stats.parsed += 1;
                if filter_post(&post, filter) {
                    stats.kept += 1;
                    sink(post);
                } else {
                    stats.dropped += 1;
                }
            }
            Err(e) => {
                stats.malformed += 1;
                on_error(e);
            }
        }
    }
    Ok(stats)
}

/// Convenience wrapper over [`stream_posts`] for a file path.
pub fn stream_file<F, E>(
    path: &Path,
    filter: &FilterConfig,
    sink: F,
    on_error: E,
) -> Result<IngestStats, CorpusError>
where
    F: FnMut(Post),
    E: FnMut(CorpusError),
{
    stream_posts(open_input(path)?, filter, sink, on_error)
}
