//! Tokenization and the three matcher families: emotion lexicons, explicit
//! first-person emotion reports, and third-person pronouns.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{name}: line {line}: {reason}")]
    BadEntry {
        name: String,
        line: usize,
        reason: String,
    },
    #[error("{0}: lexicon has no terms")]
    Empty(String),
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("template `{0}` must contain exactly one `_` slot")]
    BadTemplate(String),
    #[error("too many lexicons for one matcher: {0} (max 64)")]
    TooMany(usize),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Splits text into lowercase word tokens.
///
/// Whitespace-separated chunks that look like URLs (`http…`, `www…`) or
/// mentions (`@…`) are dropped whole. Remaining chunks split on anything that
/// is neither alphanumeric nor an apostrophe; apostrophes survive only inside a
/// token, so `I'm` stays one token. `#` is a separator, which leaves hashtag
/// bodies as plain tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    tokenize_into(text, &mut out);
    out
}

pub fn tokenize_into(text: &str, out: &mut Vec<String>) {
    out.clear();
    let lowered;
    let text = if !text.bytes().all(|b| b.is_ascii() && !b.is_ascii_uppercase()) {
        lowered = text.to_lowercase().replace('\u{2019}', "'");
        lowered.as_str()
    } else {
        text
    };
    for chunk in text.split_whitespace() {
        if is_url(chunk) || chunk.starts_with('@') {
            continue;
        }
        for raw in chunk.split(|c: char| !(c.is_alphanumeric() || c == '\'')) {
            let tok = raw.trim_matches('\'');
            if !tok.is_empty() && !is_url(tok) {
                out.push(tok.to_owned());
            }
        }
    }
}

fn is_url(s: &str) -> bool {
    s.starts_with("http") || s.starts_with("www")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub name: String,
    pub exact_terms: BTreeSet<String>,
    pub prefix_terms: BTreeSet<String>,
}

impl Lexicon {
    /// Parses the line-oriented lexicon format: one term per line, `#`
    /// comments, a trailing `*` marks a prefix (stem) term.
    pub fn parse(name: &str, source: &str) -> Result<Lexicon, LexiconError> {
        let mut exact_terms = BTreeSet::new();
        let mut prefix_terms = BTreeSet::new();
        for (idx, line) in source.lines().enumerate() {
            let entry = line.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| LexiconError::BadEntry {
                name: name.to_owned(),
                line: idx + 1,
                reason: reason.to_owned(),
            };
            if entry.split_whitespace().count() > 1 {
                return Err(bad("multi-word entries are not supported"));
            }
            let entry = entry.to_lowercase();
            let (term, is_prefix) = match entry.strip_suffix('*') {
                Some(stem) => (stem, true),
                None => (entry.as_str(), false),
            };
            if term.is_empty() {
                return Err(bad("bare `*` entry"));
            }
            if term.contains('*') {
                return Err(bad("`*` is only allowed at the end of a term"));
            }
            if is_prefix {
                prefix_terms.insert(term.to_owned());
            } else {
                exact_terms.insert(term.to_owned());
            }
        }
        if exact_terms.is_empty() && prefix_terms.is_empty() {
            return Err(LexiconError::Empty(name.to_owned()));
        }
        Ok(Lexicon {
            name: name.to_owned(),
            exact_terms,
            prefix_terms,
        })
    }

    pub fn from_terms<'a>(name: &str, terms: impl IntoIterator<Item = &'a str>) -> Result<Lexicon, LexiconError> {
        let joined: Vec<&str> = terms.into_iter().collect();
        Lexicon::parse(name, &joined.join("\n"))
    }

    pub fn term_count(&self) -> usize {
        self.exact_terms.len() + self.prefix_terms.len()
    }
}

/// Loads a lexicon file. The lexicon is named after the file stem unless
/// `name` is given.
pub fn load_lexicon(path: &Path, name: Option<&str>) -> Result<Lexicon, LexiconError> {
    let source = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Lexicon::parse(name.unwrap_or(&stem), &source)
}

/// Whole-token lexicon test.
pub fn matches_lexicon<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> bool {
    tokens.iter().any(|t| {
        let t = t.as_ref();
        lexicon.exact_terms.contains(t)
            || t.char_indices()
                .map(|(i, c)| &t[..i + c.len_utf8()])
                .any(|p| lexicon.prefix_terms.contains(p))
    })
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<char, u32>,
    mask: u64,
}

/// Matches up to 64 lexicons in one pass over a token list. Exact terms sit in
/// a hash map; stems sit in a character trie so each token is walked once.
#[derive(Debug, Clone)]
pub struct LexiconMatcher {
    names: Vec<String>,
    exact: HashMap<String, u64>,
    trie: Vec<TrieNode>,
}

impl LexiconMatcher {
    pub fn new(lexicons: &[Lexicon]) -> Result<LexiconMatcher, LexiconError> {
        if lexicons.len() > 64 {
            return Err(LexiconError::TooMany(lexicons.len()));
        }
        let mut exact: HashMap<String, u64> = HashMap::new();
        let mut trie = vec![TrieNode::default()];
        for (i, lex) in lexicons.iter().enumerate() {
            let bit = 1u64 << i;
            for term in &lex.exact_terms {
                *exact.entry(term.clone()).or_default() |= bit;
            }
            for stem in &lex.prefix_terms {
                let mut node = 0usize;
                for c in stem.chars() {
                    let next = trie.len() as u32;
                    let child = *trie[node].children.entry(c).or_insert(next);
                    if child == next {
                        trie.push(TrieNode::default());
                    }
                    node = child as usize;
                }
                trie[node].mask |= bit;
            }
        }
        Ok(LexiconMatcher {
            names: lexicons.iter().map(|l| l.name.clone()).collect(),
            exact,
            trie,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Bit `i` is set iff lexicon `i` matches some token.
    pub fn match_mask<S: AsRef<str>>(&self, tokens: &[S]) -> u64 {
        let mut mask = 0u64;
        for t in tokens {
            let t = t.as_ref();
            if let Some(m) = self.exact.get(t) {
                mask |= m;
            }
            let mut node = 0usize;
            for c in t.chars() {
                match self.trie[node].children.get(&c) {
                    Some(&next) => {
                        node = next as usize;
                        mask |= self.trie[node].mask;
                    }
                    None => break,
                }
            }
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Template {
    before: Vec<String>,
    after: Vec<String>,
    source: String,
}

impl Template {
    fn parse(source: &str) -> Result<Template, LexiconError> {
        let words: Vec<String> = source.split_whitespace().map(|w| w.to_lowercase()).collect();
        let slots: Vec<usize> = words
            .iter()
            .enumerate()
            .filter(|(_, w)| w.as_str() == "_")
            .map(|(i, _)| i)
            .collect();
        if slots.len() != 1 {
            return Err(LexiconError::BadTemplate(source.to_owned()));
        }
        let slot = slots[0];
        Ok(Template {
            before: words[..slot].to_vec(),
            after: words[slot + 1..].to_vec(),
            source: source.to_owned(),
        })
    }

    fn matches_at<S: AsRef<str>>(&self, tokens: &[S], slot: usize) -> bool {
        if slot < self.before.len() || slot + 1 + self.after.len() > tokens.len() {
            return false;
        }
        let start = slot - self.before.len();
        self.before
            .iter()
            .zip(&tokens[start..slot])
            .all(|(w, t)| w == t.as_ref())
            && self
                .after
                .iter()
                .zip(&tokens[slot + 1..])
                .all(|(w, t)| w == t.as_ref())
    }
}

pub const DEFAULT_TEMPLATES: [&str; 4] = ["i am _", "i'm _", "i feel _", "feeling _"];

/// The twelve weekly mood-survey states.
pub const SURVEY_EMOTIONS: [&str; 12] = [
    "happy",
    "sad",
    "scared",
    "bored",
    "stressed",
    "optimistic",
    "inspired",
    "frustrated",
    "lonely",
    "content",
    "energetic",
    "apathetic",
];

/// First-person report patterns ("i am _") and the adjectives that can fill
/// the slot for each emotion. Negation is not handled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportTemplateSet {
    templates: Vec<Template>,
    emotion_terms: BTreeMap<String, BTreeSet<String>>,
}

impl Default for ReportTemplateSet {
    fn default() -> Self {
        let emotion_terms = SURVEY_EMOTIONS
            .iter()
            .map(|e| (e.to_string(), BTreeSet::from([e.to_string()])))
            .collect();
        ReportTemplateSet::new(&DEFAULT_TEMPLATES, emotion_terms).expect("default templates are valid")
    }
}

impl ReportTemplateSet {
    pub fn new<S: AsRef<str>>(
        templates: &[S],
        emotion_terms: BTreeMap<String, BTreeSet<String>>,
    ) -> Result<ReportTemplateSet, LexiconError> {
        let templates = templates
            .iter()
            .map(|t| Template::parse(t.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let emotion_terms = emotion_terms
            .into_iter()
            .map(|(k, v)| (k.to_lowercase(), v.into_iter().map(|a| a.to_lowercase()).collect()))
            .collect();
        Ok(ReportTemplateSet {
            templates,
            emotion_terms,
        })
    }

    pub fn emotions(&self) -> impl Iterator<Item = &str> {
        self.emotion_terms.keys().map(String::as_str)
    }

    pub fn templates(&self) -> impl Iterator<Item = &str> {
        self.templates.iter().map(|t| t.source.as_str())
    }
}

/// True iff some template filled with one of the emotion's adjectives occurs
/// as a contiguous token run.
pub fn matches_explicit_report<S: AsRef<str>>(
    tokens: &[S],
    set: &ReportTemplateSet,
    emotion: &str,
) -> Result<bool, LexiconError> {
    let adjectives = set
        .emotion_terms
        .get(emotion)
        .ok_or_else(|| LexiconError::UnknownEmotion(emotion.to_owned()))?;
    Ok(tokens.iter().enumerate().any(|(i, t)| {
        adjectives.contains(t.as_ref()) && set.templates.iter().any(|tpl| tpl.matches_at(tokens, i))
    }))
}

pub const DEFAULT_PRONOUNS: [&str; 9] = ["they", "them", "their", "he", "him", "his", "she", "her", "hers"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounList {
    tokens: HashSet<String>,
}

impl Default for PronounList {
    fn default() -> Self {
        PronounList::new(DEFAULT_PRONOUNS)
    }
}

impl PronounList {
    pub fn new<I, S>(tokens: I) -> PronounList
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        PronounList {
            tokens: tokens.into_iter().map(|t| t.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.contains(token)
    }
}

pub fn contains_third_person<S: AsRef<str>>(tokens: &[S], pronouns: &PronounList) -> bool {
    tokens.iter().any(|t| pronouns.contains(t.as_ref()))
}
