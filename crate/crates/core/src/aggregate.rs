//! Single-pass aggregation of posts into per-signal stratified day counters
//! and third-person co-occurrence counts.

use crate::corpus::Post;
use crate::lexicon::{
    matches_explicit_report, tokenize_into, LexiconError, LexiconMatcher, PronounList, ReportTemplateSet,
};
use crate::signals::{DailySignal, GenderFilter, StratifiedCounter};

/// What is counted: lexicons (by matcher bit) and explicit-report emotions.
#[derive(Debug, Clone)]
pub struct SignalSet {
    pub matcher: LexiconMatcher,
    pub reports: ReportTemplateSet,
    pub report_emotions: Vec<String>,
    pub pronouns: PronounList,
    pub offset_minutes: i32,
}

impl SignalSet {
    pub fn new(
        matcher: LexiconMatcher,
        reports: ReportTemplateSet,
        report_emotions: Vec<String>,
        pronouns: PronounList,
        offset_minutes: i32,
    ) -> Result<SignalSet, LexiconError> {
        for e in &report_emotions {
            if !reports.emotions().any(|k| k == e) {
                return Err(LexiconError::UnknownEmotion(e.clone()));
            }
        }
        Ok(SignalSet {
            matcher,
            reports,
            report_emotions,
            pronouns,
            offset_minutes,
        })
    }

    /// Signal names in counter order: lexicons first, then `report_<emotion>`.
    pub fn names(&self) -> Vec<String> {
        self.matcher
            .names()
            .iter()
            .cloned()
            .chain(self.report_emotions.iter().map(|e| format!("report_{e}")))
            .collect()
    }
}

/// 2×2 pronoun counts for one lexicon.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PronounCounts {
    pub with_pronoun_matched: u64,
    pub matched: u64,
    pub with_pronoun_unmatched: u64,
    pub unmatched: u64,
}

impl PronounCounts {
    fn merge(&mut self, o: &PronounCounts) {
        self.with_pronoun_matched += o.with_pronoun_matched;
        self.matched += o.matched;
        self.with_pronoun_unmatched += o.with_pronoun_unmatched;
        self.unmatched += o.unmatched;
    }
}

#[derive(Debug, Clone)]
pub struct Aggregator<'a> {
    set: &'a SignalSet,
    counters: Vec<StratifiedCounter>,
    pronoun_counts: Vec<PronounCounts>,
    pub posts: u64,
    pub posts_with_pronoun: u64,
    tokens: Vec<String>,
}

impl<'a> Aggregator<'a> {
    pub fn new(set: &'a SignalSet) -> Self {
        let n = set.matcher.len() + set.report_emotions.len();
        Aggregator {
            set,
            counters: vec![StratifiedCounter::default(); n],
            pronoun_counts: vec![PronounCounts::default(); set.matcher.len()],
            posts: 0,
            posts_with_pronoun: 0,
            tokens: Vec::with_capacity(32),
        }
    }

    pub fn add(&mut self, post: &Post) {
        tokenize_into(&post.text, &mut self.tokens);
        let date = post.date(self.set.offset_minutes);
        let mask = self.set.matcher.match_mask(&self.tokens);
        let has_pronoun = crate::lexicon::contains_third_person(&self.tokens, &self.set.pronouns);
        self.posts += 1;
        self.posts_with_pronoun += has_pronoun as u64;
        let n_lex = self.set.matcher.len();
        for i in 0..n_lex {
            let hit = mask >> i & 1 == 1;
            self.counters[i].record(date, post.author_gender, hit);
            let pc = &mut self.pronoun_counts[i];
            if hit {
                pc.matched += 1;
                pc.with_pronoun_matched += has_pronoun as u64;
            } else {
                pc.unmatched += 1;
                pc.with_pronoun_unmatched += has_pronoun as u64;
            }
        }
        for (j, emotion) in self.set.report_emotions.iter().enumerate() {
            let hit = matches_explicit_report(&self.tokens, &self.set.reports, emotion)
                .expect("emotions checked in SignalSet::new");
            self.counters[n_lex + j].record(date, post.author_gender, hit);
        }
    }

    /// Integer-only merge; order of merging does not affect the result.
    pub fn merge(&mut self, other: &Aggregator<'_>) {
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            a.merge(b);
        }
        for (a, b) in self.pronoun_counts.iter_mut().zip(&other.pronoun_counts) {
            a.merge(b);
        }
        self.posts += other.posts;
        self.posts_with_pronoun += other.posts_with_pronoun;
    }

    pub fn counter(&self, index: usize) -> &StratifiedCounter {
        &self.counters[index]
    }

    pub fn pronoun_counts(&self, lexicon_index: usize) -> PronounCounts {
        self.pronoun_counts[lexicon_index]
    }

    /// Daily signal `index` (see [`SignalSet::names`]) in one stratum.
    pub fn signal(&self, index: usize, filter: GenderFilter) -> DailySignal {
        let name = &self.set.names()[index];
        self.counters[index].stratum(filter).to_signal(name)
    }
}
