//! Emotion macroscopes: daily emotion signals from social-media corpora,
//! aligned to weekly survey waves and checked against them with a battery of
//! time-series statistics.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`]: NDJSON post records and follower/retweet filtering.
//! * [`lexicon`]: tokenization, lexicon files, explicit-report templates and
//!   pronoun lists.
//! * [`signals`] and [`aggregate`]: daily fractions and scores, gender
//!   rescaling, weekly alignment and survey input.
//! * [`stats`]: correlation inference, permutation tests, DCCA, HAC
//!   regression, KPSS, χ² and ROC/AUC.
//! * [`synth`]: corpora with planted ground truth.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod corpus;
pub mod lexicon;
pub mod signals;
pub mod stats;
pub mod synth;
