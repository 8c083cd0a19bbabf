//! Two-sided permutation tests that shuffle the first series and keep the
//! second intact.
//!
//! Replicate `i` draws from ChaCha8 stream `i` of the configured seed, so the
//! result does not depend on how replicates are spread over threads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_pair, is_constant, Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shuffle {
    /// Uniform permutation of all observations.
    Full,
    /// Permute contiguous blocks of the given length (the last block may be
    /// shorter), keeping order within blocks.
    Block(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationConfig {
    pub n_perm: usize,
    pub seed: u64,
    pub shuffle: Shuffle,
}

impl PermutationConfig {
    pub fn new(n_perm: usize, seed: u64) -> Self {
        PermutationConfig {
            n_perm,
            seed,
            shuffle: Shuffle::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationResult {
    pub observed: f64,
    pub exceed: usize,
    pub n_perm: usize,
    pub p: f64,
}

fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn shuffled(x: &[f64], shuffle: Shuffle, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match shuffle {
        Shuffle::Full => {
            let mut v = x.to_vec();
            v.shuffle(rng);
            v
        }
        Shuffle::Block(len) => {
            let mut blocks: Vec<&[f64]> = x.chunks(len.max(1)).collect();
            blocks.shuffle(rng);
            blocks.concat()
        }
    }
}

/// Statistic values under `cfg.n_perm` shuffles of `x`, in replicate order.
pub fn permutation_distribution<F>(x: &[f64], y: &[f64], statistic: F, cfg: &PermutationConfig) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    if let Shuffle::Block(0) = cfg.shuffle {
        return Err(StatsError::Invalid("block length 0".into()));
    }
    (0..cfg.n_perm)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(cfg.seed, i);
            statistic(&shuffled(x, cfg.shuffle, &mut rng), y)
        })
        .collect()
}

/// Add-one p-value: `(1 + #{|s| >= |observed|}) / (n + 1)`. Ties are judged
/// with a relative tolerance of 1e-12 so that re-summation noise in a
/// permuted statistic does not break them.
pub fn p_from_distribution(observed: f64, distribution: &[f64]) -> (usize, f64) {
    let threshold = observed.abs() * (1.0 - 1e-12);
    let exceed = distribution.iter().filter(|s| s.abs() >= threshold).count();
    (exceed, (1 + exceed) as f64 / (distribution.len() + 1) as f64)
}

pub fn permutation_test<F>(x: &[f64], y: &[f64], statistic: F, cfg: &PermutationConfig) -> Result<PermutationResult>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    check_pair(x, y, 2)?;
    if cfg.n_perm == 0 {
        return Err(StatsError::Invalid("n_perm must be positive".into()));
    }
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::Constant);
    }
    let observed = statistic(x, y)?;
    let dist = permutation_distribution(x, y, &statistic, cfg)?;
    let (exceed, p) = p_from_distribution(observed, &dist);
    Ok(PermutationResult {
        observed,
        exceed,
        n_perm: cfg.n_perm,
        p,
    })
}
