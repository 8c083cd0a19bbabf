//! `y_t = α + β x_t + γ y_{t-1} + e_t` by OLS with Newey–West (Bartlett)
//! coefficient covariance.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::dist::t_two_sided;
use super::{check_pair, mean, Result, StatsError};

/// Newey–West rule of thumb `floor(4 (n/100)^(2/9))`.
pub fn newey_west_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HacOptions {
    /// Bartlett truncation lag; `None` applies [`newey_west_lag`] to the
    /// number of regression rows.
    pub lag: Option<usize>,
    /// Fit on z-scored `x` and `y` (coefficients then read as effect sizes).
    pub standardize: bool,
}

impl Default for HacOptions {
    fn default() -> Self {
        HacOptions {
            lag: None,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// HAC standard errors of (α, β, γ).
    pub hac_se: [f64; 3],
    pub t_beta: f64,
    pub p_beta: f64,
    pub lag: usize,
    /// Regression rows: one fewer than the series length.
    pub n_obs: usize,
    pub observed: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// (α, β, γ) on the original scale of the inputs.
    pub raw: [f64; 3],
}

/// Least-squares coefficients, residuals and `(X'X)^-1`.
pub fn ols(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>, DMatrix<f64>)> {
    let svd = design.clone().svd(false, false);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > smax * 1e-10) {
        return Err(StatsError::Singular);
    }
    let xtx = design.transpose() * design;
    let xtx_inv = xtx.try_inverse().ok_or(StatsError::Singular)?;
    let coef = &xtx_inv * design.transpose() * target;
    let resid = target - design * &coef;
    Ok((coef, resid, xtx_inv))
}

/// Sandwich `B S B` with `B = (X'X)^-1` and Bartlett-weighted score
/// autocovariances up to `lag` in `S`. `lag = 0` is the White (HC0)
/// estimator.
pub fn newey_west_cov(design: &DMatrix<f64>, resid: &DVector<f64>, xtx_inv: &DMatrix<f64>, lag: usize) -> DMatrix<f64> {
    let (n, k) = design.shape();
    let scores: Vec<DVector<f64>> = (0..n)
        .map(|t| design.row(t).transpose() * resid[t])
        .collect();
    let mut meat = DMatrix::<f64>::zeros(k, k);
    for s in &scores {
        meat += s * s.transpose();
    }
    for l in 1..=lag.min(n.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let mut gamma = DMatrix::<f64>::zeros(k, k);
        for t in l..n {
            gamma += &scores[t] * scores[t - l].transpose();
        }
        meat += (&gamma + gamma.transpose()) * w;
    }
    xtx_inv * meat * xtx_inv
}

fn zscore(v: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let m = mean(v);
    let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(StatsError::Singular);
    }
    Ok((v.iter().map(|a| (a - m) / sd).collect(), m, sd))
}

pub fn lagged_regression_hac(y: &[f64], x: &[f64]) -> Result<RegressionFit> {
    lagged_regression_hac_with(y, x, HacOptions::default())
}

pub fn lagged_regression_hac_with(y: &[f64], x: &[f64], opts: HacOptions) -> Result<RegressionFit> {
    check_pair(y, x, 8)?;
    let (ys, my, sy) = if opts.standardize { zscore(y)? } else { (y.to_vec(), 0.0, 1.0) };
    let (xs, mx, sx) = if opts.standardize { zscore(x)? } else { (x.to_vec(), 0.0, 1.0) };
    let m = y.len() - 1;
    let design = DMatrix::from_fn(m, 3, |r, c| match c {
        0 => 1.0,
        1 => xs[r + 1],
        _ => ys[r],
    });
    let target = DVector::from_iterator(m, ys[1..].iter().copied());
    let (coef, resid, xtx_inv) = ols(&design, &target)?;
    let lag = opts.lag.unwrap_or_else(|| newey_west_lag(m));
    let cov = newey_west_cov(&design, &resid, &xtx_inv, lag);
    let hac_se = [cov[(0, 0)].sqrt(), cov[(1, 1)].sqrt(), cov[(2, 2)].sqrt()];
    let (alpha, beta, gamma) = (coef[0], coef[1], coef[2]);
    let df = m as f64 - 3.0;
    let t_beta = beta / hac_se[1];
    let p_beta = if hac_se[1] > 0.0 && df > 0.0 {
        t_two_sided(t_beta, df)
    } else if beta != 0.0 {
        0.0
    } else {
        1.0
    };
    // Undo z-scoring: y = my + sy·ŷs, x enters through (x - mx)/sx.
    let raw_beta = beta * sy / sx;
    let raw_gamma = gamma;
    let raw_alpha = my + sy * alpha - raw_beta * mx - gamma * my;
    let fitted: Vec<f64> = (&design * &coef).iter().copied().collect();
    Ok(RegressionFit {
        alpha,
        beta,
        gamma,
        hac_se,
        t_beta,
        p_beta,
        lag,
        n_obs: m,
        observed: target.iter().copied().collect(),
        fitted,
        residuals: resid.iter().copied().collect(),
        raw: [raw_alpha, raw_beta, raw_gamma],
    })
}
