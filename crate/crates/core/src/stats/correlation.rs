use serde::Serialize;

use super::dist::{normal_quantile, t_two_sided};
use super::{check_pair, is_constant, mean, Result, StatsError};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::Constant);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn check_r(r: f64, n: usize) -> Result<()> {
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(StatsError::Invalid(format!("r = {r}")));
    }
    if r.abs() == 1.0 {
        return Err(StatsError::PerfectCorrelation);
    }
    if n < 4 {
        return Err(StatsError::TooShort { need: 4, got: n });
    }
    Ok(())
}

/// Fisher-z confidence interval: `tanh(atanh(r) ± q / sqrt(n - 3))`.
pub fn fisher_ci(r: f64, n: usize, level: f64) -> Result<(f64, f64)> {
    check_r(r, n)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Invalid(format!("level = {level}")));
    }
    let z = r.atanh();
    let half = normal_quantile(0.5 + level / 2.0) / ((n - 3) as f64).sqrt();
    Ok(((z - half).tanh(), (z + half).tanh()))
}

/// Two-sided p-value of `t = r sqrt((n-2)/(1-r²))` on `n - 2` degrees of
/// freedom.
pub fn correlation_p(r: f64, n: usize) -> Result<f64> {
    check_r(r, n)?;
    if r == 0.0 {
        return Ok(1.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    Ok(t_two_sided(t, df))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p: f64,
    pub level: f64,
}

pub fn correlate(x: &[f64], y: &[f64], level: f64) -> Result<CorrelationResult> {
    let r = pearson(x, y)?;
    let n = x.len();
    let (ci_low, ci_high) = fisher_ci(r, n, level)?;
    let p = correlation_p(r, n)?;
    Ok(CorrelationResult {
        r,
        n,
        ci_low,
        ci_high,
        p,
        level,
    })
}

/// Star notation for p < 0.001 / 0.01 / 0.05 / 0.1.
pub fn significance_marker(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else if p < 0.1 {
        "·"
    } else {
        "(n.s.)"
    }
}
