//! Level-stationarity KPSS test with a Bartlett long-run variance.

use std::fmt;

use serde::{Serialize, Serializer};

use super::{mean, Result, StatsError};

/// Level-case critical values at 10%, 5%, 2.5% and 1%.
pub const CRITICAL_VALUES: [f64; 4] = [0.347, 0.463, 0.574, 0.739];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum KpssBand {
    Above10,
    Above05,
    Above025,
    Above01,
    AtMost01,
}

impl KpssBand {
    pub fn from_statistic(stat: f64) -> KpssBand {
        match CRITICAL_VALUES.iter().position(|cv| stat < *cv) {
            Some(0) => KpssBand::Above10,
            Some(1) => KpssBand::Above05,
            Some(2) => KpssBand::Above025,
            Some(3) => KpssBand::Above01,
            _ => KpssBand::AtMost01,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KpssBand::Above10 => "p>0.1",
            KpssBand::Above05 => "p>0.05",
            KpssBand::Above025 => "p>0.025",
            KpssBand::Above01 => "p>0.01",
            KpssBand::AtMost01 => "p<=0.01",
        }
    }
}

impl fmt::Display for KpssBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for KpssBand {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub lag: usize,
    pub band: KpssBand,
}

/// `floor(4 (n/100)^(1/4))`.
pub fn kpss_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

pub fn kpss(series: &[f64]) -> Result<KpssResult> {
    kpss_with_lag(series, kpss_lag(series.len()))
}

pub fn kpss_with_lag(series: &[f64], lag: usize) -> Result<KpssResult> {
    let n = series.len();
    if n < 10 {
        return Err(StatsError::TooShort { need: 10, got: n });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::Invalid("non-finite value".into()));
    }
    let m = mean(series);
    let e: Vec<f64> = series.iter().map(|v| v - m).collect();
    let nf = n as f64;
    let gamma0 = e.iter().map(|v| v * v).sum::<f64>() / nf;
    if !(gamma0 > 0.0) || super::is_constant(series) {
        return Err(StatsError::ZeroVariance);
    }
    let mut lrv = gamma0;
    for l in 1..=lag.min(n - 1) {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let g = (l..n).map(|t| e[t] * e[t - l]).sum::<f64>() / nf;
        lrv += 2.0 * w * g;
    }
    let mut s = 0.0;
    let mut ss = 0.0;
    for v in &e {
        s += v;
        ss += s * s;
    }
    let statistic = ss / (nf * nf) / lrv;
    Ok(KpssResult {
        statistic,
        lag,
        band: KpssBand::from_statistic(statistic),
    })
}
