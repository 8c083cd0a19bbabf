//! Detrended cross-correlation coefficient.
//!
//! Both series are integrated into mean-removed profiles. Every run of
//! `window` consecutive profile points (step 1) gets its own least-squares
//! line per profile; the box covariance is the mean product of the two
//! residual series and `rho = F²xy / sqrt(F²xx F²yy)` over the box averages.
//!
//! Box sums come from prefix sums, giving O(n) work regardless of window.
//! Residuals are invariant to adding any global line to a profile, so each
//! profile is globally detrended first to keep the prefix sums small.

use serde::Serialize;

use super::{check_pair, is_constant, mean, Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DccaResult {
    pub rho: f64,
    pub window: usize,
    /// Filled by the caller from a permutation test.
    pub perm_p: Option<f64>,
}

pub fn dcca(x: &[f64], y: &[f64], window: usize) -> Result<DccaResult> {
    Ok(DccaResult {
        rho: dcca_rho(x, y, window)?,
        window,
        perm_p: None,
    })
}

/// Coefficient only; suitable as a permutation statistic.
pub fn dcca_rho(x: &[f64], y: &[f64], window: usize) -> Result<f64> {
    if window < 4 {
        return Err(StatsError::Invalid(format!("window {window} < 4")));
    }
    check_pair(x, y, window)?;
    if is_constant(x) || is_constant(y) {
        return Err(StatsError::ZeroVariance);
    }
    let px = flattened_profile(x);
    let py = flattened_profile(y);
    let (fxy, fxx, fyy) = box_covariances(&px, &py, window);
    if !(fxx > 0.0 && fyy > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    Ok((fxy / (fxx.sqrt() * fyy.sqrt())).clamp(-1.0, 1.0))
}

/// Cumulative sum of deviations with its global OLS line removed.
fn flattened_profile(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    let mut acc = 0.0;
    let profile: Vec<f64> = x
        .iter()
        .map(|v| {
            acc += v - m;
            acc
        })
        .collect();
    let n = profile.len() as f64;
    let tc = (n - 1.0) / 2.0;
    let pm = mean(&profile);
    let (mut stp, mut stt) = (0.0, 0.0);
    for (i, p) in profile.iter().enumerate() {
        let t = i as f64 - tc;
        stp += t * (p - pm);
        stt += t * t;
    }
    let slope = stp / stt;
    profile
        .iter()
        .enumerate()
        .map(|(i, p)| p - pm - slope * (i as f64 - tc))
        .collect()
}

#[derive(Clone, Copy, Default)]
struct Sums {
    t: f64,
    x: f64,
    y: f64,
    xx: f64,
    yy: f64,
    xy: f64,
    tx: f64,
    ty: f64,
}

impl Sums {
    fn sub(&self, o: &Sums) -> Sums {
        Sums {
            t: self.t - o.t,
            x: self.x - o.x,
            y: self.y - o.y,
            xx: self.xx - o.xx,
            yy: self.yy - o.yy,
            xy: self.xy - o.xy,
            tx: self.tx - o.tx,
            ty: self.ty - o.ty,
        }
    }
}

/// Averages over boxes of the detrended (co)variances: (F²xy, F²xx, F²yy).
fn box_covariances(px: &[f64], py: &[f64], w: usize) -> (f64, f64, f64) {
    let n = px.len();
    let tc = (n as f64 - 1.0) / 2.0;
    let mut prefix = Vec::with_capacity(n + 1);
    let mut s = Sums::default();
    prefix.push(s);
    for i in 0..n {
        let (t, a, b) = (i as f64 - tc, px[i], py[i]);
        s.t += t;
        s.x += a;
        s.y += b;
        s.xx += a * a;
        s.yy += b * b;
        s.xy += a * b;
        s.tx += t * a;
        s.ty += t * b;
        prefix.push(s);
    }
    let wf = w as f64;
    // Centered Σt² of any w consecutive integers.
    let ctt = wf * (wf * wf - 1.0) / 12.0;
    let boxes = n - w + 1;
    let (mut fxy, mut fxx, mut fyy) = (0.0, 0.0, 0.0);
    for j in 0..boxes {
        let b = prefix[j + w].sub(&prefix[j]);
        let ctx = b.tx - b.t * b.x / wf;
        let cty = b.ty - b.t * b.y / wf;
        let cxx = b.xx - b.x * b.x / wf;
        let cyy = b.yy - b.y * b.y / wf;
        let cxy = b.xy - b.x * b.y / wf;
        fxx += (cxx - ctx * ctx / ctt) / wf;
        fyy += (cyy - cty * cty / ctt) / wf;
        fxy += (cxy - ctx * cty / ctt) / wf;
    }
    let nb = boxes as f64;
    (fxy / nb, fxx / nb, fyy / nb)
}
