//! Proportion intervals and threshold localization along a sweep grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
}

/// One grid point of a statistic: position, observed fraction, trial count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub x: f64,
    pub fraction: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub crossing: f64,
    pub interval: (f64, f64),
    /// Wilson half-widths of the fractions at the two bracketing points.
    pub half_widths: (f64, f64),
    pub inversions: usize,
}

fn standard_error(o: &Observation) -> f64 {
    if o.trials == 0 {
        return 0.0;
    }
    (o.fraction * (1.0 - o.fraction) / o.trials as f64).sqrt()
}

fn half_width(o: &Observation) -> f64 {
    let k = (o.fraction * o.trials as f64).round() as u64;
    let (lo, hi) = wilson_interval(k, o.trials);
    (hi - lo) / 2.0
}

/// Locates where a trending statistic crosses `level`, by linear
/// interpolation in the first bracketing grid interval.
///
/// Up to two steps against the expected trend are tolerated when each is
/// smaller than twice the combined standard error of its endpoints.
pub fn estimate_crossing(obs: &[Observation], level: f64, trend: Trend) -> Result<ThresholdEstimate> {
    let against = |a: &Observation, b: &Observation| match trend {
        Trend::Decreasing => b.fraction - a.fraction,
        Trend::Increasing => a.fraction - b.fraction,
    };
    let mut inversions = 0;
    let mut significant = 0;
    for w in obs.windows(2) {
        let step = against(&w[0], &w[1]);
        if step > 0.0 {
            inversions += 1;
            let se = (standard_error(&w[0]).powi(2) + standard_error(&w[1]).powi(2)).sqrt();
            if step >= 2.0 * se {
                significant += 1;
            }
        }
    }
    if inversions > 2 || significant > 0 {
        return Err(Error::NonMonotoneTrend { inversions });
    }
    let above = |f: f64| f >= level;
    for w in obs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let crosses = match trend {
            Trend::Decreasing => above(a.fraction) && !above(b.fraction),
            Trend::Increasing => !above(a.fraction) && above(b.fraction),
        };
        if crosses {
            let t = (a.fraction - level) / (a.fraction - b.fraction);
            return Ok(ThresholdEstimate {
                crossing: a.x + t * (b.x - a.x),
                interval: (a.x, b.x),
                half_widths: (half_width(a), half_width(b)),
                inversions,
            });
        }
    }
    Err(Error::NoCrossing { level })
}
