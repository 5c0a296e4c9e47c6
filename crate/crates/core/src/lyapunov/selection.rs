//! Automatic choice of embedding delay (first minimum of time-delayed mutual
//! information) and dimension (false nearest neighbours).

use super::{is_constant, EmbeddingConfig, LyapunovError, FALLBACK_DELAY, FALLBACK_DIMENSION};

pub const MI_BINS: usize = 16;
/// Largest dimension the false-nearest-neighbour scan will try.
pub const MAX_DIMENSION: usize = 10;
/// A dimension is accepted once its false-neighbour fraction drops below this.
pub const FNN_THRESHOLD: f64 = 0.01;
/// Half-width, in lags, of the moving average applied to the MI curve.
pub const MI_SMOOTHING: usize = 8;
const MIN_LEN: usize = 1000;
const MAX_LAG: usize = 1000;
const FNN_REFERENCES: usize = 2000;
// Kennel et al. thresholds.
const FNN_RTOL: f64 = 10.0;
const FNN_ATOL: f64 = 2.0;

fn check_series(series: &[f64]) -> Result<(), LyapunovError> {
    if series.len() < MIN_LEN {
        return Err(LyapunovError::SeriesTooShort {
            len: series.len(),
            needed: MIN_LEN,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(LyapunovError::DegenerateSeries(
            "series contains non-finite samples".into(),
        ));
    }
    if is_constant(series) {
        return Err(LyapunovError::DegenerateSeries("series is constant".into()));
    }
    Ok(())
}

/// Mutual information (nats) between sᵢ and s_{i+lag}, histogrammed into
/// [`MI_BINS`] equal-width bins over the series range.
pub fn mutual_information(series: &[f64], lag: usize) -> f64 {
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range <= 0.0 || lag >= series.len() {
        return 0.0;
    }
    let bin = |v: f64| (((v - min) / range * MI_BINS as f64) as usize).min(MI_BINS - 1);
    let pairs = series.len() - lag;
    let mut joint = [[0usize; MI_BINS]; MI_BINS];
    let mut pa = [0usize; MI_BINS];
    let mut pb = [0usize; MI_BINS];
    for i in 0..pairs {
        let (a, b) = (bin(series[i]), bin(series[i + lag]));
        joint[a][b] += 1;
        pa[a] += 1;
        pb[b] += 1;
    }
    let total = pairs as f64;
    let mut mi = 0.0;
    for a in 0..MI_BINS {
        for b in 0..MI_BINS {
            let n = joint[a][b];
            if n > 0 {
                let pab = n as f64 / total;
                mi += pab * (pab * total * total / (pa[a] as f64 * pb[b] as f64)).ln();
            }
        }
    }
    mi
}

/// First local minimum of the mutual-information curve after a centred
/// moving average over ±[`MI_SMOOTHING`] lags.
///
/// Binned MI of smooth signals is jagged at the scale of a few lags (the
/// lagged pairs cross histogram cells unevenly), which puts the first raw
/// minimum far too early; for a sinusoid it lands near lag 3 instead of the
/// quarter period.
pub fn choose_delay(series: &[f64]) -> Result<usize, LyapunovError> {
    check_series(series)?;
    let max_lag = (series.len() / 4).min(MAX_LAG);
    let w = MI_SMOOTHING;
    let mut raw: Vec<f64> = Vec::with_capacity(max_lag + w + 2);
    let smoothed = |lag: usize, raw: &mut Vec<f64>| {
        while raw.len() <= lag + w {
            raw.push(mutual_information(series, raw.len()));
        }
        let lo = lag.saturating_sub(w);
        raw[lo..=lag + w].iter().sum::<f64>() / (lag + w + 1 - lo) as f64
    };
    let mut prev = smoothed(0, &mut raw);
    let mut cur = smoothed(1, &mut raw);
    for lag in 1..max_lag {
        let next = smoothed(lag + 1, &mut raw);
        if cur < prev && cur <= next {
            return Ok(lag);
        }
        prev = cur;
        cur = next;
    }
    Err(LyapunovError::NoMinimumFound(format!(
        "smoothed mutual information decreases monotonically up to lag {max_lag}"
    )))
}

/// Fraction of false nearest neighbours when going from dimension `m` to
/// `m + 1`. Reference points are an evenly strided subset; neighbours closer
/// in time than `tau` samples are skipped.
pub fn fnn_fraction(series: &[f64], tau: usize, m: usize) -> f64 {
    let n = series.len();
    let span = m * tau;
    if n <= span + 1 {
        return 1.0;
    }
    let count = n - span;
    let mean = series.iter().sum::<f64>() / n as f64;
    let std = (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
    let coord = |i: usize, d: usize| series[i + d * tau];
    let stride = count.div_ceil(FNN_REFERENCES).max(1);

    let mut tested = 0usize;
    let mut false_nn = 0usize;
    for i in (0..count).step_by(stride) {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for j in 0..count {
            if i.abs_diff(j) <= tau {
                continue;
            }
            let d2: f64 = (0..m).map(|d| (coord(i, d) - coord(j, d)).powi(2)).sum();
            if d2 > 0.0 && d2 < best {
                best = d2;
                best_j = j;
            }
        }
        if best_j == usize::MAX {
            continue;
        }
        tested += 1;
        let extra = (coord(i, m) - coord(best_j, m)).abs();
        let dist_m = best.sqrt();
        let dist_next = (best + extra * extra).sqrt();
        if extra / dist_m > FNN_RTOL || dist_next / std > FNN_ATOL {
            false_nn += 1;
        }
    }
    if tested == 0 {
        1.0
    } else {
        false_nn as f64 / tested as f64
    }
}

/// Smallest m (at least 2) whose false-neighbour fraction is below
/// [`FNN_THRESHOLD`].
pub fn choose_dimension(series: &[f64], tau: usize) -> Result<usize, LyapunovError> {
    check_series(series)?;
    if tau == 0 {
        return Err(LyapunovError::InvalidConfig("delay must be at least 1".into()));
    }
    let mut last = 1.0;
    for m in 1..=MAX_DIMENSION {
        last = fnn_fraction(series, tau, m);
        if last < FNN_THRESHOLD {
            return Ok(m.max(2));
        }
    }
    Err(LyapunovError::NoMinimumFound(format!(
        "false-neighbour fraction still {:.3} at dimension {MAX_DIMENSION}",
        last
    )))
}

/// Embedding parameters chosen automatically, with fallbacks recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSelection {
    pub config: EmbeddingConfig,
    pub delay_fallback: bool,
    pub dimension_fallback: bool,
}

/// Chooses τ and m from the series, falling back to [`FALLBACK_DELAY`] and
/// [`FALLBACK_DIMENSION`] when no minimum exists. Degenerate or too-short
/// series are still errors.
pub fn select_embedding(series: &[f64], fit_range: (usize, usize)) -> Result<EmbeddingSelection, LyapunovError> {
    let (delay, delay_fallback) = match choose_delay(series) {
        Ok(t) => (t, false),
        Err(LyapunovError::NoMinimumFound(_)) => (FALLBACK_DELAY, true),
        Err(e) => return Err(e),
    };
    let (dimension, dimension_fallback) = match choose_dimension(series, delay) {
        Ok(m) => (m, false),
        Err(LyapunovError::NoMinimumFound(_)) => (FALLBACK_DIMENSION, true),
        Err(e) => return Err(e),
    };
    Ok(EmbeddingSelection {
        config: EmbeddingConfig::new(delay, dimension).with_fit_range(fit_range.0, fit_range.1),
        delay_fallback,
        dimension_fallback,
    })
}
