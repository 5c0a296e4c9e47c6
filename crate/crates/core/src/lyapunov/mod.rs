//! Largest Lyapunov exponent from a scalar time series.
//!
//! The series is delay-embedded, every reference point is paired with its
//! nearest neighbour outside a Theiler window, and the mean log-distance of
//! the pairs is tracked `k` samples ahead. The slope of that curve over the
//! fit range, divided by the sample interval, is λ_max.

mod embed;
mod periodicity;
mod selection;

pub use embed::{embed, PointCloud};
pub use periodicity::{autocorrelation_peak, AutocorrelationPeak};
pub use selection::{
    choose_delay, choose_dimension, mutual_information, select_embedding, EmbeddingSelection, FNN_THRESHOLD,
    MAX_DIMENSION, MI_BINS, MI_SMOOTHING,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("series too short: {len} samples, need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("no suitable value found: {0}")]
    NoMinimumFound(String),
    #[error("invalid embedding configuration: {0}")]
    InvalidConfig(String),
}

/// Delay used when the mutual-information curve has no local minimum.
pub const FALLBACK_DELAY: usize = 10;
/// Dimension used when false nearest neighbours never drop below threshold.
pub const FALLBACK_DIMENSION: usize = 3;
/// Divergence-curve indices fitted by default. Starts past the initial
/// alignment transient and ends before saturation for 10 ms sampling of
/// Lorenz-type flows.
pub const DEFAULT_FIT_RANGE: (usize, usize) = (50, 300);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// τ, in samples.
    pub delay: usize,
    /// m.
    pub dimension: usize,
    /// Neighbours closer in time than or equal to this many samples are
    /// ignored.
    pub theiler_window: usize,
    /// Inclusive range `[k_min, k_max]` of divergence-curve indices to fit.
    pub fit_range: (usize, usize),
    pub neighbor_count: usize,
}

impl EmbeddingConfig {
    /// Theiler window τ·m, default fit range, one neighbour.
    pub fn new(delay: usize, dimension: usize) -> Self {
        EmbeddingConfig {
            delay,
            dimension,
            theiler_window: delay * dimension,
            fit_range: DEFAULT_FIT_RANGE,
            neighbor_count: 1,
        }
    }

    pub fn with_fit_range(mut self, k_min: usize, k_max: usize) -> Self {
        self.fit_range = (k_min, k_max);
        self
    }

    pub fn with_theiler_window(mut self, w: usize) -> Self {
        self.theiler_window = w;
        self
    }

    pub fn with_neighbor_count(mut self, n: usize) -> Self {
        self.neighbor_count = n;
        self
    }

    /// Samples required for at least two admissible reference points.
    pub fn min_series_len(&self) -> usize {
        (self.dimension.saturating_sub(1)) * self.delay + self.fit_range.1 + self.theiler_window + 2
    }

    pub fn validate(&self) -> Result<(), LyapunovError> {
        if self.delay < 1 {
            return Err(LyapunovError::InvalidConfig("delay must be at least 1".into()));
        }
        if self.dimension < 2 {
            return Err(LyapunovError::InvalidConfig("dimension must be at least 2".into()));
        }
        if self.fit_range.0 >= self.fit_range.1 {
            return Err(LyapunovError::InvalidConfig(format!(
                "fit range [{}, {}] is empty",
                self.fit_range.0, self.fit_range.1
            )));
        }
        if self.neighbor_count < 1 {
            return Err(LyapunovError::InvalidConfig("neighbor_count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Per unit time: slope per sample divided by the sample interval.
    pub lambda_max: f64,
    pub config: EmbeddingConfig,
    pub fit_r2: f64,
    pub series_len: usize,
    /// Mean log-distance ⟨ln dₖ⟩ for k = 0..=k_max.
    pub divergence_curve: Vec<f64>,
}

fn is_constant(series: &[f64]) -> bool {
    series.windows(2).all(|w| w[0] == w[1])
}

/// Nearest-neighbour divergence estimate of λ_max. Deterministic: the
/// neighbour search and every reduction run in index order.
pub fn estimate_lambda_max(series: &[f64], h: f64, cfg: &EmbeddingConfig) -> Result<LyapunovEstimate, LyapunovError> {
    cfg.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(LyapunovError::InvalidConfig(format!(
            "sample interval must be positive, got {h}"
        )));
    }
    let needed = cfg.min_series_len();
    if series.len() < needed {
        return Err(LyapunovError::SeriesTooShort {
            len: series.len(),
            needed,
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

    let cloud = embed(series, cfg.delay, cfg.dimension)?;
    let (k_min, k_max) = cfg.fit_range;
    let n_ref = cloud.len() - k_max;
    let pairs = neighbour_pairs(&cloud, n_ref, cfg.theiler_window, cfg.neighbor_count);
    if pairs.is_empty() {
        return Err(LyapunovError::DegenerateSeries(
            "no reference point has a distinct neighbour outside the Theiler window".into(),
        ));
    }

    let mut curve = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &(i, j) in &pairs {
            let d2 = cloud.dist2(i + k, j + k);
            if d2 > 0.0 {
                sum += 0.5 * d2.ln();
                count += 1;
            }
        }
        if count == 0 {
            return Err(LyapunovError::DegenerateSeries(format!(
                "every neighbour pair coincides {k} samples ahead"
            )));
        }
        curve.push(sum / count as f64);
    }

    let (slope, r2) = linear_fit(k_min, &curve[k_min..=k_max]);
    Ok(LyapunovEstimate {
        lambda_max: slope / h,
        config: *cfg,
        fit_r2: r2,
        series_len: series.len(),
        divergence_curve: curve,
    })
}

/// Up to `count` nearest neighbours (by index-ordered scan, ties to the
/// earlier index) for each of the first `n_ref` points, excluding neighbours
/// within the Theiler window and exact duplicates.
fn neighbour_pairs(cloud: &PointCloud, n_ref: usize, theiler: usize, count: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_ref * count);
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(count + 1);
    for i in 0..n_ref {
        best.clear();
        for j in 0..n_ref {
            if i.abs_diff(j) <= theiler {
                continue;
            }
            let d2 = cloud.dist2(i, j);
            if d2 == 0.0 {
                continue;
            }
            if best.len() == count && d2 >= best[count - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(b, _)| b <= d2);
            best.insert(pos, (d2, j));
            best.truncate(count);
        }
        pairs.extend(best.iter().map(|&(_, j)| (i, j)));
    }
    pairs
}

/// Least-squares slope and R² of `ys` against x = offset, offset+1, …
fn linear_fit(offset: usize, ys: &[f64]) -> (f64, f64) {
    let n = ys.len() as f64;
    let xs = || (0..ys.len()).map(|i| (offset + i) as f64);
    let x_mean = xs().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, &y) in xs().zip(ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, &y) in xs().zip(ys) {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, r2.clamp(0.0, 1.0))
}
