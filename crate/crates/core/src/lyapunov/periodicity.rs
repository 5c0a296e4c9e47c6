/// Largest normalized autocorrelation over lags `min_lag..=n/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutocorrelationPeak {
    pub value: f64,
    pub lag: usize,
}

/// Pearson correlation of the series against itself shifted by each lag of
/// at least `min_lag_time / h` samples, up to half the series length.
/// Returns `None` when no lag fits or the series has no variance.
pub fn autocorrelation_peak(series: &[f64], h: f64, min_lag_time: f64) -> Option<AutocorrelationPeak> {
    let n = series.len();
    let min_lag = ((min_lag_time / h).ceil() as usize).max(1);
    let max_lag = n / 2;
    if min_lag > max_lag {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let mut best: Option<AutocorrelationPeak> = None;
    for lag in min_lag..=max_lag {
        let (a, b) = (&centered[..n - lag], &centered[lag..]);
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for (x, y) in a.iter().zip(b) {
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        if saa == 0.0 || sbb == 0.0 {
            continue;
        }
        let r = sab / (saa * sbb).sqrt();
        if best.is_none_or(|p| r > p.value) {
            best = Some(AutocorrelationPeak { value: r, lag });
        }
    }
    best
}
