use super::LyapunovError;

/// Delay-embedded points, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    #[inline]
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// vᵢ = (sᵢ, s_{i+τ}, …, s_{i+(m−1)τ}) for i = 0 … N − (m−1)τ − 1.
pub fn embed(series: &[f64], tau: usize, m: usize) -> Result<PointCloud, LyapunovError> {
    if tau == 0 || m == 0 {
        return Err(LyapunovError::InvalidConfig(format!(
            "delay and dimension must be positive (tau={tau}, m={m})"
        )));
    }
    let span = (m - 1) * tau;
    if series.len() < span + 1 {
        return Err(LyapunovError::SeriesTooShort {
            len: series.len(),
            needed: span + 1,
        });
    }
    let count = series.len() - span;
    let mut data = Vec::with_capacity(count * m);
    for i in 0..count {
        data.extend((0..m).map(|d| series[i + d * tau]));
    }
    Ok(PointCloud { dim: m, data })
}
