//! Basic value types shared by every estimator: observed series, frequency
//! grids and autocovariance sequences.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A finite, real-valued observed sample `X_1, ..., X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    centered: bool,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("time series must contain at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            values,
            centered: false,
        })
    }

    /// Returns a copy with the sample mean removed.
    pub fn centered(&self) -> Self {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        Self {
            values: self.values.iter().map(|v| v - mean).collect(),
            centered: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise linear combination `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &TimeSeries, beta: f64) -> Result<TimeSeries> {
        if self.len() != other.len() {
            return Err(Error::domain("series lengths differ"));
        }
        TimeSeries::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| alpha * x + beta * y)
                .collect(),
        )
    }
}

/// How a [`FrequencyGrid`] was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Fourier frequencies `2πk/n`, `k = 1..n`, with `2π` stored as `0`.
    Fourier(usize),
    /// Midpoints `2π(j + 1/2)/count` of `count` equal cells of `[0, 2π)`.
    Uniform(usize),
    Explicit,
}

/// Strictly increasing frequencies in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    frequencies: Vec<f64>,
    kind: GridKind,
}

impl FrequencyGrid {
    pub fn fourier(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Fourier grid needs n >= 1"));
        }
        let frequencies = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        Ok(Self {
            frequencies,
            kind: GridKind::Fourier(n),
        })
    }

    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::domain("uniform grid needs at least one cell"));
        }
        let frequencies = (0..count)
            .map(|j| 2.0 * PI * (j as f64 + 0.5) / count as f64)
            .collect();
        Ok(Self {
            frequencies,
            kind: GridKind::Uniform(count),
        })
    }

    pub fn explicit(frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::domain("explicit grid is empty"));
        }
        for w in &frequencies {
            if !(w.is_finite() && *w >= 0.0 && *w < 2.0 * PI) {
                return Err(Error::domain(format!("frequency {w} outside [0, 2π)")));
            }
        }
        if frequencies.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::domain("explicit grid must be strictly increasing"));
        }
        Ok(Self {
            frequencies,
            kind: GridKind::Explicit,
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Index of the frequency `2π − ω` for the entry at `idx`, if present.
    pub fn mirror_index(&self, idx: usize) -> Option<usize> {
        match self.kind {
            GridKind::Fourier(n) => Some((n - idx) % n),
            GridKind::Uniform(count) => Some(count - 1 - idx),
            GridKind::Explicit => {
                let w = self.frequencies[idx];
                let target = if w == 0.0 { 0.0 } else { 2.0 * PI - w };
                self.frequencies
                    .iter()
                    .position(|&v| (v - target).abs() <= 1e-12)
            }
        }
    }
}

/// Which estimator produced a [`CovarianceSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceEstimator {
    Population,
    BiasedSample,
}

/// Autocovariances `c(0), ..., c(L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSequence {
    lags: Vec<f64>,
    estimator: CovarianceEstimator,
}

impl CovarianceSequence {
    pub fn new(lags: Vec<f64>, estimator: CovarianceEstimator) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::domain("covariance sequence needs lag 0"));
        }
        if lags.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("non-finite autocovariance"));
        }
        let c0 = lags[0];
        let all_zero = lags.iter().all(|&c| c == 0.0);
        if !all_zero && c0 <= 0.0 {
            return Err(Error::domain("c(0) must be positive"));
        }
        if estimator == CovarianceEstimator::BiasedSample {
            let tol = 1e-12 * c0.abs().max(f64::MIN_POSITIVE);
            if lags.iter().any(|c| c.abs() > c0 + tol) {
                return Err(Error::domain("sample autocovariance exceeds c(0)"));
            }
        }
        Ok(Self { lags, estimator })
    }

    pub fn population(lags: Vec<f64>) -> Result<Self> {
        Self::new(lags, CovarianceEstimator::Population)
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    pub fn estimator(&self) -> CovarianceEstimator {
        self.estimator
    }

    /// Largest stored lag `L`.
    pub fn max_lag(&self) -> usize {
        self.lags.len() - 1
    }

    /// `c(k)` for a signed lag, using `c(-k) = c(k)`.
    pub fn at(&self, k: isize) -> Option<f64> {
        self.lags.get(k.unsigned_abs()).copied()
    }
}
