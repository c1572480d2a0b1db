//! Data tapers normalised so that the weights sum to the sample size.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Per-observation weights `h_{t,n}` with `Σ_t h_{t,n} = n`.
///
/// The un-normalised shape `h_n(t/n)` is kept alongside, together with its
/// moments `H_{1,n}` and `H_{2,n}`: the classical tapered periodogram is
/// defined through the raw shape, while the tapered complete periodogram
/// uses the rescaled weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Taper {
    weights: Vec<f64>,
    shape: Vec<f64>,
    h1: f64,
    h2: f64,
    label: String,
}

impl Taper {
    /// Builds a taper from an arbitrary nonnegative shape, rescaling by
    /// `n / H_{1,n}`.
    pub fn from_shape(shape: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::domain("taper must have at least one weight"));
        }
        if shape.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::domain("taper weights must be finite and nonnegative"));
        }
        let h1: f64 = shape.iter().sum();
        if h1 <= 0.0 {
            return Err(Error::domain("taper weights sum to zero"));
        }
        let h2: f64 = shape.iter().map(|h| h * h).sum();
        let scale = shape.len() as f64 / h1;
        let weights = shape.iter().map(|h| h * scale).collect();
        Ok(Self {
            weights,
            shape,
            h1,
            h2,
            label: label.into(),
        })
    }

    /// The all-ones taper (no tapering).
    pub fn ones(n: usize) -> Result<Self> {
        Self::from_shape(vec![1.0; n], "ones")
    }

    /// Normalised weights `h_{t,n}`, summing to `n`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Raw shape `h_n(t/n)` before rescaling.
    pub fn shape(&self) -> &[f64] {
        &self.shape
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    /// Rescaling constant `c_n = n / H_{1,n}`.
    pub fn scale(&self) -> f64 {
        self.weights.len() as f64 / self.h1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Tukey (cosine-bell) taper with `d` observations tapered at each end.
pub fn tukey_taper(n: usize, d: usize) -> Result<Taper> {
    if d == 0 || 2 * d > n {
        return Err(Error::domain(format!(
            "tukey taper needs 1 <= d <= n/2 (n = {n}, d = {d})"
        )));
    }
    let df = d as f64;
    let shape = (1..=n)
        .map(|t| {
            let tf = t as f64;
            if t <= d {
                0.5 * (1.0 - (PI * (tf - 0.5) / df).cos())
            } else if t <= n - d {
                1.0
            } else {
                0.5 * (1.0 - (PI * (n as f64 - tf + 0.5) / df).cos())
            }
        })
        .collect();
    Taper::from_shape(shape, format!("tukey(d={d})"))
}

/// Taper amount used by the experiments: ten percent of the sample, at least one.
pub fn default_taper_d(n: usize) -> usize {
    n.div_ceil(10).max(1)
}
